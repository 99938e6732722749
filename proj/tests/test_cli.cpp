#include "cli.hpp"

#include "dgpinn/reporting.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dgpinn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dgpinn::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "dgpinn_cli_tests" / name;
  fs::remove_all(p);
  return p;
}

// Small enough to finish in a second or two.
std::vector<std::string> small(std::vector<std::string> extra) {
  std::vector<std::string> args{"--m1", "40", "--m2", "10", "--nd", "300", "--nr", "100",
                                "--ni", "20", "--nb", "20",
                                "--set", "network.hidden_width=12",
                                "--set", "network.hidden_layers=2",
                                "--set", "sampling.grid=31,31"};
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST(Cli, TrainWritesRunDirectory) {
  const fs::path dir = scratch("train");
  auto args = small({"--problem", "heat", "--seed", "0", "--out", dir.string()});
  args.insert(args.begin(), "train");
  const Outcome o = run_cli(args);
  ASSERT_EQ(o.code, 0) << o.err;
  const auto report = read_json(dir / dgpinn::kReportFile);
  EXPECT_EQ(report.at("converged"), true);
  EXPECT_EQ(report.at("problem"), "heat");
  EXPECT_TRUE(fs::exists(dir / dgpinn::kCheckpointFile));

  const Outcome rerun = run_cli({"train", "--rerun", dir.string()});
  EXPECT_EQ(rerun.code, 0) << rerun.err;

  const Outcome eval = run_cli({"eval", "--run", dir.string()});
  EXPECT_EQ(eval.code, 0) << eval.err;
  EXPECT_NE(eval.out.find("R_t(u)"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitOne) {
  EXPECT_EQ(run_cli({"train", "--problem", "heat", "--m1", "0"}).code, 1);
  EXPECT_EQ(run_cli({"train", "--problem", "poisson"}).code, 1);
  EXPECT_EQ(run_cli({"train", "--set", "training.bogus=3"}).code, 1);
  EXPECT_EQ(run_cli({"train", "--set", "nokey"}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"train", "--config", "/nonexistent/file.ini"}).code, 1);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, NumericalFailureExitsTwo) {
  auto args = small({"--problem", "heat", "--set", "training.adam_lr=1e200", "--out",
                     scratch("diverge").string()});
  args.insert(args.begin(), "train");
  EXPECT_EQ(run_cli(args).code, 2);
}

TEST(Cli, EvalRejectsBadCheckpoints) {
  const fs::path dir = scratch("eval_wave");
  auto args = small({"--problem", "wave", "--out", dir.string()});
  args.insert(args.begin(), "train");
  ASSERT_EQ(run_cli(args).code, 0);

  const fs::path ckpt = dir / dgpinn::kCheckpointFile;
  EXPECT_EQ(run_cli({"eval", "--checkpoint", ckpt.string(), "--problem", "heat"}).code, 1);

  const fs::path cut = scratch("eval_truncated");
  fs::create_directories(cut);
  {
    std::ifstream in(ckpt, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    std::ofstream(cut / "short.dgpn", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  }
  EXPECT_EQ(run_cli({"eval", "--checkpoint", (cut / "short.dgpn").string(), "--problem", "wave"}).code, 1);
  EXPECT_EQ(run_cli({"eval"}).code, 1);
}

TEST(Cli, RerunDetectsEditedReport) {
  const fs::path dir = scratch("rerun_diff");
  auto args = small({"--problem", "heat", "--out", dir.string()});
  args.insert(args.begin(), "train");
  ASSERT_EQ(run_cli(args).code, 0);
  auto report = read_json(dir / dgpinn::kReportFile);
  report["final_loss"]["total"] = 123.0;
  std::ofstream(dir / dgpinn::kReportFile) << report.dump(2);
  EXPECT_EQ(run_cli({"train", "--rerun", dir.string()}).code, 2);
}

TEST(Cli, CompareWritesBothMethods) {
  const fs::path dir = scratch("compare");
  auto args = small({"--problem", "heat", "--trials", "2", "--jobs", "2", "--out", dir.string()});
  args.insert(args.begin(), "compare");
  const Outcome o = run_cli(args);
  ASSERT_EQ(o.code, 0) << o.err;
  const auto summary = read_json(dir / "summary.json");
  ASSERT_EQ(summary.at("methods").size(), 2u);
  EXPECT_EQ(summary.at("methods")[0].at("method"), "dg_pinn");
  EXPECT_EQ(summary.at("methods")[1].at("method"), "pinn_baseline");
  EXPECT_TRUE(fs::exists(dir / "pinn_baseline" / "seed1" / dgpinn::kReportFile));
}

TEST(Cli, SweepWritesCsv) {
  const fs::path dir = scratch("sweep");
  auto args = small({"--problem", "heat", "--values", "200,100", "--out", dir.string()});
  args.insert(args.begin(), "sweep-nd");
  const Outcome o = run_cli(args);
  ASSERT_EQ(o.code, 0) << o.err;
  std::ifstream in(dir / "sweep.csv");
  std::string csv((std::istreambuf_iterator<char>(in)), {});
  const dgpinn::SweepResult r = dgpinn::parse_sweep_csv(csv);
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_EQ(r.points[0].value, 100.0);
  EXPECT_EQ(r.axis, dgpinn::SweepAxis::n_d);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
}

TEST(Cli, GenDataManifest) {
  const fs::path dir = scratch("gen");
  const Outcome o = run_cli({"gen-data", "--problem", "beam", "--snr-db", "30", "--seed", "4",
                             "--set", "sampling.grid=21,21", "--nd", "100", "--nr", "50",
                             "--ni", "10", "--nb", "10", "--out", dir.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto m = read_json(dir / "manifest.json");
  EXPECT_EQ(m.at("counts").at("n_d"), 100);
  EXPECT_EQ(m.at("counts").at("n_t"), 21 * 21 - 100);
  EXPECT_EQ(m.at("snr_db"), 30.0);
  for (const char* f : {"residual.txt", "initial.txt", "boundary.txt", "data.txt", "test.txt"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
}
