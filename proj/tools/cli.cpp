#include "cli.hpp"

#include "dgpinn/checkpoint.hpp"
#include "dgpinn/errors.hpp"
#include "dgpinn/reporting.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace dgpinn::cli {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config_file;
  std::vector<std::string> sets;
  std::string problem;
  long m1 = 0;
  long m2 = 0;
  long nd = 0;
  long nr = 0;
  long ni = 0;
  long nb = 0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  bool desk = false;
  std::string mode;
  std::string out;
  std::string data_file;
  int trials = 10;
  int jobs = 1;

  // Which of the optional flags were given.
  std::map<std::string, CLI::Option*> given;

  bool has(const std::string& name) const {
    const auto it = given.find(name);
    return it != given.end() && it->second->count() > 0;
  }
};

void add_config_flags(CLI::App& app, Flags& f, bool with_mode) {
  auto keep = [&](const char* key, CLI::Option* o) { f.given[key] = o; };
  app.add_option("--config", f.config_file, "key = value configuration file");
  app.add_option("--set", f.sets, "Override a configuration key (section.key=value)");
  keep("problem", app.add_option("--problem", f.problem, "heat | wave | beam | navier_stokes_2d"));
  keep("m1", app.add_option("--m1", f.m1, "Adam iterations (pre-training)"));
  keep("m2", app.add_option("--m2", f.m2, "L-BFGS iterations (fine-tuning)"));
  keep("nd", app.add_option("--nd", f.nd, "Data points N_d"));
  keep("nr", app.add_option("--nr", f.nr, "Residual points N_r"));
  keep("ni", app.add_option("--ni", f.ni, "Initial-condition points N_i"));
  keep("nb", app.add_option("--nb", f.nb, "Boundary-condition points N_b"));
  keep("snr", app.add_option("--snr-db", f.snr_db, "Noise level of the observations in dB"));
  keep("seed", app.add_option("--seed", f.seed, "Seed for initialization, sampling and noise"));
  app.add_flag("--desk", f.desk, "Desk-scale budgets (M1 = 5000, M2 = 2000)");
  if (with_mode) keep("mode", app.add_option("--mode", f.mode, "dg_pinn | pinn_baseline"));
  keep("data_file",
       app.add_option("--data-file", f.data_file, "Navier-Stokes samples as `x y t u v p` rows"));
}

TrainConfig build_config(const Flags& f) {
  TrainConfig c;
  if (!f.config_file.empty()) c = load_config_file(f.config_file, c);
  if (f.has("problem")) c.problem = parse_problem(f.problem);
  if (f.desk) apply_desk_preset(c);
  if (f.has("m1")) c.m1 = f.m1;
  if (f.has("m2")) c.m2 = f.m2;
  if (f.has("nd")) c.counts.data = f.nd;
  if (f.has("nr")) c.counts.residual = f.nr;
  if (f.has("ni")) c.counts.initial = f.ni;
  if (f.has("nb")) c.counts.boundary = f.nb;
  if (f.has("snr")) c.snr_db = f.snr_db;
  if (f.has("seed")) c.init_seed = c.sampling_seed = c.noise_seed = f.seed;
  if (f.has("mode")) c.mode = parse_mode(f.mode);
  if (f.has("data_file")) c.data_file = f.data_file;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    set_config_value(c, s.substr(0, eq), s.substr(eq + 1));
  }
  c.validate();
  return c;
}

fs::path output_dir(const Flags& f, const std::string& fallback) {
  return f.out.empty() ? fs::path("runs") / fallback : fs::path(f.out);
}

std::string format_metrics(const TestMetrics& m) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(4);
  for (std::size_t c = 0; c < m.channels.size(); ++c) {
    os << "  R_t(" << m.channels[c] << ") = " << m.rt[c];
    if (c < m.rt_observed.size()) os << "   [vs observations " << m.rt_observed[c] << "]";
    os << "\n";
  }
  for (std::size_t k = 0; k < m.unknowns.size(); ++k) {
    os << "  " << m.unknowns[k] << " = " << std::setprecision(8) << m.estimates[k]
       << std::setprecision(4) << "   APE = " << std::fixed << m.ape[k] << "%\n"
       << std::scientific;
  }
  return os.str();
}

void print_run(std::ostream& out, const RunReport& r, const fs::path& dir) {
  out << r.problem << " " << to_string(r.config.mode) << ": "
      << (r.converged ? "converged" : "NOT converged") << " (" << r.stop_reason << ")"
      << std::fixed << std::setprecision(1) << ", " << r.phase_seconds.at("total") << " s\n";
  if (!r.failure.empty()) out << "  failure: " << r.failure << "\n";
  out << format_metrics(r.metrics);
  out << "  artifacts: " << dir.string() << "\n";
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cmd_train(const Flags& f, const std::string& rerun, std::ostream& out, std::ostream& err) {
  if (!rerun.empty()) {
    const fs::path src(rerun);
    const TrainConfig config = load_config_file(src / kConfigFile, TrainConfig{});
    config.validate();
    const TrainResult result = train(config);
    const fs::path dir = f.out.empty() ? src / "rerun" : fs::path(f.out);
    write_run_directory(dir, result);
    const std::string before = strip_timing(read_file(src / kReportFile));
    const std::string after = strip_timing(read_file(dir / kReportFile));
    if (before != after) {
      err << "rerun report differs from " << (src / kReportFile).string() << "\n";
      return kExitNumerical;
    }
    out << "rerun reproduced " << (src / kReportFile).string() << " (timing excluded)\n";
    return kExitOk;
  }
  const TrainConfig config = build_config(f);
  const TrainResult result = train(config);
  const fs::path dir = output_dir(f, to_string(config.problem) + "_" + to_string(config.mode) +
                                         "_seed" + std::to_string(config.init_seed));
  write_run_directory(dir, result);
  print_run(out, result.report, dir);
  return result.report.converged ? kExitOk : kExitNumerical;
}

int cmd_compare(const Flags& f, std::ostream& out) {
  const TrainConfig base = build_config(f);
  const fs::path dir = output_dir(f, "compare_" + to_string(base.problem));
  fs::create_directories(dir);
  const Comparison c = run_comparison(
      base, f.trials, f.jobs, [&](TrainMode mode, std::size_t trial, const TrainResult& r) {
        write_run_directory(dir / to_string(mode) / ("seed" + std::to_string(trial)), r);
      });
  std::ofstream(dir / "summary.json") << comparison_json(c);
  out << std::scientific << std::setprecision(4);
  for (const auto& m : c.methods) {
    out << to_string(m.mode) << ":";
    for (std::size_t k = 0; k < m.rt.size(); ++k) out << " R_t(" << c.channels[k] << ")=" << m.rt[k];
    for (std::size_t k = 0; k < m.ape.size(); ++k) {
      out << " APE(" << c.unknowns[k] << ")=" << std::fixed << m.ape[k] << "%" << std::scientific;
    }
    out << std::fixed << std::setprecision(1) << " wall=" << m.wallclock_s << "s" << " excluded="
        << m.excluded << "/" << m.trials.size() << std::scientific << std::setprecision(4) << "\n";
  }
  out << "summary: " << (dir / "summary.json").string() << "\n";
  return kExitOk;
}

int cmd_sweep(SweepAxis axis, const Flags& f, std::vector<double> values, std::ostream& out) {
  TrainConfig base = build_config(f);
  std::sort(values.begin(), values.end());
  const fs::path dir = output_dir(f, "sweep_" + to_string(axis) + "_" + to_string(base.problem));
  fs::create_directories(dir);
  const SweepResult r = run_sweep(axis, values, base, f.jobs, [&](std::size_t i, const TrainResult& run) {
    std::ostringstream name;
    name << to_string(axis) << "_" << values[i];
    write_run_directory(dir / name.str(), run);
  });
  const std::string csv = sweep_csv(r);
  std::ofstream(dir / "sweep.csv") << csv;
  nlohmann::ordered_json summary;
  summary["axis"] = to_string(axis);
  summary["problem"] = to_string(base.problem);
  summary["values"] = values;
  summary["table"] = "sweep.csv";
  summary["all_converged"] =
      std::all_of(r.points.begin(), r.points.end(), [](const SweepPoint& p) { return p.converged; });
  std::ofstream(dir / "summary.json") << summary.dump(2) << "\n";
  out << csv;
  return kExitOk;
}

void write_points(const fs::path& path, const ProblemSpec& problem, const PointSet& set,
                  const std::vector<std::string>& target_names) {
  std::ofstream o(path);
  if (!o) throw ConfigError("cannot write " + path.string());
  o << "#";
  for (const auto& n : problem.input_names) o << " " << n;
  for (const auto& n : target_names) o << " " << n;
  o << "\n" << std::setprecision(17);
  for (Index k = 0; k < set.size(); ++k) {
    for (Index d = 0; d < set.points.rows(); ++d) o << (d ? " " : "") << set.points(d, k);
    for (Index r = 0; r < set.targets.rows(); ++r) o << " " << set.targets(r, k);
    o << "\n";
  }
}

int cmd_gen_data(const Flags& f, std::ostream& out) {
  const TrainConfig c = build_config(f);
  const ProblemSpec problem = problem_for(c);
  const DatasetBundle b = prepare_dataset(c, problem);
  const fs::path dir = output_dir(f, "data_" + to_string(c.problem));
  fs::create_directories(dir);
  std::vector<std::string> observed(problem.output_names.begin(),
                                    problem.output_names.begin() + problem.observed_outputs);
  std::vector<std::string> ic, bc;
  for (const auto& op : problem.initial_conditions) ic.push_back(op.term_id);
  for (const auto& op : problem.boundary_conditions) bc.push_back(op.term_id);
  write_points(dir / "residual.txt", problem, b.residual, problem.residual_terms);
  if (!ic.empty()) write_points(dir / "initial.txt", problem, b.initial, ic);
  if (!bc.empty()) write_points(dir / "boundary.txt", problem, b.boundary, bc);
  write_points(dir / "data.txt", problem, b.data, observed);
  write_points(dir / "test.txt", problem, b.test, observed);

  nlohmann::ordered_json m;
  m["problem"] = problem.name();
  m["counts"] = {{"n_r", b.residual.size()},
                 {"n_i", b.initial.size()},
                 {"n_b", b.boundary.size()},
                 {"n_d", b.data.size()},
                 {"n_t", b.test.size()}};
  m["sampling_seed"] = c.sampling_seed;
  m["noise_seed"] = c.noise_seed;
  if (std::isfinite(c.snr_db)) {
    m["snr_db"] = c.snr_db;
  } else {
    m["snr_db"] = nullptr;
  }
  m["data_file"] = c.data_file;
  std::ofstream(dir / "manifest.json") << m.dump(2) << "\n";
  out << "wrote " << problem.name() << " dataset to " << dir.string() << " (N_t = " << b.test.size()
      << ")\n";
  return kExitOk;
}

int cmd_eval(const Flags& f, const std::string& run_dir, const std::string& checkpoint,
             std::ostream& out, std::ostream& err) {
  TrainConfig config;
  fs::path ck;
  if (!run_dir.empty()) {
    config = load_config_file(fs::path(run_dir) / kConfigFile, config);
    ck = fs::path(run_dir) / kCheckpointFile;
  } else if (!checkpoint.empty()) {
    config = build_config(f);
    ck = checkpoint;
  } else {
    throw ConfigError("eval needs --run DIR or --checkpoint FILE");
  }
  if (f.has("problem")) config.problem = parse_problem(f.problem);
  config.validate();
  const TestMetrics m = evaluate_checkpoint(ck, config);
  out << format_metrics(m);
  if (run_dir.empty()) return kExitOk;

  const fs::path report_path = fs::path(run_dir) / kReportFile;
  if (!fs::exists(report_path)) return kExitOk;
  const auto report = nlohmann::json::parse(read_file(report_path));
  double worst = 0.0;
  auto compare = [&](double reported, double recomputed) {
    worst = std::max(worst, std::abs(reported - recomputed) / std::max(1e-300, std::abs(reported)));
  };
  for (std::size_t c = 0; c < m.rt.size(); ++c) {
    compare(report.at("test_error").at(c).at("rt").get<double>(), m.rt[c]);
  }
  for (std::size_t k = 0; k < m.ape.size(); ++k) {
    compare(report.at("unknowns").at(k).at("ape_percent").get<double>(), m.ape[k]);
  }
  out << "max relative difference to " << report_path.string() << ": " << std::scientific
      << worst << "\n";
  if (worst > 1e-12) {
    err << "recomputed metrics do not match the report\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"DG-PINN and PINN training for PDE inverse problems", "dgpinn"};
  app.require_subcommand(1);

  Flags train_flags, compare_flags, m1_flags, nd_flags, noise_flags, gen_flags, eval_flags;
  std::string rerun, run_dir, checkpoint;
  std::vector<double> m1_values{2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000,
                                10000, 15000, 20000, 25000, 30000, 40000, 50000};
  std::vector<double> nd_values{500, 600, 700, 800, 900, 1000, 2000, 3000,
                                4000, 5000, 6000, 7000, 8000, 9000, 10000};
  std::vector<double> snr_values{25, 30, 35, 40};

  auto* train_cmd = app.add_subcommand("train", "Train one model");
  add_config_flags(*train_cmd, train_flags, true);
  train_cmd->add_option("--out", train_flags.out, "Output directory");
  train_cmd->add_option("--rerun", rerun, "Replay the run in DIR and diff the reports");

  auto* compare_cmd = app.add_subcommand("compare", "DG-PINN versus the baseline PINN");
  add_config_flags(*compare_cmd, compare_flags, false);
  compare_cmd->add_option("--out", compare_flags.out, "Output directory");
  compare_cmd->add_option("--trials", compare_flags.trials, "Trials per method (seeds 0..n-1)");
  compare_cmd->add_option("--jobs", compare_flags.jobs, "Runs in parallel");

  struct SweepCmd {
    const char* name;
    const char* help;
    SweepAxis axis;
    Flags* flags;
    std::vector<double>* values;
    CLI::App* cmd = nullptr;
  };
  std::vector<SweepCmd> sweeps{
      {"sweep-m1", "Sensitivity to the pre-training budget M1", SweepAxis::m1, &m1_flags, &m1_values},
      {"sweep-nd", "Sensitivity to the number of data points", SweepAxis::n_d, &nd_flags, &nd_values},
      {"noise-study", "Robustness to observation noise", SweepAxis::snr_db, &noise_flags,
       &snr_values}};
  for (auto& s : sweeps) {
    s.cmd = app.add_subcommand(s.name, s.help);
    add_config_flags(*s.cmd, *s.flags, false);
    s.cmd->add_option("--out", s.flags->out, "Output directory");
    s.cmd->add_option("--jobs", s.flags->jobs, "Runs in parallel");
    s.cmd->add_option("--values", *s.values, "Axis values")->delimiter(',');
  }

  auto* gen_cmd = app.add_subcommand("gen-data", "Write the sampled training and test sets");
  add_config_flags(*gen_cmd, gen_flags, false);
  gen_cmd->add_option("--out", gen_flags.out, "Output directory");

  auto* eval_cmd = app.add_subcommand("eval", "Recompute metrics from a checkpoint");
  add_config_flags(*eval_cmd, eval_flags, false);
  eval_cmd->add_option("--run", run_dir, "Run directory (config.ini + checkpoint.dgpn)");
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train_cmd) return cmd_train(train_flags, rerun, out, err);
    if (*compare_cmd) return cmd_compare(compare_flags, out);
    for (auto& s : sweeps) {
      if (*s.cmd) return cmd_sweep(s.axis, *s.flags, *s.values, out);
    }
    if (*gen_cmd) return cmd_gen_data(gen_flags, out);
    if (*eval_cmd) return cmd_eval(eval_flags, run_dir, checkpoint, out, err);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContractError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const EvaluationError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace dgpinn::cli
