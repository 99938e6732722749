#include "dgpinn/reporting.hpp"

#include "dgpinn/checkpoint.hpp"
#include "dgpinn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace dgpinn {

namespace {

using nlohmann::ordered_json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_number(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

// JSON has no NaN or infinity; they are written as strings.
ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

ordered_json trace_report_json(const TraceReport& t) {
  ordered_json terms = ordered_json::array();
  for (const auto& e : t.entries) {
    terms.push_back({{"term_id", e.term_id},
                     {"trace", number(e.trace)},
                     {"count", e.count},
                     {"weight", number(e.weight)},
                     {"clamped", e.clamped}});
  }
  return {{"iteration", t.iteration}, {"phase", t.phase}, {"R", number(t.R)}, {"terms", terms}};
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string report_json(const RunReport& r) {
  ordered_json j;
  j["problem"] = r.problem;
  j["method"] = to_string(r.config.mode);
  j["converged"] = r.converged;
  j["stop_reason"] = r.stop_reason;
  j["failure"] = r.failure;

  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : config_entries(r.config)) config[k] = v;
  j["config"] = config;

  ordered_json unknowns = ordered_json::array();
  const ProblemSpec problem = problem_for(r.config);
  for (std::size_t k = 0; k < r.metrics.unknowns.size(); ++k) {
    unknowns.push_back({{"name", r.metrics.unknowns[k]},
                        {"estimate", number(r.metrics.estimates[k])},
                        {"truth", reference_coefficients(problem)(static_cast<Index>(k))},
                        {"ape_percent", number(r.metrics.ape[k])}});
  }
  j["unknowns"] = unknowns;

  ordered_json test = ordered_json::array();
  for (std::size_t c = 0; c < r.metrics.channels.size(); ++c) {
    ordered_json row = {{"channel", r.metrics.channels[c]}, {"rt", number(r.metrics.rt[c])}};
    if (c < r.metrics.rt_observed.size()) row["rt_observed"] = number(r.metrics.rt_observed[c]);
    test.push_back(row);
  }
  j["test_error"] = test;

  ordered_json terms = ordered_json::object();
  for (const auto& [id, v] : r.final_loss.terms) terms[id] = number(v);
  j["final_loss"] = {{"terms", terms}, {"total", number(r.final_loss.total)}};
  ordered_json weights = ordered_json::object();
  for (const auto& [id, w] : r.weights) weights[id] = number(w);
  j["weights"] = weights;
  j["initial_data_loss"] = number(r.initial_data_loss);
  j["pretrain_data_loss"] = number(r.pretrain_data_loss);

  ordered_json reports = ordered_json::array();
  for (const auto& t : r.trace_reports) reports.push_back(trace_report_json(t));
  j["trace_reports"] = reports;

  j["iterations"] = {{"adam", r.adam_iterations},
                     {"lbfgs", r.lbfgs_iterations},
                     {"lbfgs_evaluations", r.lbfgs_evaluations},
                     {"lbfgs_fallbacks", r.lbfgs_fallbacks}};
  ordered_json timing = ordered_json::object();
  for (const auto& [phase, s] : r.phase_seconds) timing[phase + "_s"] = s;
  j["timing"] = timing;
  return j.dump(2) + "\n";
}

std::string strip_timing(std::string_view text) {
  ordered_json j = ordered_json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("report is not a JSON object");
  j.erase("timing");
  return j.dump(2) + "\n";
}

void write_loss_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "iter,phase,term_id,value,weighted_total,wallclock_s\n";
  for (const auto& r : rows) {
    out << r.iter << ',' << r.phase << ',' << r.term_id << ',' << fmt(r.value) << ','
        << fmt(r.weighted_total) << ',' << fmt(r.wallclock_s) << '\n';
  }
}

void write_run_directory(const std::filesystem::path& dir, const TrainResult& result) {
  std::filesystem::create_directories(dir);
  write_text(dir / kReportFile, report_json(result.report));
  write_text(dir / kConfigFile, to_config_text(result.report.config));
  std::ostringstream trace;
  write_loss_trace_csv(trace, result.report.loss_trace);
  write_text(dir / kTraceFile, trace.str());
  save_checkpoint(dir / kCheckpointFile, {result.report.problem, result.state});
}

TestMetrics evaluate_checkpoint(const std::filesystem::path& checkpoint, const TrainConfig& config) {
  const Checkpoint c = load_checkpoint(checkpoint);
  const ProblemSpec problem = problem_for(config);
  if (c.problem != problem.name()) {
    throw ConfigError("checkpoint was trained on '" + c.problem + "', not '" + problem.name() + "'");
  }
  if (c.state.network.widths() != config.layer_widths()) {
    throw ConfigError("checkpoint layer widths do not match the configuration");
  }
  if (c.state.unknowns.names != problem.unknown_names) {
    throw ConfigError("checkpoint unknowns do not match the problem");
  }
  return evaluate_metrics(c.state, problem, prepare_dataset(config, problem));
}

TestMetrics evaluate_run_directory(const std::filesystem::path& dir) {
  const TrainConfig config = load_config_file(dir / kConfigFile, TrainConfig{});
  return evaluate_checkpoint(dir / kCheckpointFile, config);
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, jobs));
  if (threads == 1 || count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::m1: return "m1";
    case SweepAxis::n_d: return "n_d";
    case SweepAxis::snr_db: return "snr_db";
  }
  return "?";
}

SweepAxis parse_axis(std::string_view text) {
  if (text == "m1") return SweepAxis::m1;
  if (text == "n_d" || text == "nd") return SweepAxis::n_d;
  if (text == "snr_db" || text == "snr") return SweepAxis::snr_db;
  throw ConfigError("unknown sweep axis '" + std::string(text) + "'");
}

TrainConfig sweep_config(const TrainConfig& base, SweepAxis axis, double value) {
  TrainConfig c = base;
  c.mode = TrainMode::dg_pinn;
  switch (axis) {
    case SweepAxis::m1:
      if (value != std::floor(value)) throw ConfigError("M1 values must be integers");
      c.m1 = static_cast<long>(value);
      break;
    case SweepAxis::n_d:
      if (value != std::floor(value)) throw ConfigError("N_d values must be integers");
      c.counts.data = static_cast<Index>(value);
      break;
    case SweepAxis::snr_db:
      c.snr_db = value;
      break;
  }
  c.validate();
  return c;
}

SweepResult run_sweep(SweepAxis axis, const std::vector<double>& values, const TrainConfig& base,
                      int jobs, const RunSink& sink) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) throw ConfigError("sweep values must be strictly increasing");
  }
  std::vector<TrainConfig> configs;
  for (double v : values) configs.push_back(sweep_config(base, axis, v));

  const ProblemSpec problem = problem_for(base);
  SweepResult result;
  result.axis = axis;
  result.channels = problem.output_names;
  result.observed_channels.assign(problem.output_names.begin(),
                                  problem.output_names.begin() + problem.observed_outputs);
  result.unknowns = problem.unknown_names;
  result.points.resize(values.size());
  std::mutex sink_mutex;
  parallel_for(values.size(), jobs, [&](std::size_t i) {
    SweepPoint& p = result.points[i];
    p.value = values[i];
    const TrainResult run = train(configs[i]);
    p.converged = run.report.converged;
    p.wallclock_s = run.report.phase_seconds.at("total");
    p.rt = run.report.metrics.rt;
    p.rt_observed = run.report.metrics.rt_observed;
    p.estimates = run.report.metrics.estimates;
    p.ape = run.report.metrics.ape;
    if (sink) {
      std::lock_guard lock(sink_mutex);
      sink(i, run);
    }
  });
  return result;
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream out;
  out << "axis,value,converged,wallclock_s";
  for (const auto& c : r.channels) out << ",rt_" << c;
  for (const auto& c : r.observed_channels) out << ",rt_observed_" << c;
  for (const auto& u : r.unknowns) out << ",estimate_" << u;
  for (const auto& u : r.unknowns) out << ",ape_" << u;
  out << '\n';
  for (const auto& p : r.points) {
    out << to_string(r.axis) << ',' << fmt(p.value) << ',' << (p.converged ? 1 : 0) << ','
        << fmt(p.wallclock_s);
    for (double v : p.rt) out << ',' << fmt(v);
    for (double v : p.rt_observed) out << ',' << fmt(v);
    for (double v : p.estimates) out << ',' << fmt(v);
    for (double v : p.ape) out << ',' << fmt(v);
    out << '\n';
  }
  return out.str();
}

SweepResult parse_sweep_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw ConfigError("empty sweep table");
  SweepResult r;
  const auto header = split(lines.front(), ',');
  if (header.size() < 4 || header[0] != "axis" || header[1] != "value") {
    throw ConfigError("not a sweep table header");
  }
  auto strip = [](std::string_view s, std::string_view prefix) {
    return std::string(s.substr(prefix.size()));
  };
  for (std::size_t k = 4; k < header.size(); ++k) {
    const auto h = header[k];
    if (h.starts_with("rt_observed_")) {
      r.observed_channels.push_back(strip(h, "rt_observed_"));
    } else if (h.starts_with("rt_")) {
      r.channels.push_back(strip(h, "rt_"));
    } else if (h.starts_with("estimate_")) {
      r.unknowns.push_back(strip(h, "estimate_"));
    } else if (!h.starts_with("ape_")) {
      throw ConfigError("unexpected sweep column '" + std::string(h) + "'");
    }
  }
  const std::size_t width =
      4 + r.channels.size() + r.observed_channels.size() + 2 * r.unknowns.size();
  if (header.size() != width) throw ConfigError("sweep header is inconsistent");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != width) throw ConfigError("sweep row " + std::to_string(i) + " has wrong width");
    r.axis = parse_axis(cells[0]);
    SweepPoint p;
    p.value = parse_number(cells[1]);
    p.converged = cells[2] == "1";
    p.wallclock_s = parse_number(cells[3]);
    std::size_t k = 4;
    auto take = [&](std::vector<double>& dst, std::size_t n) {
      for (std::size_t q = 0; q < n; ++q) dst.push_back(parse_number(cells[k++]));
    };
    take(p.rt, r.channels.size());
    take(p.rt_observed, r.observed_channels.size());
    take(p.estimates, r.unknowns.size());
    take(p.ape, r.unknowns.size());
    r.points.push_back(std::move(p));
  }
  return r;
}

std::vector<bool> outlier_mask(const std::vector<double>& losses, double factor) {
  std::vector<double> finite;
  for (double v : losses) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  std::vector<bool> mask(losses.size(), true);
  if (finite.empty()) return mask;
  std::sort(finite.begin(), finite.end());
  const std::size_t n = finite.size();
  const double median = n % 2 ? finite[n / 2] : 0.5 * (finite[n / 2 - 1] + finite[n / 2]);
  for (std::size_t i = 0; i < losses.size(); ++i) {
    mask[i] = !std::isfinite(losses[i]) || losses[i] > factor * median;
  }
  return mask;
}

MethodSummary summarize(TrainMode mode, const std::vector<TrainResult>& runs) {
  MethodSummary s;
  s.mode = mode;
  std::vector<double> losses;
  for (const auto& run : runs) {
    TrialSummary t;
    t.seed = run.report.config.init_seed;
    t.converged = run.report.converged;
    t.final_loss = run.report.final_loss.total;
    t.wallclock_s = run.report.phase_seconds.at("total");
    t.rt = run.report.metrics.rt;
    t.ape = run.report.metrics.ape;
    losses.push_back(run.report.failure.empty() ? t.final_loss
                                                : std::numeric_limits<double>::quiet_NaN());
    s.trials.push_back(std::move(t));
  }
  const auto mask = outlier_mask(losses);
  std::vector<std::vector<double>> rt, ap;
  std::vector<double> wall;
  for (std::size_t i = 0; i < s.trials.size(); ++i) {
    TrialSummary& t = s.trials[i];
    t.outlier = mask[i];
    if (t.outlier) {
      ++s.excluded;
      continue;
    }
    rt.resize(t.rt.size());
    ap.resize(t.ape.size());
    for (std::size_t c = 0; c < t.rt.size(); ++c) rt[c].push_back(t.rt[c]);
    for (std::size_t c = 0; c < t.ape.size(); ++c) ap[c].push_back(t.ape[c]);
    wall.push_back(t.wallclock_s);
  }
  for (const auto& v : rt) s.rt.push_back(mean_of(v));
  for (const auto& v : ap) s.ape.push_back(mean_of(v));
  s.wallclock_s = mean_of(wall);
  return s;
}

Comparison run_comparison(const TrainConfig& base, int trials,
                          int jobs,
                          const std::function<void(TrainMode, std::size_t, const TrainResult&)>& sink) {
  if (trials < 1) throw ConfigError("--trials must be at least 1");
  const ProblemSpec problem = problem_for(base);
  const std::array<TrainMode, 2> modes{TrainMode::dg_pinn, TrainMode::pinn_baseline};
  std::vector<TrainConfig> configs;
  for (TrainMode m : modes) {
    for (int t = 0; t < trials; ++t) {
      TrainConfig c = base;
      c.mode = m;
      c.init_seed = c.sampling_seed = c.noise_seed = static_cast<std::uint64_t>(t);
      c.validate();
      configs.push_back(c);
    }
  }
  std::vector<TrainResult> results(configs.size());
  std::mutex sink_mutex;
  parallel_for(configs.size(), jobs, [&](std::size_t i) {
    results[i] = train(configs[i]);
    if (sink) {
      std::lock_guard lock(sink_mutex);
      sink(configs[i].mode, i % static_cast<std::size_t>(trials), results[i]);
    }
  });
  Comparison out;
  out.problem = problem.name();
  out.channels = problem.output_names;
  out.unknowns = problem.unknown_names;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    std::vector<TrainResult> runs(std::make_move_iterator(results.begin() + m * trials),
                                  std::make_move_iterator(results.begin() + (m + 1) * trials));
    out.methods.push_back(summarize(modes[m], runs));
  }
  return out;
}

std::string comparison_json(const Comparison& c) {
  ordered_json j;
  j["problem"] = c.problem;
  ordered_json rows = ordered_json::array();
  for (const auto& m : c.methods) {
    ordered_json row;
    row["method"] = to_string(m.mode);
    for (std::size_t k = 0; k < c.channels.size() && k < m.rt.size(); ++k) {
      row["rt_" + c.channels[k]] = number(m.rt[k]);
    }
    for (std::size_t k = 0; k < c.unknowns.size() && k < m.ape.size(); ++k) {
      row["ape_" + c.unknowns[k]] = number(m.ape[k]);
    }
    row["wallclock_s"] = number(m.wallclock_s);
    row["trials"] = m.trials.size();
    row["excluded"] = m.excluded;
    ordered_json trials = ordered_json::array();
    for (const auto& t : m.trials) {
      ordered_json tj = {{"seed", t.seed},
                         {"converged", t.converged},
                         {"outlier", t.outlier},
                         {"final_loss", number(t.final_loss)},
                         {"wallclock_s", number(t.wallclock_s)}};
      for (std::size_t k = 0; k < c.channels.size() && k < t.rt.size(); ++k) {
        tj["rt_" + c.channels[k]] = number(t.rt[k]);
      }
      for (std::size_t k = 0; k < c.unknowns.size() && k < t.ape.size(); ++k) {
        tj["ape_" + c.unknowns[k]] = number(t.ape[k]);
      }
      trials.push_back(tj);
    }
    row["per_trial"] = trials;
    rows.push_back(row);
  }
  j["methods"] = rows;
  return j.dump(2) + "\n";
}

}  // namespace dgpinn
