#include "dgpinn/run_config.hpp"

#include "dgpinn/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace dgpinn {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
}

template <class T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  if (value == "inf" || value == "+inf" || value == "none") return kNoNoise;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || std::isnan(out)) {
    bad_value(key, value);
  }
  return out;
}

std::string format_double(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<int> parse_int_list(std::string_view key, std::string_view value) {
  std::vector<int> out;
  if (trim(value).empty()) return out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto item = trim(value.substr(start, comma == std::string_view::npos ? value.npos
                                                                                : comma - start));
    out.push_back(parse_integer<int>(key, item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, std::string_view key, std::string_view)> set;
};

template <class T>
Field integer_field(const char* key, T TrainConfig::*member) {
  return {key, [member](const TrainConfig& c) { return std::to_string(c.*member); },
          [member](TrainConfig& c, std::string_view k, std::string_view v) {
            c.*member = parse_integer<T>(k, v);
          }};
}

Field double_field(const char* key, double TrainConfig::*member) {
  return {key, [member](const TrainConfig& c) { return format_double(c.*member); },
          [member](TrainConfig& c, std::string_view k, std::string_view v) {
            c.*member = parse_double(k, v);
          }};
}

Field count_field(const char* key, Index SampleCounts::*member) {
  return {key, [member](const TrainConfig& c) { return std::to_string(c.counts.*member); },
          [member](TrainConfig& c, std::string_view k, std::string_view v) {
            c.counts.*member = parse_integer<Index>(k, v);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"problem.name", [](const TrainConfig& c) { return to_string(c.problem); },
       [](TrainConfig& c, std::string_view, std::string_view v) { c.problem = parse_problem(v); }},
      {"problem.data_file", [](const TrainConfig& c) { return c.data_file; },
       [](TrainConfig& c, std::string_view, std::string_view v) { c.data_file = std::string(v); }},
      integer_field("network.hidden_layers", &TrainConfig::hidden_layers),
      integer_field("network.hidden_width", &TrainConfig::hidden_width),
      integer_field("seeds.init", &TrainConfig::init_seed),
      integer_field("seeds.sampling", &TrainConfig::sampling_seed),
      integer_field("seeds.noise", &TrainConfig::noise_seed),
      count_field("sampling.n_r", &SampleCounts::residual),
      count_field("sampling.n_i", &SampleCounts::initial),
      count_field("sampling.n_b", &SampleCounts::boundary),
      count_field("sampling.n_d", &SampleCounts::data),
      {"sampling.grid", [](const TrainConfig& c) { return format_int_list(c.grid); },
       [](TrainConfig& c, std::string_view k, std::string_view v) {
         c.grid = parse_int_list(k, v);
       }},
      double_field("sampling.snr_db", &TrainConfig::snr_db),
      {"training.mode", [](const TrainConfig& c) { return to_string(c.mode); },
       [](TrainConfig& c, std::string_view, std::string_view v) { c.mode = parse_mode(v); }},
      integer_field("training.m1", &TrainConfig::m1),
      integer_field("training.m2", &TrainConfig::m2),
      double_field("training.adam_lr", &TrainConfig::adam_lr),
      double_field("training.lbfgs_step_scale", &TrainConfig::lbfgs_step_scale),
      integer_field("training.lbfgs_history", &TrainConfig::lbfgs_history),
      integer_field("training.weight_cadence", &TrainConfig::weight_cadence),
      integer_field("training.trace_every", &TrainConfig::trace_every),
  };
  return table;
}

}  // namespace

std::string to_string(TrainMode mode) {
  return mode == TrainMode::dg_pinn ? "dg_pinn" : "pinn_baseline";
}

TrainMode parse_mode(std::string_view text) {
  if (text == "dg_pinn" || text == "dg-pinn") return TrainMode::dg_pinn;
  if (text == "pinn_baseline" || text == "pinn" || text == "baseline") {
    return TrainMode::pinn_baseline;
  }
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected dg_pinn or pinn_baseline)");
}

void TrainConfig::validate() const {
  if (m1 < 1) throw ConfigError("training.m1 must be at least 1");
  if (m2 < 1) throw ConfigError("training.m2 must be at least 1");
  if (hidden_layers < 1 || hidden_width < 1) throw ConfigError("network sizes must be positive");
  const ProblemSpec p = make_problem(problem, !data_file.empty());
  if (counts.residual < 1 || counts.data < 1 ||
      (!p.initial_conditions.empty() && counts.initial < 1) ||
      (!p.boundary_conditions.empty() && counts.boundary < 1)) {
    throw ConfigError("sample counts must be positive");
  }
  if (!(adam_lr > 0.0) || !std::isfinite(adam_lr)) throw ConfigError("training.adam_lr must be positive");
  if (!(lbfgs_step_scale > 0.0) || !std::isfinite(lbfgs_step_scale)) {
    throw ConfigError("training.lbfgs_step_scale must be positive");
  }
  if (lbfgs_history < 1) throw ConfigError("training.lbfgs_history must be positive");
  if (weight_cadence < 1) throw ConfigError("training.weight_cadence must be positive");
  if (trace_every < 1) throw ConfigError("training.trace_every must be positive");
  if (std::isinf(snr_db) && snr_db < 0) throw ConfigError("sampling.snr_db must not be -inf");
  if (!data_file.empty() && problem != ProblemId::navier_stokes) {
    throw ConfigError("problem.data_file is only supported for navier_stokes_2d");
  }
  if (!grid.empty()) {
    const int dims = problem == ProblemId::navier_stokes ? 3 : 2;
    if (static_cast<int>(grid.size()) != dims) {
      throw ConfigError("sampling.grid needs " + std::to_string(dims) + " entries");
    }
    for (int g : grid) {
      if (g < 2) throw ConfigError("sampling.grid entries must be at least 2");
    }
  }
}

std::vector<int> TrainConfig::layer_widths() const {
  const ProblemSpec p = make_problem(problem, !data_file.empty());
  return dgpinn::layer_widths(p.input_dim(), hidden_layers, hidden_width, p.output_dim());
}

TrainConfig default_config(ProblemId problem) {
  TrainConfig c;
  c.problem = problem;
  return c;
}

void apply_desk_preset(TrainConfig& config) {
  config.m1 = 5000;
  config.m2 = 2000;
  if (config.problem == ProblemId::beam) config.counts.residual = 1000;
}

void set_config_value(TrainConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.emplace_back(f.key);
  return out;
}

TrainConfig parse_config_text(std::string_view text, TrainConfig base) {
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
    start = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = section.empty() ? std::string(trim(line.substr(0, eq)))
                                            : section + "." + std::string(trim(line.substr(0, eq)));
    try {
      set_config_value(base, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

TrainConfig load_config_file(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), std::move(base));
}

std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

std::string to_config_text(const TrainConfig& config) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    const std::string_view key = f.key;
    const auto dot = key.find('.');
    const std::string s(key.substr(0, dot));
    if (s != section) {
      if (!section.empty()) out += "\n";
      out += "[" + s + "]\n";
      section = s;
    }
    out += std::string(key.substr(dot + 1)) + " = " + f.get(config) + "\n";
  }
  return out;
}

}  // namespace dgpinn
