#include "ratekin/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ratekin/control.hpp"
#include "ratekin/harness.hpp"
#include "ratekin/meanfield.hpp"
#include "ratekin/particle.hpp"

namespace ratekin::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

/// Invalid flag, config value or config file contents (exit 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output (exit 3).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string normalise_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

// Every key a config may carry, across all subcommands.
const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "lambda",      "beta2",     "n",         "horizon",   "seed",         "kappa_c",
      "scale_source", "policy",   "gain",      "eta",       "sigma",        "r0",
      "discount",    "replicates", "n_grid",   "beta2_grid", "lambda_grid", "eta_list",
      "r_step",      "fit_min_n", "threads",   "init"};
  return keys;
}

// ---- typed access -----------------------------------------------------------

class Resolved {
 public:
  explicit Resolved(Config values) : values_(std::move(values)) {}

  const Config& values() const { return values_; }

  const std::string& text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(flag_name(key) + ": missing value");
    return it->second;
  }

  double real(const std::string& key, const std::function<bool(double)>& ok,
              const char* requirement) const {
    const double v = parse_real(key, text(key));
    if (!ok(v)) throw ConfigError(flag_name(key) + ": must be " + requirement + ", got " + text(key));
    return v;
  }

  std::uint64_t count(const std::string& key, std::uint64_t min_value = 0) const {
    const std::uint64_t v = parse_count(key, text(key));
    if (v < min_value) {
      throw ConfigError(flag_name(key) + ": must be >= " + std::to_string(min_value) + ", got " +
                        text(key));
    }
    return v;
  }

  std::vector<double> reals(const std::string& key, const std::function<bool(double)>& ok,
                            const char* requirement) const {
    std::vector<double> out;
    for (const auto& item : split(key)) {
      const double v = parse_real(key, item);
      if (!ok(v)) throw ConfigError(flag_name(key) + ": every entry must be " + requirement);
      out.push_back(v);
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const auto& item : split(key)) out.push_back(parse_count(key, item));
    return out;
  }

 private:
  static double parse_real(const std::string& key, const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || trim(s.substr(used)) != "" || !std::isfinite(v)) {
      throw ConfigError(flag_name(key) + ": expected a number, got '" + s + "'");
    }
    return v;
  }

  static std::uint64_t parse_count(const std::string& key, const std::string& s) {
    const std::string t = trim(s);
    if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw ConfigError(flag_name(key) + ": expected a non-negative integer, got '" + s + "'");
    }
    try {
      return std::stoull(t);
    } catch (const std::exception&) {
      throw ConfigError(flag_name(key) + ": integer out of range: " + s);
    }
  }

  std::vector<std::string> split(const std::string& key) const {
    std::vector<std::string> items;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) throw ConfigError(flag_name(key) + ": empty list entry");
      items.push_back(item);
    }
    if (items.empty()) throw ConfigError(flag_name(key) + ": list must not be empty");
    return items;
  }

  Config values_;
};

bool unit_open(double x) { return x > 0.0 && x < 1.0; }

ModelParams model_params(const Resolved& cfg) {
  const double lambda =
      cfg.real("lambda", [](double x) { return x > 0.0 && x <= 1.0; }, "in (0,1]");
  const double beta2 = cfg.real("beta2", [](double x) { return x > 0.0; }, "> 0");
  return ModelParams(lambda, beta2);
}

std::size_t population(const Resolved& cfg, const std::string& key) {
  const std::uint64_t n = cfg.count(key, 4);
  if (n % 2 != 0) throw ConfigError(flag_name(key) + ": population size must be even");
  return n;
}

CostParams cost_params(const Resolved& cfg) {
  CostParams cost;
  cost.kappa_c = cfg.real("kappa_c", [](double x) { return x > 0.0; }, "> 0");
  cost.discount = cfg.real("discount", unit_open, "in (0,1)");
  return cost;
}

unsigned thread_count(const Resolved& cfg) {
  return static_cast<unsigned>(std::min<std::uint64_t>(cfg.count("threads"), 1024));
}

// ---- output -----------------------------------------------------------------

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& header) { body_ << header << '\n'; }

  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((body_ << (first ? "" : ",") << cell(cells), first = false), ...);
    body_ << '\n';
  }

  std::string str() const { return body_.str(); }

 private:
  static std::string cell(double v) { return format_real(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }

  std::ostringstream body_;
};

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw IoError("cannot create output directory '" + dir_.string() + "'");
    }
  }

  void write(const std::string& name, const std::string& contents) {
    write_file(name, contents);
    const fs::path path = dir_ / name;
    outputs_[name] = {{"sha256", sha256_file(path)}, {"bytes", contents.size()}};
  }

  void write_manifest(json manifest) {
    manifest["outputs"] = outputs_;
    write_file("manifest.json", manifest.dump(2) + "\n");
  }

  const fs::path& path() const { return dir_; }

 private:
  void write_file(const std::string& name, const std::string& contents) {
    const fs::path path = dir_ / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << contents;
    f.close();
    if (!f) throw IoError("failed writing '" + path.string() + "'");
  }

  fs::path dir_;
  json outputs_ = json::object();
};

// ---- subcommands ------------------------------------------------------------

struct CommandSpec {
  std::string name;
  std::string description;
  std::vector<std::string> keys;
  bool writes_outputs = true;
};

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> specs{
      {"fixed-point", "Print the stationary accuracy r_inf of the optimal map", {"lambda", "beta2"},
       false},
      {"simulate",
       "Run one N-agent trajectory and write trajectory.csv",
       {"lambda", "beta2", "n", "horizon", "seed", "policy", "gain", "eta", "sigma", "r0", "init",
        "kappa_c", "discount", "scale_source"}},
      {"converge",
       "Finite-N convergence study; writes converge.csv",
       {"lambda", "beta2", "n_grid", "horizon", "replicates", "seed", "gain", "eta", "sigma", "r0",
        "fit_min_n", "threads"}},
      {"red-queen", "Stationary accuracy table; writes red_queen.csv", {"lambda_grid", "beta2_grid"}},
      {"invariance",
       "Fixed versus adaptive scaling across eta; writes invariance.csv",
       {"lambda", "beta2", "n", "horizon", "seed", "gain", "eta_list", "r0", "scale_source",
        "threads"}},
      {"phase", "Optimal matching intensity table; writes phase.csv", {"kappa_c", "r_step"}},
  };
  return specs;
}

Config base_defaults() {
  return {{"lambda", "0.99"},
          {"beta2", "1"},
          {"n", "1000"},
          {"horizon", "100"},
          {"kappa_c", "0.04"},
          {"discount", "0.95"},
          {"scale_source", "mean-field"},
          {"policy", "optimal"},
          {"gain", "0.1"},
          {"eta", "0"},
          {"sigma", "1"},
          {"r0", "0"},
          {"init", "exact"},
          {"replicates", "8"},
          {"n_grid", "100,1000,10000"},
          {"beta2_grid", "0.25,0.5,1,2,4"},
          {"lambda_grid", "0.95,0.99,0.995,1"},
          {"eta_list", "0,0.5,0.9"},
          {"r_step", "0.01"},
          {"fit_min_n", "0"},
          {"threads", "0"}};
}

Config profile_defaults(const std::string& command, const std::string& profile) {
  Config cfg = base_defaults();
  const bool paper = profile == "paper";
  if (command == "converge") {
    cfg["horizon"] = paper ? "500" : "200";
    if (paper) {
      cfg["n_grid"] = "10,100,1000,10000,100000";
      cfg["fit_min_n"] = "1000";
    }
  } else if (command == "invariance") {
    cfg["n"] = paper ? "100000" : "10000";
    cfg["horizon"] = "100";
    cfg["gain"] = "0.9";
    cfg["r0"] = "0.1";
  } else if (command == "simulate") {
    cfg["n"] = paper ? "100000" : "1000";
    cfg["horizon"] = paper ? "500" : "100";
  }
  return cfg;
}

std::uint64_t resolve_seed(const Config& flags, const Config& file) {
  const auto parse = [](const std::string& source, const std::string& text) {
    Config one{{"seed", text}};
    try {
      return Resolved(one).count("seed");
    } catch (const ConfigError&) {
      throw ConfigError(source + ": expected a non-negative integer seed, got '" + text + "'");
    }
  };
  if (auto it = flags.find("seed"); it != flags.end()) return parse("--seed", it->second);
  if (auto it = file.find("seed"); it != file.end()) return parse("--seed (config file)", it->second);
  if (const char* env = std::getenv("RATEKIN_SEED"); env != nullptr && *env != '\0') {
    return parse("RATEKIN_SEED", env);
  }
  return 42;
}

json config_echo(const CommandSpec& spec, const Resolved& cfg) {
  json echo = json::object();
  for (const auto& key : spec.keys) {
    if (key == "threads") continue;
    echo[key] = cfg.text(key);
  }
  return echo;
}

json manifest_head(const CommandSpec& spec, const Resolved& cfg, const std::string& profile,
                   const std::string& started) {
  json m;
  m["tool"] = "ratekin";
  m["version"] = kVersion;
  m["command"] = spec.name;
  m["profile"] = profile;
  m["config"] = config_echo(spec, cfg);
  m["master_seed"] = cfg.count("seed");
  m["started_at"] = started;
  return m;
}

int cmd_fixed_point(const Resolved& cfg, std::ostream& out) {
  const ModelParams params = model_params(cfg);
  const double r_inf = params.lambda() == 1.0 ? 1.0 : fixed_point(params);
  out << format_real(r_inf) << '\n';
  return kOk;
}

int cmd_simulate(const CommandSpec& spec, const Resolved& cfg, const std::string& profile,
                 OutputDir& dir, std::ostream& out) {
  const std::string started = iso_now();
  const ModelParams params = model_params(cfg);
  PolicySpec policy;
  try {
    policy.mode = parse_policy_mode(cfg.text("policy"));
  } catch (const std::invalid_argument&) {
    throw ConfigError("--policy: expected fixed, signal-matched or optimal, got '" +
                      cfg.text("policy") + "'");
  }
  policy.cost = cost_params(cfg);
  policy.fixed_controls.gain = cfg.real("gain", [](double x) { return x >= 0.0; }, ">= 0");
  policy.fixed_controls.assortativity =
      cfg.real("eta", [](double x) { return x >= 0.0 && x < 1.0; }, "in [0,1)");
  policy.fixed_controls.scale = cfg.real("sigma", [](double x) { return x > 0.0; }, "> 0");

  TrajectoryOptions opts;
  opts.n = population(cfg, "n");
  opts.horizon = cfg.count("horizon", 1);
  opts.r0 = cfg.real("r0", [](double x) { return x >= 0.0 && x < 1.0; }, "in [0,1)");
  const std::string& init = cfg.text("init");
  if (init == "exact") {
    opts.init = InitMode::exact_moments;
  } else if (init == "zero") {
    opts.init = InitMode::zero_ratings;
  } else {
    throw ConfigError("--init: expected exact or zero, got '" + init + "'");
  }
  try {
    opts.scale_source = parse_scale_source(cfg.text("scale_source"));
  } catch (const std::invalid_argument&) {
    throw ConfigError("--scale-source: expected mean-field or empirical, got '" +
                      cfg.text("scale_source") + "'");
  }
  const std::uint64_t seed = cfg.count("seed");

  const Trajectory tr = run_trajectory(opts, policy, params, RngStream(seed));

  CsvWriter csv("t,r_empirical,sigma,K,eta,sigma_target,utility");
  for (std::size_t t = 0; t < tr.accuracy.size(); ++t) {
    const ControlTriple& c = tr.controls[t];
    csv.row(t, tr.accuracy[t], tr.dispersion[t], c.gain, c.assortativity, c.scale, tr.utility[t]);
  }
  dir.write("trajectory.csv", csv.str());

  const double welfare = discounted_welfare(tr.utility, policy.cost.discount);
  json m = manifest_head(spec, cfg, profile, started);
  m["results"] = {{"final_r_empirical", tr.accuracy.back()},
                  {"final_r_mean_field", tr.reference.back()},
                  {"discounted_welfare", welfare}};
  m["finished_at"] = iso_now();
  dir.write_manifest(std::move(m));
  out << "simulate: N=" << opts.n << " T=" << opts.horizon
      << " final r=" << format_real(tr.accuracy.back()) << " welfare=" << format_real(welfare)
      << '\n';
  return kOk;
}

int cmd_converge(const CommandSpec& spec, const Resolved& cfg, const std::string& profile,
                 OutputDir& dir, std::ostream& out) {
  const std::string started = iso_now();
  StudyConfig study;
  study.params = model_params(cfg);
  study.n_grid = cfg.counts("n_grid");
  for (std::size_t n : study.n_grid) {
    if (n < 4 || n % 2 != 0) throw ConfigError("--n-grid: every N must be even and >= 4");
  }
  study.horizon = cfg.count("horizon", 1);
  study.replicates = cfg.count("replicates", 1);
  study.master_seed = cfg.count("seed");
  study.controls.gain = cfg.real("gain", [](double x) { return x >= 0.0; }, ">= 0");
  study.controls.assortativity =
      cfg.real("eta", [](double x) { return x >= 0.0 && x < 1.0; }, "in [0,1)");
  study.controls.scale = cfg.real("sigma", [](double x) { return x > 0.0; }, "> 0");
  study.r0 = cfg.real("r0", [](double x) { return x >= 0.0 && x < 1.0; }, "in [0,1)");
  study.fit_min_n = cfg.count("fit_min_n");
  study.threads = thread_count(cfg);

  const ConvergenceResult res = convergence_study(study);
  CsvWriter csv("n,replicate,l2_error");
  for (std::size_t i = 0; i < res.n_values.size(); ++i) {
    for (std::size_t rep = 0; rep < res.replicates; ++rep) {
      csv.row(res.n_values[i], rep, res.per_replicate[i][rep]);
    }
    out << "converge: N=" << res.n_values[i] << " mean l2=" << format_real(res.l2_errors[i])
        << " se=" << format_real(res.l2_std_errors[i]) << '\n';
  }
  dir.write("converge.csv", csv.str());

  json m = manifest_head(spec, cfg, profile, started);
  json results;
  if (res.fit) {
    results["slope"] = res.fit->slope;
    results["intercept"] = res.fit->intercept;
    results["r_squared"] = res.fit->r_squared;
    out << "converge: slope=" << format_real(res.fit->slope) << '\n';
  } else {
    results["slope"] = nullptr;
  }
  results["mean_l2_error"] = res.l2_errors;
  results["std_error"] = res.l2_std_errors;
  m["results"] = std::move(results);
  m["finished_at"] = iso_now();
  dir.write_manifest(std::move(m));
  return kOk;
}

int cmd_red_queen(const CommandSpec& spec, const Resolved& cfg, const std::string& profile,
                  OutputDir& dir, std::ostream& out) {
  const std::string started = iso_now();
  StudyConfig study;
  study.lambda_grid =
      cfg.reals("lambda_grid", [](double x) { return x > 0.0 && x <= 1.0; }, "in (0,1]");
  study.beta2_grid = cfg.reals("beta2_grid", [](double x) { return x > 0.0; }, "> 0");
  const auto rows = red_queen_study(study);
  CsvWriter csv("lambda,beta2,r_infinity");
  for (const auto& row : rows) csv.row(row.lambda, row.beta2, row.r_infinity);
  dir.write("red_queen.csv", csv.str());

  bool bounded = true;
  for (const auto& row : rows) bounded = bounded && (row.lambda == 1.0 || row.r_infinity < row.lambda);
  json m = manifest_head(spec, cfg, profile, started);
  m["results"] = {{"rows", rows.size()}, {"all_below_lambda", bounded}};
  m["finished_at"] = iso_now();
  dir.write_manifest(std::move(m));
  out << "red-queen: " << rows.size() << " rows\n";
  return kOk;
}

int cmd_invariance(const CommandSpec& spec, const Resolved& cfg, const std::string& profile,
                   OutputDir& dir, std::ostream& out) {
  const std::string started = iso_now();
  StudyConfig study;
  study.params = model_params(cfg);
  study.invariance_n = population(cfg, "n");
  study.horizon = cfg.count("horizon", 1);
  study.master_seed = cfg.count("seed");
  study.invariance_gain = cfg.real("gain", [](double x) { return x >= 0.0; }, ">= 0");
  study.eta_list = cfg.reals("eta_list", [](double x) { return x >= 0.0 && x < 1.0; }, "in [0,1)");
  study.invariance_r0 = cfg.real("r0", [](double x) { return x >= 0.0 && x < 1.0; }, "in [0,1)");
  try {
    study.scale_source = parse_scale_source(cfg.text("scale_source"));
  } catch (const std::invalid_argument&) {
    throw ConfigError("--scale-source: expected mean-field or empirical, got '" +
                      cfg.text("scale_source") + "'");
  }
  study.threads = thread_count(cfg);

  const InvarianceResult res = invariance_study(study);
  CsvWriter csv("regime,eta,t,r");
  for (const auto& cell : res.cells) {
    const std::string regime = to_string(cell.regime);
    for (std::size_t t = 0; t < cell.trajectory.accuracy.size(); ++t) {
      csv.row(regime, cell.eta, t, cell.trajectory.accuracy[t]);
    }
    out << "invariance: " << regime << " eta=" << format_real(cell.eta)
        << " final r=" << format_real(cell.trajectory.accuracy.back()) << '\n';
  }
  dir.write("invariance.csv", csv.str());

  json m = manifest_head(spec, cfg, profile, started);
  json results = {{"fixed_spread", res.fixed_spread}, {"adaptive_spread", res.adaptive_spread}};
  results["spread_ratio"] =
      res.adaptive_spread > 0.0 ? json(res.fixed_spread / res.adaptive_spread) : json(nullptr);
  m["results"] = std::move(results);
  m["finished_at"] = iso_now();
  dir.write_manifest(std::move(m));
  out << "invariance: fixed spread=" << format_real(res.fixed_spread)
      << " adaptive spread=" << format_real(res.adaptive_spread) << '\n';
  return kOk;
}

int cmd_phase(const CommandSpec& spec, const Resolved& cfg, const std::string& profile,
              OutputDir& dir, std::ostream& out) {
  const std::string started = iso_now();
  const double kappa_c = cfg.real("kappa_c", [](double x) { return x > 0.0; }, "> 0");
  const double step = cfg.real("r_step", [](double x) { return x > 0.0 && x <= 1.0; }, "in (0,1]");
  const auto points = static_cast<std::size_t>(std::llround(1.0 / step));
  std::vector<double> grid;
  for (std::size_t i = 0; i <= points; ++i) {
    grid.push_back(std::min(1.0, static_cast<double>(i) * step));
  }
  const auto rows = phase_transition_study(kappa_c, grid);
  CsvWriter csv("r,eta_star,value");
  for (const auto& row : rows) csv.row(row.r, row.eta_star, row.value);
  dir.write("phase.csv", csv.str());

  json m = manifest_head(spec, cfg, profile, started);
  m["results"] = {{"rows", rows.size()}, {"critical_accuracy", std::sqrt(kappa_c)}};
  m["finished_at"] = iso_now();
  dir.write_manifest(std::move(m));
  out << "phase: " << rows.size() << " rows, r_c=" << format_real(std::sqrt(kappa_c)) << '\n';
  return kOk;
}

int dispatch(const CommandSpec& spec, const Config& flags, const std::string& config_path,
             const std::string& profile, const std::string& out_dir, std::ostream& out) {
  Config file;
  if (!config_path.empty()) file = read_config_file(config_path);
  for (const auto& [key, value] : file) {
    if (known_keys().count(key) == 0) throw ConfigError("--config: unknown key '" + key + "'");
  }

  Config merged = profile_defaults(spec.name, profile);
  for (const auto& [key, value] : file) merged[key] = value;
  for (const auto& [key, value] : flags) merged[key] = value;
  merged["seed"] = std::to_string(resolve_seed(flags, file));
  const Resolved cfg(std::move(merged));

  if (!spec.writes_outputs) return cmd_fixed_point(cfg, out);
  OutputDir dir(out_dir);
  if (spec.name == "simulate") return cmd_simulate(spec, cfg, profile, dir, out);
  if (spec.name == "converge") return cmd_converge(spec, cfg, profile, dir, out);
  if (spec.name == "red-queen") return cmd_red_queen(spec, cfg, profile, dir, out);
  if (spec.name == "invariance") return cmd_invariance(spec, cfg, profile, dir, out);
  return cmd_phase(spec, cfg, profile, dir, out);
}

}  // namespace

Config read_config_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  Config cfg;

  if (path.extension() == ".json") {
    json doc;
    try {
      doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw ConfigError("--config: invalid JSON: " + std::string(e.what()));
    }
    const json& section = doc.contains("config") ? doc["config"] : doc;
    if (!section.is_object()) throw ConfigError("--config: expected a JSON object");
    for (const auto& [key, value] : section.items()) {
      cfg[normalise_key(key)] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    return cfg;
  }

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(buf, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--config: line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = normalise_key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("--config: line " + std::to_string(lineno) + ": empty key");
    cfg[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

std::string format_real(double value) {
  if (value == 0.0) value = 0.0;  // fold -0
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.12g", value);
  return buf.data();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256: digest init failed");
  }
  std::array<char, 1 << 16> chunk{};
  while (f.read(chunk.data(), chunk.size()) || f.gcount() > 0) {
    EVP_DigestUpdate(ctx, chunk.data(), static_cast<std::size_t>(f.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean-field rating dynamics toolkit", "ratekin"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Bound {
    CLI::App* sub = nullptr;
    const CommandSpec* spec = nullptr;
    std::map<std::string, std::string> slots;
    std::map<std::string, CLI::Option*> options;
    std::string config;
    std::string profile = "desk";
    std::string out_dir = "out";
  };
  std::vector<Bound> bound(commands().size());

  for (std::size_t i = 0; i < commands().size(); ++i) {
    const CommandSpec& spec = commands()[i];
    Bound& b = bound[i];
    b.spec = &spec;
    b.sub = app.add_subcommand(spec.name, spec.description);
    for (const auto& key : spec.keys) {
      b.options[key] = b.sub->add_option(flag_name(key), b.slots[key]);
    }
    if (spec.writes_outputs) {
      b.sub->add_option("--config", b.config, "key = value file or a previous manifest.json");
      b.sub->add_option("--out", b.out_dir, "Output directory")->capture_default_str();
      b.sub->add_option("--profile", b.profile, "Default sizes")
          ->check(CLI::IsMember({"desk", "paper"}))
          ->capture_default_str();
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidConfig;
  }

  for (auto& b : bound) {
    if (!b.sub->parsed()) continue;
    Config flags;
    for (const auto& [key, opt] : b.options) {
      if (opt->count() > 0) flags[key] = b.slots[key];
    }
    try {
      return dispatch(*b.spec, flags, b.config, b.profile, b.out_dir, out);
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << '\n';
      return kInvalidConfig;
    } catch (const IoError& e) {
      err << "error: " << e.what() << '\n';
      return kIoFailure;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kInvalidConfig;
    }
  }
  return kInvalidConfig;
}

}  // namespace ratekin::cli
