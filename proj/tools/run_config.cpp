#include "run_config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ecomann::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& raw, const char* what) {
  const std::string s = trim(raw);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError("expected " + std::string(what) + ", got '" + raw + "'");
  }
  return v;
}

template <typename T>
T parse_value(const std::string& s);

template <>
double parse_value<double>(const std::string& s) {
  return parse_number<double>(s, "a number");
}
template <>
int parse_value<int>(const std::string& s) {
  return parse_number<int>(s, "an integer");
}
template <>
long parse_value<long>(const std::string& s) {
  return parse_number<long>(s, "an integer");
}
template <>
std::uint64_t parse_value<std::uint64_t>(const std::string& s) {
  return parse_number<std::uint64_t>(s, "a non-negative integer");
}
template <>
bool parse_value<bool>(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw UsageError("expected a boolean, got '" + raw + "'");
}
template <>
std::string parse_value<std::string>(const std::string& s) {
  return trim(s);
}

template <typename T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  std::istringstream in(s);
  for (std::string tok; std::getline(in, tok, ',');) out.push_back(parse_value<T>(tok));
  if (out.empty()) throw UsageError("expected a comma-separated list, got '" + s + "'");
  return out;
}
template <>
std::vector<int> parse_value<std::vector<int>>(const std::string& s) {
  return parse_list<int>(s);
}
template <>
std::vector<double> parse_value<std::vector<double>>(const std::string& s) {
  return parse_list<double>(s);
}

// shortest text that parses back to the same double
std::string format_value(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
std::string format_value(int v) { return std::to_string(v); }
std::string format_value(long v) { return std::to_string(v); }
std::string format_value(std::uint64_t v) { return std::to_string(v); }
std::string format_value(bool v) { return v ? "true" : "false"; }
std::string format_value(const std::string& v) { return v; }
template <typename T>
std::string format_value(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_value(v[i]);
  return out;
}

template <typename T>
const char* type_name() {
  if constexpr (std::is_same_v<T, double>) return "float";
  if constexpr (std::is_same_v<T, bool>) return "bool";
  if constexpr (std::is_same_v<T, std::string>) return "string";
  if constexpr (std::is_same_v<T, std::vector<int>>) return "int list";
  if constexpr (std::is_same_v<T, std::vector<double>>) return "float list";
  return "int";
}

template <typename Get>
ConfigKey entry(std::string name, std::string help, Get get) {
  using T = std::remove_cvref_t<decltype(get(std::declval<RunConfig&>()))>;
  return {std::move(name), type_name<T>(), std::move(help),
          [get](RunConfig& c, const std::string& v) { get(c) = parse_value<T>(v); },
          [get](const RunConfig& c) { return format_value(get(const_cast<RunConfig&>(c))); }};
}

std::vector<ConfigKey> build_registry() {
  std::vector<ConfigKey> r;
  r.push_back({"seed", "int", "seed for training, planning and generated data (ECOMANN_SEED if unset)",
               [](RunConfig& c, const std::string& v) {
                 c.train.seed = parse_value<std::uint64_t>(v);
                 c.seed_set = true;
               },
               [](const RunConfig& c) { return format_value(c.train.seed); }});

  r.push_back(entry("w_norm", "weight of the norm loss", [](RunConfig& c) -> auto& { return c.train.w_norm; }));
  r.push_back(entry("w_reflection", "weight of the reflection loss", [](RunConfig& c) -> auto& { return c.train.w_reflection; }));
  r.push_back(entry("w_fraction", "weight of the fraction loss", [](RunConfig& c) -> auto& { return c.train.w_fraction; }));
  r.push_back(entry("w_similar", "weight of the similar-pair loss", [](RunConfig& c) -> auto& { return c.train.w_similar; }));
  r.push_back(entry("w_align", "weight of the Jacobian alignment loss", [](RunConfig& c) -> auto& { return c.train.w_align; }));
  r.push_back(entry("learning_rate", "Adam step size", [](RunConfig& c) -> auto& { return c.train.learning_rate; }));
  r.push_back(entry("epochs", "training epochs", [](RunConfig& c) -> auto& { return c.train.epochs; }));
  r.push_back(entry("batch_size", "augmented points per step", [](RunConfig& c) -> auto& { return c.train.batch_size; }));
  r.push_back(entry("damping", "Tikhonov term of the alignment projector", [](RunConfig& c) -> auto& { return c.train.damping; }));
  r.push_back(entry("disable_augmentation", "train on the on-manifold points only", [](RunConfig& c) -> auto& { return c.train.disable_augmentation; }));
  r.push_back(entry("disable_osa", "skip orthogonal subspace alignment", [](RunConfig& c) -> auto& { return c.train.disable_osa; }));
  r.push_back(entry("disable_siamese", "drop reflection, fraction and similar losses", [](RunConfig& c) -> auto& { return c.train.disable_siamese; }));
  r.push_back(entry("disable_reflection", "drop the reflection loss", [](RunConfig& c) -> auto& { return c.train.disable_reflection; }));
  r.push_back(entry("disable_fraction", "drop the fraction loss", [](RunConfig& c) -> auto& { return c.train.disable_fraction; }));
  r.push_back(entry("disable_similar", "drop the similar-pair loss", [](RunConfig& c) -> auto& { return c.train.disable_similar; }));
  r.push_back(entry("disable_alignment", "drop the Jacobian alignment loss", [](RunConfig& c) -> auto& { return c.train.disable_alignment; }));
  r.push_back(entry("k", "local PCA neighbours (0: max(d+1, 2d))", [](RunConfig& c) -> auto& { return c.train.k; }));
  r.push_back(entry("codim_k", "codimension vote neighbours (0: max(default k, 50))", [](RunConfig& c) -> auto& { return c.train.codim_k; }));
  r.push_back({"codim", "int", "codimension override (0: estimate from data)",
               [](RunConfig& c, const std::string& v) {
                 const int l = parse_value<int>(v);
                 if (l < 0) throw UsageError("codim must be >= 0");
                 c.train.codim = l == 0 ? std::nullopt : std::optional<int>(l);
               },
               [](const RunConfig& c) { return format_value(c.train.codim.value_or(0)); }});
  r.push_back(entry("levels", "augmentation levels", [](RunConfig& c) -> auto& { return c.train.levels; }));
  r.push_back(entry("dirs_per_point", "normal directions per point and level", [](RunConfig& c) -> auto& { return c.train.dirs_per_point; }));
  r.push_back(entry("hidden", "hidden layer widths", [](RunConfig& c) -> auto& { return c.train.hidden; }));
  r.push_back(entry("output_bias_init", "initial value of every output bias", [](RunConfig& c) -> auto& { return c.train.output_bias_init; }));
  r.push_back(entry("osa_h", "neighbours in the alignment graph", [](RunConfig& c) -> auto& { return c.train.osa.h; }));
  r.push_back(entry("osa_iters", "gradient steps per local alignment", [](RunConfig& c) -> auto& { return c.train.osa.iters; }));
  r.push_back(entry("osa_lr", "step size of the local alignment", [](RunConfig& c) -> auto& { return c.train.osa.lr; }));

  r.push_back(entry("n_samples", "projected samples for the success rate", [](RunConfig& c) -> auto& { return c.eval.n_samples; }));
  r.push_back(entry("threshold", "success threshold on the ground-truth residual", [](RunConfig& c) -> auto& { return c.eval.threshold; }));
  r.push_back(entry("eval_seed", "seed of the evaluation samples", [](RunConfig& c) -> auto& { return c.eval.seed; }));
  r.push_back(entry("proj_tol", "projection tolerance on ||h||", [](RunConfig& c) -> auto& { return c.eval.projection.tol; }));
  r.push_back(entry("proj_max_iters", "projection iteration cap", [](RunConfig& c) -> auto& { return c.eval.projection.max_iters; }));
  r.push_back(entry("proj_step", "initial projection step", [](RunConfig& c) -> auto& { return c.eval.projection.step; }));
  r.push_back(entry("proj_damping", "Gauss-Newton damping of the projection", [](RunConfig& c) -> auto& { return c.eval.projection.damping; }));

  r.push_back(entry("rrt_step", "steering distance", [](RunConfig& c) -> auto& { return c.rrt.step; }));
  r.push_back(entry("rrt_rewire_radius", "RRT* rewiring radius", [](RunConfig& c) -> auto& { return c.rrt.rewire_radius; }));
  r.push_back(entry("rrt_max_nodes", "node budget per stage", [](RunConfig& c) -> auto& { return c.rrt.max_nodes; }));
  r.push_back(entry("rrt_goal_bias", "probability of steering toward the next manifold", [](RunConfig& c) -> auto& { return c.rrt.goal_bias; }));
  r.push_back(entry("on_manifold_tol", "waypoint residual tolerance", [](RunConfig& c) -> auto& { return c.on_manifold_tol; }));
  r.push_back(entry("reach_tol", "residual on the next manifold that ends a stage", [](RunConfig& c) -> auto& { return c.reach_tol; }));

  r.push_back(entry("repeats", "repeats per study row", [](RunConfig& c) -> auto& { return c.repeats; }));
  r.push_back(entry("study_levels", "augmentation levels compared by level-study", [](RunConfig& c) -> auto& { return c.study_levels; }));
  r.push_back(entry("noise_sigmas", "noise levels compared by noise-study", [](RunConfig& c) -> auto& { return c.noise_sigmas; }));
  r.push_back(entry("n", "size of generated datasets", [](RunConfig& c) -> auto& { return c.n; }));
  r.push_back(entry("scenario", "planning scenario (hourglass)", [](RunConfig& c) -> auto& { return c.scenario; }));
  r.push_back(entry("sphere_model", "sphere of the scenario: analytic or a model file", [](RunConfig& c) -> auto& { return c.sphere_model; }));
  return r;
}

}  // namespace

const std::vector<ConfigKey>& config_registry() {
  static const std::vector<ConfigKey> registry = build_registry();
  return registry;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& k : config_registry()) {
    if (k.name != key) continue;
    try {
      k.set(config, value);
    } catch (const UsageError& e) {
      throw UsageError("key '" + key + "': " + e.what());
    }
    return;
  }
  throw UsageError("unknown config key '" + key + "' (see --help)");
}

void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw UsageError(where + "expected 'key = value'");
    try {
      apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const UsageError& e) {
      throw UsageError(where + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(config, ss.str(), path);
}

void apply_assignment(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + assignment + "'");
  apply_setting(config, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void apply_seed_env(RunConfig& config) {
  if (config.seed_set) return;
  if (const char* env = std::getenv("ECOMANN_SEED")) {
    try {
      apply_setting(config, "seed", env);
    } catch (const UsageError& e) {
      throw UsageError(std::string("ECOMANN_SEED: ") + e.what());
    }
  }
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : config_registry()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

std::string registry_help() {
  const RunConfig defaults;
  std::string out = "Config keys (config files take 'key = value' lines; --set key=value overrides):\n";
  char buf[256];
  for (const auto& k : config_registry()) {
    std::snprintf(buf, sizeof buf, "  %-22s %-10s %-14s %s\n", k.name.c_str(), k.type.c_str(), k.get(defaults).c_str(),
                  k.help.c_str());
    out += buf;
  }
  return out;
}

}  // namespace ecomann::cli
