#ifndef MFC_CONFIG_HPP
#define MFC_CONFIG_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mfc/gallery.hpp"
#include "mfc/measure.hpp"
#include "mfc/policy.hpp"

namespace mfc {

/// Raised for malformed or out-of-range configuration input. The message
/// always names the offending key path so the file can be fixed directly.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ConfigJson = nlohmann::ordered_json;

/**
 * Which model to instantiate. `kind` selects the gallery family:
 *   random     affine model drawn from `seed` (kernel_blend, smooth_cost)
 *   tabular    piecewise-constant model over a resolution-`resolution` grid
 *   two_target coordination example (eq_tol, penalty); forces 2 states/actions
 *   constant   one kernel row everywhere (row, cost_base, cost_slope)
 *   identity   frozen-state kernel (cost_base, cost_slope)
 *   table      explicit population-independent tables (cost_table, kernel_table)
 * Fields not consumed by the chosen kind keep their defaults and are ignored.
 */
struct ModelSpec {
  std::string kind = "random";
  std::uint64_t seed = 1;
  int n_states = 3;
  int n_actions = 2;
  double kernel_blend = 0.3;
  bool smooth_cost = true;
  int resolution = 4;
  double eq_tol = 0.05;
  double penalty = 10.0;
  std::vector<double> row;
  std::vector<double> cost_base;   ///< per (x,u); a single entry broadcasts
  std::vector<double> cost_slope;  ///< per (x,u,y); empty means zeros
  std::vector<std::vector<double>> cost_table;                 ///< [x][u]
  std::vector<std::vector<std::vector<double>>> kernel_table;  ///< [x][u] -> row over y
};

/// A state-feedback policy: uniform, deterministic (one action per state),
/// or a weighted mixture of sub-policies.
struct PolicySpec {
  std::string kind = "uniform";
  std::vector<int> actions;
  std::vector<double> weights;
  std::vector<PolicySpec> parts;
};

/// Learner selection for the learn subcommand. `training_resolution` sets
/// both the coordinated training grid and the indicator-basis grid.
struct LearnerSpec {
  std::string mode = "coordinated";  ///< coordinated | independent-infinite | independent-finite
  std::string basis = "moment";      ///< moment | indicator
  int moment_degree = 1;
  int training_resolution = 6;
  long long steps = 200000;
  double eps_floor = 0.05;
  bool common_randomness = true;
  int n_agents = 50;  ///< independent-finite team size
  double convergence_threshold = 1e-3;
};

/**
 * One verify scenario. kind "pair" draws a true model and a perturbed sibling
 * from `seed` (0 derives a seed from the root seed and the scenario's
 * position) and checks the matching performance bound; kind "example" runs
 * the two-target coordination example against its closed form.
 */
struct ScenarioSpec {
  std::string name;
  std::string kind = "pair";
  std::uint64_t seed = 0;
  int n_states = 3;
  int n_actions = 2;
  double kernel_blend = 0.3;
  double eps = 0.15;  ///< perturbation size of the mismatched model
  bool open_loop = false;
  int n_agents = 0;  ///< 0 = infinite population
  int mc_reps = 200;
  int mn_reps = 2000;
  bool force_zero_bound = false;  ///< negative control: fabricate bound = 0
};

/// The full experiment closure. Every field has a default, and to_json
/// always emits all of them, so a stored config is self-describing.
struct ExperimentConfig {
  ModelSpec model;
  PolicySpec policy;
  LearnerSpec learner;
  std::vector<ScenarioSpec> scenarios;

  double beta = 0.9;
  int grid_resolution = 8;
  int mixture_resolution = 2;
  int mn_joint_resolution = 4;
  double plan_tol = 1e-6;
  double trunc_tol = 1e-4;
  int horizon = 0;  ///< 0 derives the horizon from beta, c_sup and trunc_tol
  std::vector<int> agent_counts;
  int replications = 100;
  int mn_replications = 2000;
  long long brute_force_cap = 5000;
  std::uint64_t root_seed = 1;
  std::vector<double> mu0;  ///< empty = uniform start
  std::string out_dir = "out";
};

namespace cfg_detail {

inline std::string joined(const std::vector<std::string>& keys) {
  std::string out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i) out += ", ";
    out += keys[i];
  }
  return out;
}

inline void require_object(const ConfigJson& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

/// Strict schema: any key outside `allowed` is a hard error that names the
/// key and lists what would have been accepted.
inline void reject_unknown(const ConfigJson& j, const std::vector<std::string>& allowed,
                           const std::string& path) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const auto& k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError(path + ": unknown key \"" + item.key() + "\" (allowed: " +
                        joined(allowed) + ")");
  }
}

inline double get_double(const ConfigJson& j, const char* key, double fallback,
                         const std::string& path) {
  if (!j.contains(key)) return fallback;
  const ConfigJson& v = j.at(key);
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return v.get<double>();
}

inline long long get_int(const ConfigJson& j, const char* key, long long fallback,
                         const std::string& path) {
  if (!j.contains(key)) return fallback;
  const ConfigJson& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  return v.get<long long>();
}

inline std::uint64_t get_seed(const ConfigJson& j, const char* key, std::uint64_t fallback,
                              const std::string& path) {
  if (!j.contains(key)) return fallback;
  const ConfigJson& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0)
    return static_cast<std::uint64_t>(v.get<long long>());
  throw ConfigError(path + "." + key + ": expected a nonnegative integer");
}

inline bool get_bool(const ConfigJson& j, const char* key, bool fallback,
                     const std::string& path) {
  if (!j.contains(key)) return fallback;
  const ConfigJson& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
  return v.get<bool>();
}

inline std::string get_string(const ConfigJson& j, const char* key, std::string fallback,
                              const std::string& path) {
  if (!j.contains(key)) return fallback;
  const ConfigJson& v = j.at(key);
  if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<double> get_double_array(const ConfigJson& j, const char* key,
                                            std::vector<double> fallback,
                                            const std::string& path) {
  if (!j.contains(key)) return fallback;
  const ConfigJson& v = j.at(key);
  if (!v.is_array()) throw ConfigError(path + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(path + "." + key + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline std::vector<double> as_double_array(const ConfigJson& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(path + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline std::vector<int> get_int_array(const ConfigJson& j, const char* key,
                                      std::vector<int> fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  const ConfigJson& v = j.at(key);
  if (!v.is_array()) throw ConfigError(path + "." + key + ": expected an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer())
      throw ConfigError(path + "." + key + ": expected an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

}  // namespace cfg_detail

inline ModelSpec parse_model_spec(const ConfigJson& j, const std::string& path) {
  using namespace cfg_detail;
  require_object(j, path);
  reject_unknown(j,
                 {"kind", "seed", "n_states", "n_actions", "kernel_blend", "smooth_cost",
                  "resolution", "eq_tol", "penalty", "row", "cost_base", "cost_slope",
                  "cost_table", "kernel_table"},
                 path);
  ModelSpec m;
  m.kind = get_string(j, "kind", m.kind, path);
  m.seed = get_seed(j, "seed", m.seed, path);
  m.n_states = static_cast<int>(get_int(j, "n_states", m.n_states, path));
  m.n_actions = static_cast<int>(get_int(j, "n_actions", m.n_actions, path));
  m.kernel_blend = get_double(j, "kernel_blend", m.kernel_blend, path);
  m.smooth_cost = get_bool(j, "smooth_cost", m.smooth_cost, path);
  m.resolution = static_cast<int>(get_int(j, "resolution", m.resolution, path));
  m.eq_tol = get_double(j, "eq_tol", m.eq_tol, path);
  m.penalty = get_double(j, "penalty", m.penalty, path);
  m.row = get_double_array(j, "row", m.row, path);
  m.cost_base = get_double_array(j, "cost_base", m.cost_base, path);
  m.cost_slope = get_double_array(j, "cost_slope", m.cost_slope, path);
  if (j.contains("cost_table")) {
    const ConfigJson& t = j.at("cost_table");
    if (!t.is_array()) throw ConfigError(path + ".cost_table: expected an array per state");
    for (std::size_t x = 0; x < t.size(); ++x)
      m.cost_table.push_back(
          as_double_array(t.at(x), path + ".cost_table[" + std::to_string(x) + "]"));
  }
  if (j.contains("kernel_table")) {
    const ConfigJson& t = j.at("kernel_table");
    if (!t.is_array()) throw ConfigError(path + ".kernel_table: expected an array per state");
    for (std::size_t x = 0; x < t.size(); ++x) {
      const ConfigJson& per_action = t.at(x);
      const std::string xpath = path + ".kernel_table[" + std::to_string(x) + "]";
      if (!per_action.is_array()) throw ConfigError(xpath + ": expected an array per action");
      std::vector<std::vector<double>> rows;
      for (std::size_t u = 0; u < per_action.size(); ++u)
        rows.push_back(as_double_array(per_action.at(u), xpath + "[" + std::to_string(u) + "]"));
      m.kernel_table.push_back(std::move(rows));
    }
  }
  return m;
}

inline PolicySpec parse_policy_spec(const ConfigJson& j, const std::string& path) {
  using namespace cfg_detail;
  require_object(j, path);
  reject_unknown(j, {"kind", "actions", "weights", "parts"}, path);
  PolicySpec p;
  p.kind = get_string(j, "kind", p.kind, path);
  p.actions = get_int_array(j, "actions", p.actions, path);
  p.weights = get_double_array(j, "weights", p.weights, path);
  if (j.contains("parts")) {
    const ConfigJson& parts = j.at("parts");
    if (!parts.is_array()) throw ConfigError(path + ".parts: expected an array of policies");
    for (std::size_t i = 0; i < parts.size(); ++i)
      p.parts.push_back(parse_policy_spec(parts.at(i), path + ".parts[" + std::to_string(i) + "]"));
  }
  return p;
}

inline LearnerSpec parse_learner_spec(const ConfigJson& j, const std::string& path) {
  using namespace cfg_detail;
  require_object(j, path);
  reject_unknown(j,
                 {"mode", "basis", "moment_degree", "training_resolution", "steps", "eps_floor",
                  "common_randomness", "n_agents", "convergence_threshold"},
                 path);
  LearnerSpec l;
  l.mode = get_string(j, "mode", l.mode, path);
  l.basis = get_string(j, "basis", l.basis, path);
  l.moment_degree = static_cast<int>(get_int(j, "moment_degree", l.moment_degree, path));
  l.training_resolution =
      static_cast<int>(get_int(j, "training_resolution", l.training_resolution, path));
  l.steps = get_int(j, "steps", l.steps, path);
  l.eps_floor = get_double(j, "eps_floor", l.eps_floor, path);
  l.common_randomness = get_bool(j, "common_randomness", l.common_randomness, path);
  l.n_agents = static_cast<int>(get_int(j, "n_agents", l.n_agents, path));
  l.convergence_threshold = get_double(j, "convergence_threshold", l.convergence_threshold, path);
  return l;
}

inline ScenarioSpec parse_scenario_spec(const ConfigJson& j, const std::string& path) {
  using namespace cfg_detail;
  require_object(j, path);
  reject_unknown(j,
                 {"name", "kind", "seed", "n_states", "n_actions", "kernel_blend", "eps",
                  "open_loop", "n_agents", "mc_reps", "mn_reps", "force_zero_bound"},
                 path);
  ScenarioSpec s;
  s.name = get_string(j, "name", s.name, path);
  s.kind = get_string(j, "kind", s.kind, path);
  s.seed = get_seed(j, "seed", s.seed, path);
  s.n_states = static_cast<int>(get_int(j, "n_states", s.n_states, path));
  s.n_actions = static_cast<int>(get_int(j, "n_actions", s.n_actions, path));
  s.kernel_blend = get_double(j, "kernel_blend", s.kernel_blend, path);
  s.eps = get_double(j, "eps", s.eps, path);
  s.open_loop = get_bool(j, "open_loop", s.open_loop, path);
  s.n_agents = static_cast<int>(get_int(j, "n_agents", s.n_agents, path));
  s.mc_reps = static_cast<int>(get_int(j, "mc_reps", s.mc_reps, path));
  s.mn_reps = static_cast<int>(get_int(j, "mn_reps", s.mn_reps, path));
  s.force_zero_bound = get_bool(j, "force_zero_bound", s.force_zero_bound, path);
  return s;
}

inline ExperimentConfig parse_config(const ConfigJson& j) {
  using namespace cfg_detail;
  const std::string path = "config";
  require_object(j, path);
  reject_unknown(j,
                 {"model", "policy", "learner", "scenarios", "beta", "grid_resolution",
                  "mixture_resolution", "mn_joint_resolution", "plan_tol", "trunc_tol", "horizon",
                  "agent_counts", "replications", "mn_replications", "brute_force_cap",
                  "root_seed", "mu0", "out_dir"},
                 path);
  ExperimentConfig c;
  if (j.contains("model")) c.model = parse_model_spec(j.at("model"), path + ".model");
  if (j.contains("policy")) c.policy = parse_policy_spec(j.at("policy"), path + ".policy");
  if (j.contains("learner")) c.learner = parse_learner_spec(j.at("learner"), path + ".learner");
  if (j.contains("scenarios")) {
    const ConfigJson& arr = j.at("scenarios");
    if (!arr.is_array()) throw ConfigError(path + ".scenarios: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      c.scenarios.push_back(
          parse_scenario_spec(arr.at(i), path + ".scenarios[" + std::to_string(i) + "]"));
  }
  c.beta = get_double(j, "beta", c.beta, path);
  c.grid_resolution = static_cast<int>(get_int(j, "grid_resolution", c.grid_resolution, path));
  c.mixture_resolution =
      static_cast<int>(get_int(j, "mixture_resolution", c.mixture_resolution, path));
  c.mn_joint_resolution =
      static_cast<int>(get_int(j, "mn_joint_resolution", c.mn_joint_resolution, path));
  c.plan_tol = get_double(j, "plan_tol", c.plan_tol, path);
  c.trunc_tol = get_double(j, "trunc_tol", c.trunc_tol, path);
  c.horizon = static_cast<int>(get_int(j, "horizon", c.horizon, path));
  c.agent_counts = get_int_array(j, "agent_counts", c.agent_counts, path);
  c.replications = static_cast<int>(get_int(j, "replications", c.replications, path));
  c.mn_replications = static_cast<int>(get_int(j, "mn_replications", c.mn_replications, path));
  c.brute_force_cap = get_int(j, "brute_force_cap", c.brute_force_cap, path);
  c.root_seed = get_seed(j, "root_seed", c.root_seed, path);
  c.mu0 = get_double_array(j, "mu0", c.mu0, path);
  c.out_dir = get_string(j, "out_dir", c.out_dir, path);
  return c;
}

/// Read and parse a config file; parse failures carry the file name and the
/// parser's position report.
inline ExperimentConfig load_config(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in) throw ConfigError("cannot open config file " + file_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  ConfigJson j;
  try {
    j = ConfigJson::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(file_path + ": " + e.what());
  }
  return parse_config(j);
}

inline ConfigJson to_json(const PolicySpec& p) {
  ConfigJson j;
  j["kind"] = p.kind;
  j["actions"] = p.actions;
  j["weights"] = p.weights;
  ConfigJson parts = ConfigJson::array();
  for (const auto& part : p.parts) parts.push_back(to_json(part));
  j["parts"] = std::move(parts);
  return j;
}

/// The complete resolved closure: every key explicit, defaults included.
inline ConfigJson to_json(const ExperimentConfig& c) {
  ConfigJson j;
  ConfigJson m;
  m["kind"] = c.model.kind;
  m["seed"] = c.model.seed;
  m["n_states"] = c.model.n_states;
  m["n_actions"] = c.model.n_actions;
  m["kernel_blend"] = c.model.kernel_blend;
  m["smooth_cost"] = c.model.smooth_cost;
  m["resolution"] = c.model.resolution;
  m["eq_tol"] = c.model.eq_tol;
  m["penalty"] = c.model.penalty;
  m["row"] = c.model.row;
  m["cost_base"] = c.model.cost_base;
  m["cost_slope"] = c.model.cost_slope;
  m["cost_table"] = c.model.cost_table;
  m["kernel_table"] = c.model.kernel_table;
  j["model"] = std::move(m);
  j["policy"] = to_json(c.policy);
  ConfigJson l;
  l["mode"] = c.learner.mode;
  l["basis"] = c.learner.basis;
  l["moment_degree"] = c.learner.moment_degree;
  l["training_resolution"] = c.learner.training_resolution;
  l["steps"] = c.learner.steps;
  l["eps_floor"] = c.learner.eps_floor;
  l["common_randomness"] = c.learner.common_randomness;
  l["n_agents"] = c.learner.n_agents;
  l["convergence_threshold"] = c.learner.convergence_threshold;
  j["learner"] = std::move(l);
  ConfigJson scenarios = ConfigJson::array();
  for (const auto& s : c.scenarios) {
    ConfigJson e;
    e["name"] = s.name;
    e["kind"] = s.kind;
    e["seed"] = s.seed;
    e["n_states"] = s.n_states;
    e["n_actions"] = s.n_actions;
    e["kernel_blend"] = s.kernel_blend;
    e["eps"] = s.eps;
    e["open_loop"] = s.open_loop;
    e["n_agents"] = s.n_agents;
    e["mc_reps"] = s.mc_reps;
    e["mn_reps"] = s.mn_reps;
    e["force_zero_bound"] = s.force_zero_bound;
    scenarios.push_back(std::move(e));
  }
  j["scenarios"] = std::move(scenarios);
  j["beta"] = c.beta;
  j["grid_resolution"] = c.grid_resolution;
  j["mixture_resolution"] = c.mixture_resolution;
  j["mn_joint_resolution"] = c.mn_joint_resolution;
  j["plan_tol"] = c.plan_tol;
  j["trunc_tol"] = c.trunc_tol;
  j["horizon"] = c.horizon;
  j["agent_counts"] = c.agent_counts;
  j["replications"] = c.replications;
  j["mn_replications"] = c.mn_replications;
  j["brute_force_cap"] = c.brute_force_cap;
  j["root_seed"] = c.root_seed;
  j["mu0"] = c.mu0;
  j["out_dir"] = c.out_dir;
  return j;
}

namespace cfg_detail {

inline void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace cfg_detail

/// Range and consistency checks shared by every subcommand. Runs after
/// command-line overrides so the values actually used are the ones checked.
inline void validate_config(const ExperimentConfig& c) {
  using cfg_detail::check;
  check(c.beta > 0.0 && c.beta < 1.0, "config.beta: must lie in (0,1)");
  check(c.grid_resolution >= 1, "config.grid_resolution: must be at least 1");
  check(c.mixture_resolution >= 1, "config.mixture_resolution: must be at least 1");
  check(c.mn_joint_resolution >= 1, "config.mn_joint_resolution: must be at least 1");
  check(c.plan_tol > 0.0, "config.plan_tol: must be positive");
  check(c.trunc_tol > 0.0, "config.trunc_tol: must be positive");
  check(c.horizon >= 0, "config.horizon: must be nonnegative (0 = derive)");
  check(c.replications >= 1, "config.replications: must be positive");
  check(c.mn_replications >= 2, "config.mn_replications: need at least 2 for a standard error");
  check(c.brute_force_cap >= 1, "config.brute_force_cap: must be positive");
  check(c.root_seed >= 1, "config.root_seed: must be positive");
  check(!c.out_dir.empty(), "config.out_dir: must not be empty");
  for (int n : c.agent_counts) check(n >= 1, "config.agent_counts: every entry must be positive");

  check(c.model.n_states >= 2, "config.model.n_states: need at least 2 states");
  check(c.model.n_actions >= 1, "config.model.n_actions: need at least 1 action");
  check(c.model.kind == "random" || c.model.kind == "tabular" || c.model.kind == "two_target" ||
            c.model.kind == "constant" || c.model.kind == "identity" || c.model.kind == "table",
        "config.model.kind: expected one of random, tabular, two_target, constant, identity, "
        "table");
  if (c.model.kind == "random") check(c.model.seed >= 1, "config.model.seed: must be positive");
  if (c.model.kind == "tabular") {
    check(c.model.seed >= 1, "config.model.seed: must be positive");
    check(c.model.resolution >= 1, "config.model.resolution: must be at least 1");
  }
  check(c.model.kernel_blend >= 0.0 && c.model.kernel_blend <= 1.0,
        "config.model.kernel_blend: must lie in [0,1]");
  if (c.model.kind == "two_target")
    check(c.model.n_states == 2 && c.model.n_actions == 2,
          "config.model: kind two_target is a 2-state 2-action model; set n_states and "
          "n_actions to 2");

  check(c.learner.mode == "coordinated" || c.learner.mode == "independent-infinite" ||
            c.learner.mode == "independent-finite",
        "config.learner.mode: expected one of coordinated, independent-infinite, "
        "independent-finite");
  check(c.learner.basis == "moment" || c.learner.basis == "indicator",
        "config.learner.basis: expected moment or indicator");
  check(c.learner.moment_degree == 1 || c.learner.moment_degree == 2,
        "config.learner.moment_degree: expected 1 or 2");
  check(c.learner.training_resolution >= 1,
        "config.learner.training_resolution: must be at least 1");
  check(c.learner.steps >= 1, "config.learner.steps: must be positive");
  check(c.learner.eps_floor > 0.0 && c.learner.eps_floor < 1.0,
        "config.learner.eps_floor: must lie in (0,1)");
  check(c.learner.n_agents >= 1, "config.learner.n_agents: must be positive");
  check(c.learner.convergence_threshold > 0.0,
        "config.learner.convergence_threshold: must be positive");

  for (std::size_t i = 0; i < c.scenarios.size(); ++i) {
    const ScenarioSpec& s = c.scenarios[i];
    const std::string path = "config.scenarios[" + std::to_string(i) + "]";
    check(s.kind == "pair" || s.kind == "example", path + ".kind: expected pair or example");
    check(s.n_states >= 2, path + ".n_states: need at least 2 states");
    check(s.n_actions >= 1, path + ".n_actions: need at least 1 action");
    check(s.kernel_blend >= 0.0 && s.kernel_blend <= 1.0,
          path + ".kernel_blend: must lie in [0,1]");
    check(s.eps >= 0.0 && s.eps <= 1.0, path + ".eps: must lie in [0,1]");
    check(s.n_agents >= 0, path + ".n_agents: must be nonnegative (0 = infinite)");
    check(s.mc_reps >= 2, path + ".mc_reps: need at least 2 for a standard error");
    check(s.mn_reps >= 2, path + ".mn_reps: need at least 2 for a standard error");
  }

  if (!c.mu0.empty()) {
    check(static_cast<int>(c.mu0.size()) == c.model.n_states,
          "config.mu0: length must equal model.n_states");
    try {
      Measure probe(c.mu0);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config.mu0: ") + e.what());
    }
  }
}

/// Instantiate the configured model. Table-driven kinds go through the
/// affine assembler so they carry exact constants like the named galleries.
inline GalleryModel build_gallery_model(const ModelSpec& m) {
  const int n = m.n_states;
  const int nu = m.n_actions;
  auto cost_from_spec = [&]() {
    CostSpec cs;
    if (m.cost_base.empty()) {
      cs.base.assign(static_cast<std::size_t>(n * nu), 1.0);
    } else if (m.cost_base.size() == 1) {
      cs.base.assign(static_cast<std::size_t>(n * nu), m.cost_base.front());
    } else if (m.cost_base.size() == static_cast<std::size_t>(n * nu)) {
      cs.base = m.cost_base;
    } else {
      throw ConfigError("config.model.cost_base: expected 1 or n_states*n_actions entries");
    }
    if (m.cost_slope.empty()) {
      cs.slope.assign(static_cast<std::size_t>(n * nu * n), 0.0);
    } else if (m.cost_slope.size() == static_cast<std::size_t>(n * nu * n)) {
      cs.slope = m.cost_slope;
    } else {
      throw ConfigError(
          "config.model.cost_slope: expected n_states*n_actions*n_states entries or none");
    }
    return cs;
  };
  auto row_measure = [&](const std::vector<double>& w, const std::string& which) {
    try {
      return Measure(w);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config.model." + which + ": " + e.what());
    }
  };

  if (m.kind == "random") return gallery_random(m.seed, n, nu, m.kernel_blend, m.smooth_cost);
  if (m.kind == "tabular") return gallery_tabular(m.seed, n, nu, m.resolution);
  if (m.kind == "two_target") {
    try {
      return gallery_two_target(m.eq_tol, m.penalty);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config.model: ") + e.what());
    }
  }
  if (m.kind == "constant") {
    const Measure row = m.row.empty() ? Measure::uniform(n)
                                      : row_measure(m.row, "row");
    if (row.size() != n) throw ConfigError("config.model.row: length must equal n_states");
    return gallery_constant(n, nu, row, cost_from_spec());
  }
  if (m.kind == "identity") return gallery_identity(n, nu, cost_from_spec());
  if (m.kind == "table") {
    if (static_cast<int>(m.cost_table.size()) != n ||
        static_cast<int>(m.kernel_table.size()) != n)
      throw ConfigError("config.model: kind table needs cost_table and kernel_table with one "
                        "entry per state");
    KernelSpec ks;
    ks.blend = 0.0;
    CostSpec cs;
    for (int x = 0; x < n; ++x) {
      if (static_cast<int>(m.cost_table[static_cast<std::size_t>(x)].size()) != nu ||
          static_cast<int>(m.kernel_table[static_cast<std::size_t>(x)].size()) != nu)
        throw ConfigError("config.model: table entries need one value per action");
      for (int u = 0; u < nu; ++u) {
        cs.base.push_back(m.cost_table[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)]);
        ks.anchor.push_back(row_measure(
            m.kernel_table[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)],
            "kernel_table[" + std::to_string(x) + "][" + std::to_string(u) + "]"));
        if (ks.anchor.back().size() != n)
          throw ConfigError("config.model.kernel_table: rows must have n_states entries");
      }
    }
    cs.slope.assign(static_cast<std::size_t>(n * nu * n), 0.0);
    for (int i = 0; i < n * nu * n; ++i) ks.directions.push_back(Measure::uniform(n));
    return make_affine_gallery_model(n, nu, "table", std::move(ks), std::move(cs));
  }
  throw ConfigError("config.model.kind: unknown kind " + m.kind);
}

/// Resolve a policy spec against the model dimensions.
inline StatePolicy build_policy(const PolicySpec& p, int n_states, int n_actions,
                                const std::string& path = "config.policy") {
  if (p.kind == "uniform") return uniform_policy(n_states, n_actions);
  if (p.kind == "deterministic") {
    if (static_cast<int>(p.actions.size()) != n_states)
      throw ConfigError(path + ".actions: expected one action per state");
    for (int a : p.actions)
      if (a < 0 || a >= n_actions)
        throw ConfigError(path + ".actions: entries must lie in [0, n_actions)");
    return deterministic_policy(p.actions, n_actions);
  }
  if (p.kind == "mixture") {
    if (p.parts.empty() || p.parts.size() != p.weights.size())
      throw ConfigError(path + ": mixture needs matching parts and weights");
    std::vector<StatePolicy> parts;
    for (std::size_t i = 0; i < p.parts.size(); ++i)
      parts.push_back(build_policy(p.parts[i], n_states, n_actions,
                                   path + ".parts[" + std::to_string(i) + "]"));
    try {
      return mix_policies(parts, Measure(p.weights));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path + ".weights: " + e.what());
    }
  }
  throw ConfigError(path + ".kind: expected uniform, deterministic or mixture");
}

/// Start measure: explicit mu0 or uniform.
inline Measure initial_measure(const ExperimentConfig& c) {
  if (c.mu0.empty()) return Measure::uniform(c.model.n_states);
  return Measure(c.mu0);
}

/**
 * Deterministic allocation of n_agents to states approximating mu0: floor
 * shares first, then the largest remainders win the leftover agents (ties to
 * the lower state index). Keeps finite starts reproducible without a draw.
 */
inline std::vector<int> allocate_population(const Measure& mu0, int n_agents) {
  if (n_agents < 1) throw std::invalid_argument("allocate_population: need agents");
  const int n = mu0.size();
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  std::vector<std::pair<double, int>> remainders;
  int placed = 0;
  for (int i = 0; i < n; ++i) {
    const double share = mu0[i] * n_agents;
    counts[static_cast<std::size_t>(i)] = static_cast<int>(share);
    placed += counts[static_cast<std::size_t>(i)];
    remainders.push_back({share - counts[static_cast<std::size_t>(i)], i});
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int k = 0; k < n_agents - placed; ++k)
    ++counts[static_cast<std::size_t>(remainders[static_cast<std::size_t>(k)].second)];
  std::vector<int> pop;
  pop.reserve(static_cast<std::size_t>(n_agents));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < counts[static_cast<std::size_t>(i)]; ++k) pop.push_back(i);
  return pop;
}

}  // namespace mfc

#endif  // MFC_CONFIG_HPP
