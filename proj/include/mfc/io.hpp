#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mfc/config.hpp"
#include "mfc/eval.hpp"
#include "mfc/linear_model.hpp"
#include "mfc/model.hpp"
#include "mfc/plan.hpp"
#include "mfc/simplex_grid.hpp"

namespace mfc {
namespace io {

/// FNV-1a, 64 bit: stable across platforms, good enough to fingerprint a
/// resolved config (this is provenance, not security).
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

/**
 * Fingerprint of the resolved config closure, excluding the output
 * directory: the same experiment written to two locations produces
 * byte-identical files, which is what reproducibility checks compare.
 */
inline std::string config_hash(const ExperimentConfig& cfg) {
  ConfigJson j = to_json(cfg);
  j.erase("out_dir");
  return hex64(fnv1a64(j.dump()));
}

/// Shortest exact decimal for a double (17 significant digits).
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

inline std::string dump_json(const ConfigJson& j) { return j.dump(2) + "\n"; }

/// Every JSON artifact starts with these two keys so any file can be traced
/// back to its exact configuration.
inline ConfigJson provenance_json(const ExperimentConfig& cfg) {
  ConfigJson j;
  j["config_hash"] = config_hash(cfg);
  j["root_seed"] = cfg.root_seed;
  return j;
}

/// CSV counterpart: a single comment line before the header.
inline std::string csv_provenance(const ExperimentConfig& cfg) {
  return "# config_hash=" + config_hash(cfg) + " root_seed=" + std::to_string(cfg.root_seed) +
         "\n";
}

inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ",";
    out += cells[i];
  }
  out += "\n";
  return out;
}

inline ConfigJson measure_json(const Measure& mu) {
  ConfigJson a = ConfigJson::array();
  for (int i = 0; i < mu.size(); ++i) a.push_back(mu[i]);
  return a;
}

inline ConfigJson constants_json(const ModelConstants& k) {
  ConfigJson j;
  j["k_f"] = k.k_f;
  j["k_c"] = k.k_c;
  j["c_sup"] = k.c_sup;
  j["delta_t"] = k.delta_t;
  j["c_const"] = k.c_const();
  j["k_const"] = k.k_const();
  return j;
}

inline ConfigJson linear_model_json(const LinearModel& lm) {
  ConfigJson j;
  j["n_states"] = lm.n_states;
  j["n_actions"] = lm.n_actions;
  j["basis"] = lm.basis.name;
  j["dimension"] = lm.basis.dimension;
  j["learned"] = lm.learned;
  j["rank_deficient"] = lm.rank_deficient;
  ConfigJson theta = ConfigJson::array();
  ConfigJson q = ConfigJson::array();
  for (int xu = 0; xu < lm.pair_count(); ++xu) {
    const auto& th = lm.theta[static_cast<std::size_t>(xu)];
    ConfigJson trow = ConfigJson::array();
    for (int i = 0; i < th.size(); ++i) trow.push_back(th[i]);
    theta.push_back(std::move(trow));
    const auto& qm = lm.q[static_cast<std::size_t>(xu)];
    ConfigJson qrows = ConfigJson::array();
    for (int i = 0; i < qm.rows(); ++i) {
      ConfigJson qr = ConfigJson::array();
      for (int c = 0; c < qm.cols(); ++c) qr.push_back(qm(i, c));
      qrows.push_back(std::move(qr));
    }
    q.push_back(std::move(qrows));
  }
  j["theta"] = std::move(theta);
  j["q"] = std::move(q);
  return j;
}

inline ConfigJson value_function_json(const SimplexGrid& grid, const PlanResult& plan) {
  ConfigJson j;
  j["grid_size"] = grid.size();
  j["bellman_residual"] = plan.value.bellman_residual;
  j["worst_projection"] = plan.worst_projection;
  j["sweeps"] = plan.sweeps;
  ConfigJson bins = ConfigJson::array();
  for (int b = 0; b < grid.size(); ++b) {
    ConfigJson e;
    e["rep"] = measure_json(grid.reps[static_cast<std::size_t>(b)]);
    e["value"] = plan.value.values[static_cast<std::size_t>(b)];
    bins.push_back(std::move(e));
  }
  j["bins"] = std::move(bins);
  return j;
}

inline ConfigJson policy_json(const SimplexGrid& grid, const PolicyCandidateSet& candidates,
                              const MeasurePolicy& policy) {
  ConfigJson j;
  j["grid_size"] = grid.size();
  j["candidates"] = candidates.size();
  ConfigJson bins = ConfigJson::array();
  for (int b = 0; b < grid.size(); ++b) {
    const int choice = policy.choice[static_cast<std::size_t>(b)];
    const StatePolicy& gamma = candidates.policies[static_cast<std::size_t>(choice)];
    ConfigJson e;
    e["rep"] = measure_json(grid.reps[static_cast<std::size_t>(b)]);
    e["choice"] = choice;
    ConfigJson rows = ConfigJson::array();
    for (const Measure& row : gamma.rows) rows.push_back(measure_json(row));
    e["rows"] = std::move(rows);
    bins.push_back(std::move(e));
  }
  j["bins"] = std::move(bins);
  return j;
}

inline ConfigJson execution_report_json(const ExecutionReport& r) {
  ConfigJson j;
  j["scenario"] = r.scenario;
  j["open_loop"] = r.open_loop;
  j["n_agents"] = r.n_agents;
  j["realized_cost"] = r.realized_cost;
  j["realized_stderr"] = r.realized_stderr;
  j["reference_cost"] = r.reference_cost;
  j["composite_reference"] = r.composite_reference;
  j["gap"] = r.gap;
  j["bound"] = r.bound;
  j["lambda"] = r.lambda;
  j["c_const"] = r.c_const;
  j["k_const"] = r.k_const;
  j["beta"] = r.beta;
  j["m_n"] = r.m_n;
  j["m_n_state"] = r.m_n_state;
  j["m_n_joint"] = r.m_n_joint;
  j["truncation_addendum"] = r.truncation_addendum;
  j["discretization_addendum"] = r.discretization_addendum;
  j["mc_addendum"] = r.mc_addendum;
  j["composite_addendum"] = r.composite_addendum;
  j["verdict"] = r.verdict;
  return j;
}

/// One row per scenario; the header names the exact inequality inputs.
inline std::string verdicts_csv_header() {
  return "scenario,open_loop,n_agents,lambda,beta,gap,bound,truncation_addendum,"
         "discretization_addendum,mc_addendum,composite_addendum,verdict\n";
}

inline std::string verdicts_csv_row(const ExecutionReport& r) {
  return csv_row({r.scenario, r.open_loop ? "1" : "0", std::to_string(r.n_agents),
                  format_g17(r.lambda), format_g17(r.beta), format_g17(r.gap),
                  format_g17(r.bound), format_g17(r.truncation_addendum),
                  format_g17(r.discretization_addendum), format_g17(r.mc_addendum),
                  format_g17(r.composite_addendum), r.verdict ? "1" : "0"});
}

}  // namespace io
}  // namespace mfc
