// Command-line front end: selects a model, policy, learner or scenario batch
// from a JSON config file and persists every artifact with the resolved
// config hash and root seed, so a rerun with the same config and seed
// reproduces each output byte for byte.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "mfc/basis.hpp"
#include "mfc/bounds.hpp"
#include "mfc/config.hpp"
#include "mfc/eval.hpp"
#include "mfc/gallery.hpp"
#include "mfc/io.hpp"
#include "mfc/learn.hpp"
#include "mfc/model.hpp"
#include "mfc/plan.hpp"
#include "mfc/policy.hpp"
#include "mfc/population.hpp"
#include "mfc/rng.hpp"
#include "mfc/simplex_grid.hpp"

namespace {

using mfc::ConfigJson;

struct ResolvedModel {
  mfc::GalleryModel gallery;
  mfc::ModelConstants constants;
  bool exact = false;
};

/// Analytic constants when the gallery provides them, grid maxima otherwise.
/// Grid maxima are lower estimates; they steer horizons and reports but are
/// not certificates, and the constants output says which kind it holds.
ResolvedModel resolve_model(const mfc::ExperimentConfig& cfg) {
  ResolvedModel rm;
  rm.gallery = mfc::build_gallery_model(cfg.model);
  if (rm.gallery.analytic) {
    rm.constants = *rm.gallery.analytic;
    rm.exact = true;
  } else {
    const mfc::SimplexGrid grid =
        mfc::build_grid(cfg.model.n_states, std::max(cfg.grid_resolution, 2));
    rm.constants = mfc::estimate_constants(rm.gallery.model, grid);
  }
  return rm;
}

int resolve_horizon(const mfc::ExperimentConfig& cfg, double c_sup) {
  if (cfg.horizon > 0) return cfg.horizon;
  return mfc::horizon_for(cfg.beta, c_sup, cfg.trunc_tol);
}

std::filesystem::path out_path(const mfc::ExperimentConfig& cfg, const std::string& name) {
  return std::filesystem::path(cfg.out_dir) / name;
}

int cmd_constants(const mfc::ExperimentConfig& cfg) {
  const ResolvedModel rm = resolve_model(cfg);
  ConfigJson j = mfc::io::provenance_json(cfg);
  j["model"] = rm.gallery.model.name;
  j["n_states"] = rm.gallery.model.n_states;
  j["n_actions"] = rm.gallery.model.n_actions;
  j["exact"] = rm.exact;
  j["constants"] = mfc::io::constants_json(rm.constants);
  const double beta_k = cfg.beta * rm.constants.k_const();
  j["beta"] = cfg.beta;
  j["beta_k"] = beta_k;
  if (beta_k < 1.0)
    j["value_lipschitz_certificate"] = mfc::lip_value_certificate(rm.constants, cfg.beta);
  else
    j["value_lipschitz_certificate"] = nullptr;
  mfc::io::write_text_file(out_path(cfg, "constants.json"), mfc::io::dump_json(j));
  std::cout << "constants: model=" << rm.gallery.model.name
            << " C=" << rm.constants.c_const() << " K=" << rm.constants.k_const()
            << " beta*K=" << beta_k << (rm.exact ? " (exact)" : " (grid estimate)") << "\n";
  return 0;
}

int cmd_simulate(const mfc::ExperimentConfig& cfg) {
  const ResolvedModel rm = resolve_model(cfg);
  const mfc::FiniteMFCModel& model = rm.gallery.model;
  const mfc::StatePolicy gamma =
      mfc::build_policy(cfg.policy, model.n_states, model.n_actions);
  const mfc::AgentPolicy agent = mfc::as_agent_policy(gamma);
  const mfc::Measure mu0 = mfc::initial_measure(cfg);
  const int horizon = resolve_horizon(cfg, rm.constants.c_sup);

  std::string flow_csv = mfc::io::csv_provenance(cfg);
  flow_csv += "t";
  for (int i = 0; i < model.n_states; ++i) flow_csv += ",mu_" + std::to_string(i);
  flow_csv += ",stage_cost,discounted_total\n";
  mfc::Measure mu = mu0;
  double disc = 1.0;
  double infinite_total = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const double cost = mfc::stage_cost_infinite(model, mu, gamma);
    infinite_total += disc * cost;
    std::vector<std::string> cells{std::to_string(t)};
    for (int i = 0; i < model.n_states; ++i) cells.push_back(mfc::io::format_g17(mu[i]));
    cells.push_back(mfc::io::format_g17(cost));
    cells.push_back(mfc::io::format_g17(infinite_total));
    flow_csv += mfc::io::csv_row(cells);
    mu = mfc::mean_field_step(model, mu, gamma);
    disc *= cfg.beta;
  }
  mfc::io::write_text_file(out_path(cfg, "flow_infinite.csv"), flow_csv);

  ConfigJson summary = mfc::io::provenance_json(cfg);
  summary["model"] = model.name;
  summary["policy"] = cfg.policy.kind;
  summary["beta"] = cfg.beta;
  summary["horizon"] = horizon;
  summary["truncation_tail"] = mfc::truncation_tail(cfg.beta, rm.constants.c_sup, horizon);
  summary["infinite_cost"] = infinite_total;
  std::cout << "simulate: horizon " << horizon << ", infinite-population cost "
            << infinite_total << "\n";

  ConfigJson finite = ConfigJson::array();
  for (int n_agents : cfg.agent_counts) {
    const std::vector<int> pop0 = mfc::allocate_population(mu0, n_agents);
    std::vector<std::vector<double>> mu_sum(
        static_cast<std::size_t>(horizon),
        std::vector<double>(static_cast<std::size_t>(model.n_states), 0.0));
    double total_sum = 0.0, total_sumsq = 0.0;
    for (int rep = 0; rep < cfg.replications; ++rep) {
      mfc::RngStream rng(cfg.root_seed, static_cast<std::uint64_t>(rep));
      std::vector<int> states = pop0;
      double d = 1.0, total = 0.0;
      for (int t = 0; t < horizon; ++t) {
        const mfc::Measure emp = mfc::empirical_from_states(states, model.n_states);
        for (int i = 0; i < model.n_states; ++i)
          mu_sum[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] += emp[i];
        mfc::StepResult step = mfc::step_finite(model, states, agent, rng);
        total += d * step.stage_cost;
        d *= cfg.beta;
        states = std::move(step.next_states);
      }
      total_sum += total;
      total_sumsq += total * total;
    }
    const double reps = static_cast<double>(cfg.replications);
    const double mean = total_sum / reps;
    const double var = std::max(0.0, (total_sumsq - reps * mean * mean) / (reps - 1.0));
    const double se = cfg.replications > 1 ? std::sqrt(var / reps) : 0.0;

    std::string csv = mfc::io::csv_provenance(cfg);
    csv += "t";
    for (int i = 0; i < model.n_states; ++i) csv += ",mean_mu_" + std::to_string(i);
    csv += "\n";
    for (int t = 0; t < horizon; ++t) {
      std::vector<std::string> cells{std::to_string(t)};
      for (int i = 0; i < model.n_states; ++i)
        cells.push_back(mfc::io::format_g17(
            mu_sum[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] / reps));
      csv += mfc::io::csv_row(cells);
    }
    mfc::io::write_text_file(out_path(cfg, "finite_N" + std::to_string(n_agents) + ".csv"),
                             csv);

    ConfigJson e;
    e["n_agents"] = n_agents;
    e["replications"] = cfg.replications;
    e["mean_cost"] = mean;
    e["stderr"] = se;
    finite.push_back(std::move(e));
    std::cout << "simulate: N=" << n_agents << " mean cost " << mean << " (se " << se
              << ", " << cfg.replications << " reps)\n";
  }
  summary["finite"] = std::move(finite);
  mfc::io::write_text_file(out_path(cfg, "summary.json"), mfc::io::dump_json(summary));
  return 0;
}

int cmd_plan(const mfc::ExperimentConfig& cfg) {
  const ResolvedModel rm = resolve_model(cfg);
  const mfc::FiniteMFCModel& model = rm.gallery.model;
  const mfc::SimplexGrid grid = mfc::build_grid(model.n_states, cfg.grid_resolution);
  const mfc::PolicyCandidateSet candidates =
      mfc::candidate_policies(model.n_states, model.n_actions, cfg.mixture_resolution);
  const mfc::PlanResult plan =
      mfc::value_iteration(model, grid, candidates, cfg.beta, cfg.plan_tol);

  ConfigJson v = mfc::io::provenance_json(cfg);
  v["model"] = model.name;
  v["beta"] = cfg.beta;
  v["plan_tol"] = cfg.plan_tol;
  v["grid_resolution"] = cfg.grid_resolution;
  v["mixture_resolution"] = cfg.mixture_resolution;
  v.update(mfc::io::value_function_json(grid, plan));
  mfc::io::write_text_file(out_path(cfg, "value_function.json"), mfc::io::dump_json(v));

  ConfigJson p = mfc::io::provenance_json(cfg);
  p["model"] = model.name;
  p.update(mfc::io::policy_json(grid, candidates, plan.policy));
  mfc::io::write_text_file(out_path(cfg, "policy.json"), mfc::io::dump_json(p));

  std::cout << "plan: " << grid.size() << " bins, " << candidates.size() << " candidates, "
            << plan.sweeps << " sweeps, bellman residual " << plan.value.bellman_residual
            << ", worst projection " << plan.worst_projection << "\n";
  return 0;
}

/// Max-abs distance to the gallery's known coefficients when the fitted
/// basis matches the representation the truth is stated in.
std::optional<double> truth_error(const mfc::GalleryModel& g, const mfc::LinearModel& lm) {
  if (g.theta_truth.empty() || g.q_truth.empty()) return std::nullopt;
  const int dim = lm.basis.dimension;
  if (static_cast<int>(g.theta_truth.front().size()) != dim) return std::nullopt;
  double worst = 0.0;
  for (int xu = 0; xu < lm.pair_count(); ++xu) {
    const auto& th = g.theta_truth[static_cast<std::size_t>(xu)];
    const auto& qt = g.q_truth[static_cast<std::size_t>(xu)];
    for (int f = 0; f < dim; ++f) {
      worst = std::max(worst, std::abs(lm.theta[static_cast<std::size_t>(xu)][f] -
                                       th[static_cast<std::size_t>(f)]));
      for (int y = 0; y < lm.n_states; ++y)
        worst = std::max(worst, std::abs(lm.q[static_cast<std::size_t>(xu)](f, y) -
                                         qt[static_cast<std::size_t>(f)][static_cast<std::size_t>(y)]));
    }
  }
  return worst;
}

/// Uniform plus one deterministic component per action: every pair is
/// explorable under the floor regardless of the model.
mfc::ExplorationScheme default_scheme(int n_states, int n_actions, bool common_randomness) {
  std::vector<mfc::StatePolicy> comps;
  comps.push_back(mfc::uniform_policy(n_states, n_actions));
  for (int u = 0; u < n_actions; ++u)
    comps.push_back(mfc::deterministic_policy(
        std::vector<int>(static_cast<std::size_t>(n_states), u), n_actions));
  return mfc::ExplorationScheme(std::move(comps),
                                mfc::Measure::uniform(n_actions + 1), common_randomness);
}

int cmd_learn(const mfc::ExperimentConfig& cfg) {
  const ResolvedModel rm = resolve_model(cfg);
  const mfc::FiniteMFCModel& model = rm.gallery.model;
  const mfc::LearnerSpec& spec = cfg.learner;
  const mfc::SimplexGrid train_grid =
      mfc::build_grid(model.n_states, spec.training_resolution);
  const mfc::BasisFamily basis = spec.basis == "moment"
                                     ? mfc::moment_basis(model.n_states, spec.moment_degree)
                                     : mfc::indicator_basis(train_grid);

  ConfigJson report = mfc::io::provenance_json(cfg);
  report["model"] = model.name;
  report["mode"] = spec.mode;
  report["basis"] = basis.name;

  if (spec.mode == "coordinated") {
    const mfc::TrainingSet ts = mfc::make_training_set(model, train_grid.reps);
    const auto [lm, fit] = mfc::coordinated_least_squares(ts, basis);
    ConfigJson m = mfc::io::provenance_json(cfg);
    m.update(mfc::io::linear_model_json(lm));
    mfc::io::write_text_file(out_path(cfg, "linear_model.json"), mfc::io::dump_json(m));

    double max_cost_rms = 0.0, max_kernel_rms = 0.0;
    for (double v : fit.cost_residual_rms) max_cost_rms = std::max(max_cost_rms, v);
    for (double v : fit.kernel_residual_rms) max_kernel_rms = std::max(max_kernel_rms, v);
    report["samples"] = train_grid.size();
    report["max_cost_residual_rms"] = max_cost_rms;
    report["max_kernel_residual_rms"] = max_kernel_rms;
    report["rank_deficient_pairs"] =
        static_cast<int>(std::count(fit.rank_deficient.begin(), fit.rank_deficient.end(), 1));
    const std::optional<double> err = truth_error(rm.gallery, lm);
    if (err)
      report["truth_max_abs_error"] = *err;
    else
      report["truth_max_abs_error"] = nullptr;
    mfc::io::write_text_file(out_path(cfg, "learn_report.json"), mfc::io::dump_json(report));
    std::cout << "learn: coordinated ls on " << train_grid.size()
              << " population samples, max cost rms " << max_cost_rms
              << ", max kernel rms " << max_kernel_rms;
    if (err) std::cout << ", truth max abs error " << *err;
    std::cout << "\n";
    return 0;
  }

  const mfc::ExplorationScheme scheme =
      default_scheme(model.n_states, model.n_actions, spec.common_randomness);
  const mfc::Measure mu0 = mfc::initial_measure(cfg);
  mfc::LearnReport lr;
  if (spec.mode == "independent-infinite") {
    lr = mfc::independent_learn_infinite(model, basis, scheme, spec.steps, mu0,
                                         spec.eps_floor, cfg.root_seed,
                                         spec.convergence_threshold);
  } else {
    const std::vector<int> pop0 = mfc::allocate_population(mu0, spec.n_agents);
    lr = mfc::independent_learn_finite(model, basis, scheme, spec.n_agents, spec.steps, pop0,
                                       spec.eps_floor, cfg.root_seed,
                                       spec.convergence_threshold);
  }

  ConfigJson m = mfc::io::provenance_json(cfg);
  m.update(mfc::io::linear_model_json(lr.model));
  mfc::io::write_text_file(out_path(cfg, "linear_model.json"), mfc::io::dump_json(m));

  report["steps"] = spec.steps;
  report["eps_floor"] = spec.eps_floor;
  report["common_randomness"] = spec.common_randomness;
  if (spec.mode == "independent-finite") report["n_agents"] = spec.n_agents;
  report["converged"] = lr.converged;
  report["param_change"] = lr.param_change;
  report["final_cost_residual"] = lr.final_cost_residual;
  report["final_kernel_residual"] = lr.final_kernel_residual;
  report["visits"] = lr.visits;
  report["unlearned_pairs"] =
      static_cast<int>(std::count(lr.unlearned.begin(), lr.unlearned.end(), 1));
  report["mu0_trace_autocorr"] = lr.mu0_trace_autocorr;
  double max_cost_rms = 0.0, max_kernel_rms = 0.0;
  for (const auto& b : lr.baselines) {
    max_cost_rms = std::max(max_cost_rms, b.cost_rms);
    max_kernel_rms = std::max(max_kernel_rms, b.kernel_rms);
  }
  report["max_baseline_cost_rms"] = max_cost_rms;
  report["max_baseline_kernel_rms"] = max_kernel_rms;
  mfc::io::write_text_file(out_path(cfg, "learn_report.json"), mfc::io::dump_json(report));

  std::string curve = mfc::io::csv_provenance(cfg);
  curve += "step,residual,param_delta\n";
  for (const auto& row : lr.curve) {
    std::vector<std::string> cells;
    cells.push_back(std::to_string(static_cast<long long>(row[0])));
    for (std::size_t i = 1; i < row.size(); ++i)
      cells.push_back(mfc::io::format_g17(row[i]));
    curve += mfc::io::csv_row(cells);
  }
  mfc::io::write_text_file(out_path(cfg, "learning_curve.csv"), curve);

  std::cout << "learn: " << spec.mode << " for " << spec.steps << " steps, converged "
            << (lr.converged ? "yes" : "no") << ", cost residual " << lr.final_cost_residual
            << ", kernel residual " << lr.final_kernel_residual << "\n";
  return 0;
}

int cmd_reproduce_example(const mfc::ExperimentConfig& cfg) {
  const int horizon = cfg.horizon > 0 ? cfg.horizon : 64;
  const mfc::DecentralizationCosts costs =
      mfc::reproduce_decentralization_example(cfg.beta, horizon);
  const double closed_form = 10.0 * cfg.beta / (1.0 - cfg.beta);
  ConfigJson j = mfc::io::provenance_json(cfg);
  j["beta"] = cfg.beta;
  j["horizon"] = horizon;
  j["coordinated_mixture"] = costs.coordinated_mixture;
  j["coordinated_all_zero"] = costs.coordinated_all_zero;
  j["uncoordinated"] = costs.uncoordinated;
  j["uncoordinated_closed_form"] = closed_form;
  mfc::io::write_text_file(out_path(cfg, "example.json"), mfc::io::dump_json(j));
  std::cout << "example: coordinated costs " << costs.coordinated_mixture << " and "
            << costs.coordinated_all_zero << ", uncoordinated " << costs.uncoordinated
            << " (closed form " << closed_form << ")\n";
  return 0;
}

int cmd_verify(const mfc::ExperimentConfig& cfg) {
  if (cfg.scenarios.empty())
    throw mfc::ConfigError("config.scenarios: verify needs at least one scenario");

  ConfigJson reports = ConfigJson::array();
  std::string csv = mfc::io::csv_provenance(cfg);
  csv += mfc::io::verdicts_csv_header();
  bool all_pass = true;

  for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
    const mfc::ScenarioSpec& spec = cfg.scenarios[i];
    const std::string name =
        spec.name.empty() ? spec.kind + "_" + std::to_string(i) : spec.name;

    if (spec.kind == "example") {
      const int horizon = cfg.horizon > 0 ? cfg.horizon : 64;
      const mfc::DecentralizationCosts costs =
          mfc::reproduce_decentralization_example(cfg.beta, horizon);
      const double closed_form = 10.0 * cfg.beta / (1.0 - cfg.beta);
      const double coord_dev =
          std::max(std::abs(costs.coordinated_mixture), std::abs(costs.coordinated_all_zero));
      const double unco_dev = std::abs(costs.uncoordinated - closed_form);
      mfc::ExecutionReport r;
      r.scenario = name;
      r.beta = cfg.beta;
      r.realized_cost = costs.uncoordinated;
      r.reference_cost = closed_form;
      r.gap = std::max(coord_dev, unco_dev);
      r.bound = 1e-6;  // the example is exact; anything beyond rounding fails
      r.verdict = coord_dev < 1e-9 && unco_dev < 1e-6;
      ConfigJson e = mfc::io::execution_report_json(r);
      e["kind"] = "example";
      e["coordinated_mixture"] = costs.coordinated_mixture;
      e["coordinated_all_zero"] = costs.coordinated_all_zero;
      e["uncoordinated"] = costs.uncoordinated;
      e["uncoordinated_closed_form"] = closed_form;
      reports.push_back(std::move(e));
      csv += mfc::io::verdicts_csv_row(r);
      all_pass = all_pass && r.verdict;
      std::cout << "verify " << name << ": coordinated dev " << coord_dev
                << ", uncoordinated dev " << unco_dev << " -> "
                << (r.verdict ? "pass" : "FAIL") << "\n";
      continue;
    }

    const std::uint64_t model_seed =
        spec.seed != 0 ? spec.seed : cfg.root_seed * 1000003ULL + 7919ULL * (i + 1);
    mfc::GalleryPair pair = mfc::gallery_perturbed_pair(
        model_seed, spec.n_states, spec.n_actions, spec.kernel_blend, spec.eps);
    const mfc::ModelConstants constants = *pair.truth.analytic;
    const double beta_k = cfg.beta * constants.k_const();
    if (beta_k >= 1.0)
      throw mfc::ConfigError(
          "config.scenarios[" + std::to_string(i) + "] (" + name + "): beta*K = " +
          std::to_string(beta_k) +
          " >= 1, so the performance bounds are undefined; lower beta or the scenario's "
          "kernel_blend");

    const mfc::SimplexGrid grid = mfc::build_grid(spec.n_states, cfg.grid_resolution);
    mfc::GapScenario s;
    s.name = name;
    s.model_true = pair.truth.model;
    s.model_hat = pair.hat.model;
    s.constants = constants;
    s.lambda = mfc::uniform_mismatch(pair.truth.model, pair.hat.model, grid);
    s.beta = cfg.beta;
    s.open_loop = spec.open_loop;
    s.n_agents = spec.n_agents;
    const mfc::Measure mu0 =
        static_cast<int>(cfg.mu0.size()) == spec.n_states ? mfc::Measure(cfg.mu0)
                                                          : mfc::Measure::uniform(spec.n_states);
    s.mu0 = mu0;
    if (spec.n_agents > 0) s.pop0 = mfc::allocate_population(mu0, spec.n_agents);
    s.grid_resolution = cfg.grid_resolution;
    s.mixture_resolution = cfg.mixture_resolution;
    s.mn_joint_resolution = cfg.mn_joint_resolution;
    s.plan_tol = cfg.plan_tol;
    s.trunc_tol = cfg.trunc_tol;
    s.mc_reps = spec.mc_reps;
    s.mn_reps = spec.mn_reps;
    s.root_seed = cfg.root_seed + 101ULL * (i + 1);
    s.brute_force_cap = cfg.brute_force_cap;
    s.force_zero_bound = spec.force_zero_bound;

    const mfc::ExecutionReport r = mfc::verify_gap_le_bound(s);
    ConfigJson e = mfc::io::execution_report_json(r);
    e["kind"] = "pair";
    e["model_seed"] = model_seed;
    e["eps"] = spec.eps;
    reports.push_back(std::move(e));
    csv += mfc::io::verdicts_csv_row(r);
    all_pass = all_pass && r.verdict;
    const double rhs = r.bound + r.truncation_addendum + r.discretization_addendum +
                       r.mc_addendum + r.composite_addendum;
    std::cout << "verify " << name << ": gap " << r.gap << " vs bound+addenda " << rhs
              << " -> " << (r.verdict ? "pass" : "FAIL") << "\n";
  }

  ConfigJson j = mfc::io::provenance_json(cfg);
  j["scenario_count"] = static_cast<int>(cfg.scenarios.size());
  j["all_pass"] = all_pass;
  j["reports"] = std::move(reports);
  mfc::io::write_text_file(out_path(cfg, "reports.json"), mfc::io::dump_json(j));
  mfc::io::write_text_file(out_path(cfg, "verdicts.csv"), csv);
  std::cout << "verify: " << (all_pass ? "all scenarios pass" : "at least one scenario FAILED")
            << "\n";
  return all_pass ? 0 : 1;
}

struct CommonArgs {
  std::string config_path;
  std::int64_t seed = -1;
  std::string out_dir;
  bool print_config = false;
};

mfc::ExperimentConfig resolve_config(const CommonArgs& args) {
  mfc::ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = mfc::load_config(args.config_path);
  if (args.seed >= 0) cfg.root_seed = static_cast<std::uint64_t>(args.seed);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  mfc::validate_config(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete-time mean-field control: simulate, learn, plan, verify"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&args](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "experiment config file (JSON)");
    sub->add_option("--seed", args.seed, "override the root seed");
    sub->add_option("--out", args.out_dir, "override the output directory");
    sub->add_flag("--print-config", args.print_config,
                  "print the resolved config closure and exit");
  };

  CLI::App* simulate = app.add_subcommand(
      "simulate", "exact limiting flow and finite-team rollouts under a fixed policy");
  CLI::App* learn =
      app.add_subcommand("learn", "fit a linear surrogate model from transitions");
  CLI::App* plan = app.add_subcommand(
      "plan", "value iteration on the discretized population state");
  CLI::App* verify = app.add_subcommand(
      "verify", "run scenario batches and check performance gaps against their bounds");
  CLI::App* constants =
      app.add_subcommand("constants", "report the model's regularity constants");
  CLI::App* example = app.add_subcommand(
      "reproduce-example", "the two-target coordination example and its closed form");
  for (CLI::App* sub : {simulate, learn, plan, verify, constants, example}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const mfc::ExperimentConfig cfg = resolve_config(args);
    if (args.print_config) {
      std::cout << mfc::io::dump_json(mfc::to_json(cfg));
      return 0;
    }
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (learn->parsed()) return cmd_learn(cfg);
    if (plan->parsed()) return cmd_plan(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    if (constants->parsed()) return cmd_constants(cfg);
    if (example->parsed()) return cmd_reproduce_example(cfg);
    return 2;
  } catch (const mfc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
