#include "hinfcon/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hinfcon {

using nlohmann::json;

std::string SynthesisOutcome::gains_json() const {
  if (!gains) return "{}";
  return gains_to_json(*gains);
}

std::string SynthesisOutcome::summary_json() const {
  json out;
  out["mode"] = mode == SynthesisMode::LocalTheorem2 ? "local" : "global";
  out["status"] = to_string(report.status);
  out["margin"] = report.margin;
  out["eps_feas"] = report.eps_feas_used;
  out["newton_iterations"] = report.iterations;
  if (gains) {
    out["certified_gamma2"] = gains->certified_gamma2;
    out["xy_residual"] = gains->xy_residual;
  }
  if (deviations) {
    out["deviations_pass"] = deviations->all_pass();
    out["max_L_deviation"] = deviations->max_l_deviation();
    out["max_K_deviation"] = deviations->max_k_deviation();
  }
  if (dissipation) {
    out["dissipation_pass"] = dissipation->pass();
    out["dissipation_epsilon"] = dissipation->epsilon;
    json lm = json::array();
    for (double v : dissipation->lambda_max) lm.push_back(v);
    out["dissipation_lambda_max"] = lm;
  }
  return out.dump(2);
}

SynthesisOutcome run_synthesis(const ProblemConfig& cfg, SynthesisMode mode) {
  SynthesisOutcome out;
  out.mode = mode;
  LmiAssembler assembler(cfg.plant, cfg.measurements, cfg.channels, cfg.network,
                         cfg.budget, mode);
  LmiProblem problem = assembler.build();
  out.report = mode == SynthesisMode::LocalTheorem2
                   ? solve_rank_constrained(problem, cfg.solver)
                   : solve_feasibility(problem, cfg.solver);
  if (!out.report.feasible()) return out;

  GainSet gains = global_gains(assembler, out.report.solution, cfg.simulation.m0);
  if (mode == SynthesisMode::LocalTheorem2) {
    localize_gains(gains, cfg.network);
    out.deviations = deviation_bounds(gains, cfg.network, cfg.budget);
  } else {
    // global-state broadcast: the local tables coincide with the global ones
    // only when every conditioning set is a singleton; not derived here.
  }
  out.dissipation = verify_dissipation(
      cfg.plant, cfg.measurements, cfg.channels, cfg.network, cfg.budget,
      assembler, out.report.solution, gains,
      mode == SynthesisMode::LocalTheorem2, 1000, cfg.simulation.seed);
  out.gains = std::move(gains);
  return out;
}

DetectOutcome run_detect(const ProblemConfig& cfg) {
  try {
    DetectOutcome out;
    out.theorem3 = check_theorem3(cfg.plant, cfg.network, cfg.measurements,
                                  cfg.channels);
    out.theorem4 = check_theorem4(cfg.plant, cfg.network, cfg.measurements,
                                  cfg.channels);
    return out;
  } catch (const std::domain_error& e) {
    throw AssumptionError(e.what());
  }
}

void check_gains_cover(const ProblemConfig& cfg, const GainSet& gains) {
  const int n = cfg.plant.state_dim();
  const auto& net = cfg.network;
  for (int i = 1; i <= net.node_count(); ++i) {
    for (int k = 1; k <= net.global_count(); ++k) {
      auto it = gains.L.find({i, k});
      if (it == gains.L.end())
        throw MismatchError("gains are missing an L entry for node " +
                            std::to_string(i));
      if (it->second.rows() != n ||
          it->second.cols() != cfg.measurements.at(i, k).C.rows())
        throw MismatchError("L dimensions do not match the configuration");
      for (int j : net.in_neighbours(i, k)) {
        auto kit = gains.K.find({i, j, k});
        if (kit == gains.K.end())
          throw MismatchError("gains are missing a K entry for edge (" +
                              std::to_string(i) + "," + std::to_string(j) + ")");
        if (kit->second.rows() != n ||
            kit->second.cols() != cfg.channels.H(i, j).rows())
          throw MismatchError("K dimensions do not match the configuration");
      }
      if (cfg.simulation.mode == GainMode::LocalGains) {
        const int ki = net.mapping().local_state(i, k);
        if (!gains.L_local.count({i, ki}))
          throw MismatchError("local mode needs localized gains (node " +
                              std::to_string(i) + ")");
      }
    }
  }
  if (gains.P_by_state.size() < static_cast<size_t>(cfg.simulation.m0))
    throw MismatchError("gains carry no P matrix for the configured m0");
}

SimulateOutcome run_simulation(const ProblemConfig& cfg, const GainSet& gains) {
  check_gains_cover(cfg, gains);
  const auto& sim = cfg.simulation;

  // trajectory run: first battery case, or a zero-disturbance run
  RatioCase traj_case;
  if (!sim.battery.empty()) {
    traj_case = sim.battery.front();
  } else {
    traj_case.name = "zero-disturbance";
    traj_case.x0 = sim.x0;
    traj_case.dist.symmetric_w = sim.symmetric_w;
    traj_case.dist.xi_nodes.assign(cfg.network.node_count(),
                                   DisturbanceSignal::zero());
  }
  SimOptions opt;
  opt.horizon = sim.horizon;
  opt.step = sim.step;
  opt.seed = sim.seed;
  opt.m0 = sim.m0;
  opt.x0 = traj_case.x0.size() ? traj_case.x0 : sim.x0;
  opt.mode = sim.mode;
  opt.output_stride = sim.output_stride;
  GainSet gains_for_run = gains;
  gains_for_run.m0 = sim.m0;
  SimulationResult res = simulate(cfg.plant, cfg.measurements, cfg.channels,
                                  cfg.network, gains_for_run, traj_case.dist, opt);

  json metrics;
  metrics["trajectory_case"] = traj_case.name;
  metrics["psi_integral"] = res.psi_integral;
  metrics["err_integrals"] = res.err_integrals;
  metrics["terminal_errors"] = res.terminal_errors;
  metrics["decay_rate"] = res.decay_rate;
  metrics["horizon"] = sim.horizon;
  metrics["step"] = sim.step;
  metrics["seed"] = sim.seed;
  metrics["mode"] = sim.mode == GainMode::LocalGains ? "local" : "global";

  bool battery_usable = false;
  for (const auto& c : sim.battery)
    if (!c.dist.all_zero() || c.x0.norm() > 0) battery_usable = true;
  if (battery_usable) {
    RatioReport ratio = estimate_hinf_ratio(
        cfg.plant, cfg.measurements, cfg.channels, cfg.network, gains_for_run,
        sim.battery, sim.runs, sim.horizon, sim.step, sim.seed, sim.mode);
    json cases = json::array();
    for (const auto& c : ratio.cases) {
      cases.push_back({{"name", c.name},
                       {"mean_psi_integral", c.mean_psi_integral},
                       {"mu_P", c.mu_p},
                       {"ratio", c.ratio},
                       {"skipped", c.skipped}});
    }
    metrics["ratio_battery"] = {{"cases", cases},
                                {"worst_ratio", ratio.worst_ratio},
                                {"runs_per_case", ratio.runs_per_case},
                                {"tail_bound", ratio.tail_bound},
                                {"certified_gamma2", gains.certified_gamma2}};
  } else {
    metrics["ratio_battery"] = "skipped (no nonzero disturbance case)";
  }

  SimulateOutcome out;
  out.metrics_json = metrics.dump(2);
  out.trajectory_csv = trajectory_csv(res);
  return out;
}

std::string run_gamma_search(const ProblemConfig& cfg, double lo, double hi,
                             int steps, SynthesisMode mode) {
  if (!(lo < hi)) throw std::invalid_argument("gamma_search: need lo < hi");
  if (steps < 2) throw std::invalid_argument("gamma_search: need at least 2 steps");

  struct Row {
    double gamma2;
    SolveStatus status;
    double margin;
  };
  std::vector<Row> rows;
  auto solve_at = [&](double g2) {
    ProblemConfig local = cfg;
    local.budget.gamma2 = g2;
    LmiAssembler assembler(local.plant, local.measurements, local.channels,
                           local.network, local.budget, mode);
    LmiProblem problem = assembler.build();
    FeasibilityReport rep = mode == SynthesisMode::LocalTheorem2
                                ? solve_rank_constrained(problem, local.solver)
                                : solve_feasibility(problem, local.solver);
    rows.push_back({g2, rep.status, rep.margin});
    return rep.feasible();
  };

  std::vector<double> grid(steps);
  for (int s = 0; s < steps; ++s)
    grid[s] = lo + (hi - lo) * s / (steps - 1);
  int first_feasible = -1;
  for (int s = 0; s < steps; ++s) {
    bool ok = solve_at(grid[s]);
    if (ok && first_feasible < 0) first_feasible = s;
  }
  // bisection refinement of the frontier bracket
  if (first_feasible > 0) {
    double bad = grid[first_feasible - 1], good = grid[first_feasible];
    for (int b = 0; b < 8; ++b) {
      double mid = 0.5 * (bad + good);
      if (solve_at(mid)) good = mid;
      else bad = mid;
    }
  }
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.gamma2 < b.gamma2; });
  std::ostringstream os;
  os.precision(17);
  os << "gamma2,status,margin\n";
  for (const auto& r : rows)
    os << r.gamma2 << "," << to_string(r.status) << "," << r.margin << "\n";
  return os.str();
}

}  // namespace hinfcon
