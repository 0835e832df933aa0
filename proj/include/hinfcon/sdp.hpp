#ifndef HINFCON_SDP_HPP
#define HINFCON_SDP_HPP

#include <string>
#include <vector>

#include "hinfcon/lmi.hpp"

namespace hinfcon {

struct SolverOptions {
  /// Strictness level; 0 selects 1e-7 * (1 + max constant-block norm).
  double eps_feas = 0.0;
  /// Rank acceptance: sigma_{n+1} <= eps_rank * sigma_1 per rank block.
  double eps_rank = 1e-6;
  int max_newton = 6000;   // total Newton budget across all stages
  int max_outer = 50;      // rank alternation outer iterations
  double mu0 = 1.0;
  double mu_shrink = 0.05;
  double mu_min = 1e-10;
  /// Keep centering past the stop threshold to deepen the margin.
  bool polish = false;
  double polish_factor = 50.0;
  bool verbose = false;
};

enum class SolveStatus { Feasible, InfeasibleSuspected, IterationLimit };

struct ResidualRecord {
  int iteration;
  double margin;
  double rank_residual;
  bool accepted;
};

struct FeasibilityReport {
  SolveStatus status = SolveStatus::IterationLimit;
  LmiSolution solution;  // best iterate, margin = most positive slack
  double margin = 0.0;
  int iterations = 0;  // Newton steps spent
  double eps_feas_used = 0.0;
  std::vector<ResidualRecord> residual_history;

  bool feasible() const { return status == SolveStatus::Feasible; }
  std::string residual_csv() const;
};

const char* to_string(SolveStatus s);

/// Feasibility of the convex constraint system (rank constraints, if any,
/// are ignored). Deterministic given options.
FeasibilityReport solve_feasibility(const LmiProblem& p, const SolverOptions& opts);

/// Rank-constrained feasibility: convex interior-point step alternated with
/// truncated-eigendecomposition projection of each rank block, plus an exact
/// Y = X^-1 substitution test each round.
FeasibilityReport solve_rank_constrained(const LmiProblem& p,
                                         const SolverOptions& opts);

/// Exact evaluation: per-constraint largest eigenvalue of the normal
/// (negative-definite) form at the assignment. Negative values mean the
/// constraint holds.
std::vector<std::pair<std::string, double>> min_slack_eig(const LmiProblem& p,
                                                          const Vector& v);

/// max over constraints of the normal-form slack.
double worst_slack(const LmiProblem& p, const Vector& v);

/// sigma_{n+1}/sigma_1 of the assembled block [[Y, I], [I, X]].
double rank_residual(const LmiProblem& p, const RankConstraint& rc,
                     const Vector& v);

/// Effective strictness for a problem under the given options.
double effective_eps(const LmiProblem& p, const SolverOptions& opts);

}  // namespace hinfcon

#endif
