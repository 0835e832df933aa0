#ifndef HINFCON_GAINS_HPP
#define HINFCON_GAINS_HPP

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "hinfcon/lmi.hpp"

namespace hinfcon {

/// Observer gains: global tables indexed by global state, localized tables
/// indexed by local state, plus the synthesis certificate data.
struct GainSet {
  // K[(i,j,k)]: coupling gain of node i for the edge from j, global state k
  std::map<std::tuple<int, int, int>, Matrix> K;
  // L[(i,k)]: innovation gain of node i, global state k
  std::map<std::pair<int, int>, Matrix> L;
  // localized tables, indexed by the local state of node i
  std::map<std::tuple<int, int, int>, Matrix> K_local;
  std::map<std::pair<int, int>, Matrix> L_local;

  double certified_gamma2 = 0.0;
  int m0 = 1;
  /// P = (1/(gamma^2 N)) sum_i X_i^{m0}, one per candidate initial state.
  std::vector<Matrix> P_by_state;
  const Matrix& P() const { return P_by_state.at(m0 - 1); }
  /// max over (i,k) of ||X Y - I|| when both are present, else 0.
  double xy_residual = 0.0;
  bool has_local() const { return !L_local.empty(); }
};

/// Exact evaluation of the gain formulas from a feasible solution. Uses the
/// Y blocks when the problem carries them (the rank-constrained path) and
/// X^-1 otherwise; records ||XY - I||.
GainSet global_gains(const LmiAssembler& assembler, const LmiSolution& sol,
                     int m0);

/// Conditional-average localization; exact for singleton conditioning sets.
void localize_gains(GainSet& gains, const SwitchingNetwork& net);

struct DeviationEntry {
  int node = 0;
  int neighbour = 0;  // 0 for L entries
  int state = 0;
  double deviation = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct DeviationReport {
  std::vector<DeviationEntry> entries;
  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
  double max_l_deviation() const;
  double max_k_deviation() const;
};

/// Spectral-norm deviations ||Ltilde - L||, ||Ktilde - K|| against the
/// alpha/beta budget.
DeviationReport deviation_bounds(const GainSet& gains,
                                 const SwitchingNetwork& net,
                                 const UncertaintyBudget& budget);

struct DissipationReport {
  bool pi_column_sums_pass = false;
  double epsilon = 0.0;  // min_{i,k} 2 delta_i / (q_i^k + 1)
  std::vector<Matrix> pi_matrices;
  /// per state: largest eigenvalue of the dissipation quadratic form
  std::vector<double> lambda_max;
  double worst_sample_value = 0.0;
  int samples = 0;
  bool quadratic_form_pass = false;
  std::optional<Vector> witness;
  bool pass() const { return pi_column_sums_pass && quadratic_form_pass; }
};

/// Post-solve verification: (a) the Pi matrix column-sum bound, and (b) the
/// closed-loop quadratic form  L V + N Psi + eps V <= 0  on sampled unit
/// error vectors (plus the exact extreme eigenvalue). `use_local` selects the
/// localized gain tables routed through Phi.
DissipationReport verify_dissipation(const PlantModel& pm,
                                     const MeasurementModel& mm,
                                     const ChannelModel& cm,
                                     const SwitchingNetwork& net,
                                     const UncertaintyBudget& budget,
                                     const LmiAssembler& assembler,
                                     const LmiSolution& sol,
                                     const GainSet& gains, bool use_local,
                                     int sample_count, std::uint64_t seed);

/// Closed-loop error-dynamics generator of the whole network in state k
/// (block (i,j) couplings through K H, diagonal A - L C - sum K H).
Matrix closed_loop_error_matrix(const PlantModel& pm, const MeasurementModel& mm,
                                const ChannelModel& cm,
                                const SwitchingNetwork& net,
                                const GainSet& gains, bool use_local, int k);

/// Gains serialization; round-trips through JSON exactly.
std::string gains_to_json(const GainSet& gains);
GainSet gains_from_json(const std::string& text);

}  // namespace hinfcon

#endif
