#ifndef HINFCON_SIMULATE_HPP
#define HINFCON_SIMULATE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hinfcon/gains.hpp"

namespace hinfcon {

/// Scalar disturbance signal, applied per vector component of its target.
struct DisturbanceSignal {
  enum class Kind { Zero, DampedSine, Samples, PiecewiseRandom };
  Kind kind = Kind::Zero;
  // damped sine: sin(a pi t + phase) e^{-b t}, b > 0
  double a = 0, phase = 0, b = 0;
  // custom samples, linearly interpolated, zero outside the table
  std::vector<double> times, values;
  // adapted piecewise-constant random mode: N(0, sigma^2) e^{-b t} on a dt grid
  double sigma = 0, dt = 0.1;

  bool is_zero() const { return kind == Kind::Zero; }
  static DisturbanceSignal zero() { return {}; }
  static DisturbanceSignal damped_sine(double a, double phase, double b);
};

/// Full disturbance configuration for one simulation case.
struct DisturbanceSpec {
  DisturbanceSignal xi;                                   // plant disturbance
  std::vector<DisturbanceSignal> xi_nodes;                // per node
  std::map<std::pair<int, int>, DisturbanceSignal> w;     // per edge (i,j)
  /// share w samples across (i,j)/(j,i) pairs (undirected channel noise)
  bool symmetric_w = false;

  bool all_zero() const;
};

enum class GainMode { LocalGains, GlobalGains };

struct SimOptions {
  double horizon = 10.0;
  double step = 1e-3;
  std::uint64_t seed = 0;
  int m0 = 1;
  Vector x0;
  GainMode mode = GainMode::LocalGains;
  int output_stride = 10;          // trajectory row decimation
  std::optional<MarkovPath> forced_path;  // overrides path sampling
  /// common observer initialization; defaults to zero per the problem setup
  std::optional<Vector> xhat0;
};

struct TrajectoryRow {
  double t;
  int state;
  Vector x;
  std::vector<Vector> xhat;
  std::vector<double> err_norms;
  double psi;
};

struct SimulationResult {
  MarkovPath path;
  double psi_integral = 0.0;
  std::vector<double> err_integrals;     // per node, int ||e_i||^2
  std::vector<double> terminal_errors;   // per node, ||e_i(T)||
  double energy_xi = 0.0;                // int ||xi||^2 over the horizon
  std::vector<double> energy_xi_nodes;
  std::map<std::pair<int, int>, double> energy_w_gated;  // int a_ij ||w_ij||^2
  std::vector<TrajectoryRow> trajectory;
  /// least-squares slope of log sum_i||e_i|| over the recorded rows (only
  /// rows above a relative floor participate)
  double decay_rate = 0.0;
};

struct SimulationError : std::runtime_error {
  double time;
  explicit SimulationError(double t)
      : std::runtime_error("simulation state became non-finite"), time(t) {}
};

/// Exact evaluation of the state-k disagreement over the estimates.
double disagreement(const SwitchingNetwork& net, int k,
                    const std::vector<Vector>& xhat);

/// Draw the sample tables of any piecewise-random signals (no-op for
/// deterministic kinds and for already-realized signals); simulate() and
/// estimate_hinf_ratio() share realizations through this function.
DisturbanceSpec realize_disturbances(const DisturbanceSpec& dist,
                                     double horizon, std::uint64_t seed);

/// mu_P = |x0|_P^2 + |xi|^2 + (1/N) sum_i (|xi_i|^2 + sum_j E int a_ij |w_ij|^2),
/// deterministic energies by composite Simpson on [0, horizon], the gated
/// channel term averaged over the supplied paths. Throws if P is not PD.
double mu_P(const Matrix& p, const Vector& x0, const DisturbanceSpec& dist,
            const std::vector<MarkovPath>& paths, const PlantModel& pm,
            const MeasurementModel& mm, const ChannelModel& cm,
            const SwitchingNetwork& net, double horizon, double step);

/// Joint plant/observer integration with RK4, split exactly at Markov jumps;
/// all integrals accumulate as quadrature states of the same RK4 system.
SimulationResult simulate(const PlantModel& pm, const MeasurementModel& mm,
                          const ChannelModel& cm, const SwitchingNetwork& net,
                          const GainSet& gains, const DisturbanceSpec& dist,
                          const SimOptions& opt);

struct RatioCase {
  std::string name;
  Vector x0;
  DisturbanceSpec dist;
};

struct RatioCaseResult {
  std::string name;
  double mean_psi_integral = 0.0;
  double mu_p = 0.0;
  double ratio = 0.0;
  bool skipped = false;  // zero mu_P
};

struct RatioReport {
  std::vector<RatioCaseResult> cases;
  double worst_ratio = 0.0;
  int runs_per_case = 0;
  /// truncation tail bound reported from the slowest damped-sine envelope
  double tail_bound = 0.0;
};

/// Monte Carlo lower-bound estimate of the H-infinity ratio over a battery of
/// disturbance cases; throws std::invalid_argument when no case has nonzero
/// inputs.
RatioReport estimate_hinf_ratio(const PlantModel& pm, const MeasurementModel& mm,
                                const ChannelModel& cm,
                                const SwitchingNetwork& net,
                                const GainSet& gains,
                                const std::vector<RatioCase>& battery,
                                int runs_per_case, double horizon, double step,
                                std::uint64_t seed, GainMode mode);

/// Trajectory CSV with columns t, eta, x..., xhat_i..., err_i..., psi.
std::string trajectory_csv(const SimulationResult& result);

}  // namespace hinfcon

#endif
