#ifndef HINFCON_PIPELINE_HPP
#define HINFCON_PIPELINE_HPP

#include <string>

#include "hinfcon/config.hpp"
#include "hinfcon/detectability.hpp"

namespace hinfcon {

/// Raised when supplied gains do not cover the configured network.
struct MismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a structural assumption (for example homogeneous channels in
/// the detectability tests) is violated.
struct AssumptionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SynthesisOutcome {
  SynthesisMode mode;
  FeasibilityReport report;
  std::optional<GainSet> gains;
  std::optional<DeviationReport> deviations;
  std::optional<DissipationReport> dissipation;

  std::string gains_json() const;
  std::string summary_json() const;
};

/// Assemble and solve the synthesis LMIs for the requested mode, derive the
/// gains (localized in local mode), and run the post-solve verifications.
SynthesisOutcome run_synthesis(const ProblemConfig& cfg, SynthesisMode mode);

struct DetectOutcome {
  Theorem3Report theorem3;
  Theorem4Report theorem4;
  std::string to_json() const { return detectability_report_json(theorem3, theorem4); }
};

DetectOutcome run_detect(const ProblemConfig& cfg);

struct SimulateOutcome {
  std::string metrics_json;
  std::string trajectory_csv;
};

/// One trajectory run plus the configured Monte Carlo ratio battery.
SimulateOutcome run_simulation(const ProblemConfig& cfg, const GainSet& gains);

/// Feasibility frontier over gamma^2: an ascending grid with bisection
/// refinement of the first infeasible-to-feasible bracket.
std::string run_gamma_search(const ProblemConfig& cfg, double lo, double hi,
                             int steps, SynthesisMode mode);

/// Throws MismatchError unless the gains cover every (node, state) and edge
/// of the configured network with the right dimensions.
void check_gains_cover(const ProblemConfig& cfg, const GainSet& gains);

}  // namespace hinfcon

#endif
