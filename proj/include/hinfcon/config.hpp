#ifndef HINFCON_CONFIG_HPP
#define HINFCON_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include "hinfcon/gains.hpp"
#include "hinfcon/sdp.hpp"
#include "hinfcon/simulate.hpp"

namespace hinfcon {

struct SimulationConfig {
  double horizon = 10.0;
  double step = 1e-3;
  std::uint64_t seed = 1;
  int m0 = 1;
  Vector x0;
  int runs = 50;
  int output_stride = 10;
  GainMode mode = GainMode::LocalGains;
  bool symmetric_w = false;
  std::vector<RatioCase> battery;
};

/// Parse error with field context.
struct ConfigError : std::runtime_error {
  std::string path;
  ConfigError(std::string p, const std::string& msg)
      : std::runtime_error(p + ": " + msg), path(std::move(p)) {}
};

struct ProblemConfig {
  PlantModel plant;
  MeasurementModel measurements;
  ChannelModel channels;
  SwitchingNetwork network;
  UncertaintyBudget budget;
  SolverOptions solver;
  SimulationConfig simulation;

  static ProblemConfig from_json_text(const std::string& text);
  static ProblemConfig from_file(const std::string& path);

  /// Aggregated structural validation (network, model, budget, simulation).
  std::vector<Violation> validate() const;
};

std::string violations_to_json(const std::vector<Violation>& violations);

}  // namespace hinfcon

#endif
