#ifndef HINFCON_MODEL_HPP
#define HINFCON_MODEL_HPP

#include <map>
#include <utility>
#include <vector>

#include "hinfcon/network.hpp"

namespace hinfcon {

/// dx = A x + B2 xi(t)
struct PlantModel {
  Matrix A;
  Matrix B2;
  int state_dim() const { return static_cast<int>(A.rows()); }
  int disturbance_dim() const { return static_cast<int>(B2.cols()); }
};

struct MeasurementTriplet {
  Matrix C;     // r_i x n
  Matrix D;     // r_i x l
  Matrix Dbar;  // r_i x l_i
};

/// Per-node, per-global-state measurement triplets (the C_i^k form); the
/// local triplets are derived views through Phi.
class MeasurementModel {
 public:
  MeasurementModel() = default;
  explicit MeasurementModel(std::vector<std::vector<MeasurementTriplet>> by_node_state)
      : by_node_state_(std::move(by_node_state)) {}

  int node_count() const { return static_cast<int>(by_node_state_.size()); }
  int global_count() const {
    return by_node_state_.empty() ? 0 : static_cast<int>(by_node_state_[0].size());
  }
  const MeasurementTriplet& at(int node, int global) const;
  int output_dim(int node) const { return static_cast<int>(at(node, 1).C.rows()); }
  int sensor_noise_dim(int node) const {
    return static_cast<int>(at(node, 1).Dbar.cols());
  }

 private:
  std::vector<std::vector<MeasurementTriplet>> by_node_state_;
};

/// Interconnection channels: per directed edge (receiver i, transmitter j),
/// v_ij = H_ij xhat_j + G_ij w_ij. State-independent by assumption.
class ChannelModel {
 public:
  ChannelModel() = default;

  void set(int i, int j, Matrix H, Matrix G);
  bool has(int i, int j) const { return hg_.count({i, j}) > 0; }
  const Matrix& H(int i, int j) const;
  const Matrix& G(int i, int j) const;
  std::vector<std::pair<int, int>> edges() const;

 private:
  std::map<std::pair<int, int>, std::pair<Matrix, Matrix>> hg_;
};

/// Norm bounds for the estimator perturbations plus the synthesis constants.
/// alpha2/beta2/delta are the squared node bounds, squared edge bounds and
/// the per-node decay offsets.
struct UncertaintyBudget {
  double gamma2 = 1.0;
  std::vector<double> alpha2;                  // per node, >= 0
  std::map<std::pair<int, int>, double> beta2; // per edge, >= 0 (absent = 0)
  std::vector<double> delta;                   // per node, > 0

  double alpha2_of(int node) const { return alpha2[node - 1]; }
  double beta2_of(int i, int j) const {
    auto it = beta2.find({i, j});
    return it == beta2.end() ? 0.0 : it->second;
  }
  double delta_of(int node) const { return delta[node - 1]; }
};

/// E_i^k = D D' + Dbar Dbar'; throws std::domain_error when the standing
/// positivity assumption fails.
Matrix noise_shape_E(const MeasurementModel& mm, int node, int global);

/// F_ij = G G'; throws std::domain_error when singular.
Matrix noise_shape_F(const ChannelModel& cm, int i, int j);

/// Scaled positive-definiteness test used by the standing assumptions:
/// min eigenvalue > 1e-10 * max(1, ||M||).
bool positive_definite(const Matrix& m, double rel_tol = 1e-10);

std::vector<Violation> validate_model(const PlantModel& pm,
                                      const MeasurementModel& mm,
                                      const ChannelModel& cm,
                                      const SwitchingNetwork& net);

std::vector<Violation> validate_budget(const UncertaintyBudget& budget,
                                       const SwitchingNetwork& net);

}  // namespace hinfcon

#endif
