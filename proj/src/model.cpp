#include "hinfcon/model.hpp"

#include <sstream>
#include <stdexcept>

namespace hinfcon {

const MeasurementTriplet& MeasurementModel::at(int node, int global) const {
  if (node < 1 || node > node_count())
    throw std::out_of_range("MeasurementModel: node out of range");
  const auto& per_state = by_node_state_[node - 1];
  if (global < 1 || global > static_cast<int>(per_state.size()))
    throw std::out_of_range("MeasurementModel: global state out of range");
  return per_state[global - 1];
}

void ChannelModel::set(int i, int j, Matrix H, Matrix G) {
  if (H.rows() != G.rows())
    throw std::invalid_argument("ChannelModel: H and G row counts differ");
  hg_[{i, j}] = {std::move(H), std::move(G)};
}

const Matrix& ChannelModel::H(int i, int j) const {
  auto it = hg_.find({i, j});
  if (it == hg_.end()) throw std::out_of_range("ChannelModel: no such channel");
  return it->second.first;
}

const Matrix& ChannelModel::G(int i, int j) const {
  auto it = hg_.find({i, j});
  if (it == hg_.end()) throw std::out_of_range("ChannelModel: no such channel");
  return it->second.second;
}

std::vector<std::pair<int, int>> ChannelModel::edges() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& [key, _] : hg_) out.push_back(key);
  return out;
}

bool positive_definite(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return es.eigenvalues().minCoeff() > rel_tol * scale;
}

Matrix noise_shape_E(const MeasurementModel& mm, int node, int global) {
  const auto& t = mm.at(node, global);
  Matrix e = t.D * t.D.transpose() + t.Dbar * t.Dbar.transpose();
  e = 0.5 * (e + e.transpose());
  if (!positive_definite(e)) {
    std::ostringstream os;
    os << "noise_shape_E: E is not positive definite at node " << node
       << ", state " << global << " (standing assumption violated)";
    throw std::domain_error(os.str());
  }
  return e;
}

Matrix noise_shape_F(const ChannelModel& cm, int i, int j) {
  const Matrix& g = cm.G(i, j);
  Matrix f = g * g.transpose();
  f = 0.5 * (f + f.transpose());
  if (!positive_definite(f)) {
    std::ostringstream os;
    os << "noise_shape_F: F is not positive definite on edge (" << i << "," << j
       << ")";
    throw std::domain_error(os.str());
  }
  return f;
}

std::vector<Violation> validate_model(const PlantModel& pm,
                                      const MeasurementModel& mm,
                                      const ChannelModel& cm,
                                      const SwitchingNetwork& net) {
  std::vector<Violation> out;
  const int n = pm.state_dim();
  const int nn = net.node_count();
  const int m = net.global_count();

  if (pm.A.rows() != pm.A.cols())
    out.push_back({"plant.A", "A must be square"});
  if (pm.B2.rows() != n)
    out.push_back({"plant.B2", "B2 row count must equal the state dimension"});

  if (mm.node_count() != nn)
    out.push_back({"measurements", "need one triplet table per node"});
  if (mm.node_count() == nn && mm.global_count() != m)
    out.push_back({"measurements", "need one triplet per global state"});

  const int l = pm.disturbance_dim();
  for (int i = 1; i <= std::min(nn, mm.node_count()); ++i) {
    int r_i = -1, l_i = -1;
    for (int k = 1; k <= std::min(m, mm.global_count()); ++k) {
      const auto& t = mm.at(i, k);
      std::ostringstream base;
      base << "measurements[" << i - 1 << "][" << k - 1 << "]";
      if (t.C.cols() != n)
        out.push_back({base.str() + ".C", "column count must equal state dimension"});
      if (t.D.rows() != t.C.rows() || t.Dbar.rows() != t.C.rows())
        out.push_back({base.str(), "C, D, Dbar row counts differ"});
      if (t.D.cols() != l)
        out.push_back({base.str() + ".D", "column count must equal plant disturbance dimension"});
      if (r_i < 0) {
        r_i = static_cast<int>(t.C.rows());
        l_i = static_cast<int>(t.Dbar.cols());
      } else if (t.C.rows() != r_i || t.Dbar.cols() != l_i) {
        out.push_back({base.str(), "output dimensions differ across states"});
      }
      Matrix e = t.D * t.D.transpose() + t.Dbar * t.Dbar.transpose();
      if (!positive_definite(0.5 * (e + e.transpose()))) {
        out.push_back({base.str(), "E = DD' + Dbar Dbar' is not positive definite"});
      }
    }
    // triplets must be constant across globals sharing the local state
    std::map<int, const MeasurementTriplet*> by_local;
    for (int k = 1; k <= std::min(m, mm.global_count()); ++k) {
      int ls = net.mapping().local_state(i, k);
      const auto& t = mm.at(i, k);
      auto it = by_local.find(ls);
      if (it == by_local.end()) {
        by_local[ls] = &t;
      } else {
        const auto& ref = *it->second;
        bool same = ref.C.rows() == t.C.rows() && ref.C.cols() == t.C.cols() &&
                    ref.C == t.C && ref.D == t.D && ref.Dbar == t.Dbar;
        if (!same) {
          std::ostringstream os;
          os << "node " << i << ": measurement triplet differs between global "
             << "states sharing local state " << ls;
          out.push_back({"measurements", os.str()});
        }
      }
    }
  }

  // every edge present in some state needs a channel, with consistent dims
  for (const auto& [i, j] : net.edge_union()) {
    std::ostringstream base;
    base << "channels(" << i << "," << j << ")";
    if (!cm.has(i, j)) {
      out.push_back({base.str(), "edge appears in the network but has no channel"});
      continue;
    }
    if (cm.H(i, j).cols() != n)
      out.push_back({base.str() + ".H", "column count must equal state dimension"});
    Matrix f = cm.G(i, j) * cm.G(i, j).transpose();
    if (!positive_definite(0.5 * (f + f.transpose())))
      out.push_back({base.str() + ".G", "F = GG' is not positive definite"});
  }
  return out;
}

std::vector<Violation> validate_budget(const UncertaintyBudget& budget,
                                       const SwitchingNetwork& net) {
  std::vector<Violation> out;
  const int nn = net.node_count();
  if (static_cast<int>(budget.alpha2.size()) != nn)
    out.push_back({"budget.alpha2", "need one entry per node"});
  if (static_cast<int>(budget.delta.size()) != nn)
    out.push_back({"budget.delta", "need one entry per node"});
  if (budget.gamma2 <= 0) out.push_back({"budget.gamma2", "must be positive"});
  for (size_t i = 0; i < budget.alpha2.size(); ++i)
    if (budget.alpha2[i] < 0)
      out.push_back({"budget.alpha2", "entries must be nonnegative"});
  for (const auto& [e, b2] : budget.beta2)
    if (b2 < 0) out.push_back({"budget.beta2", "entries must be nonnegative"});
  for (size_t i = 0; i < budget.delta.size(); ++i)
    if (budget.delta[i] <= 0)
      out.push_back({"budget.delta", "entries must be strictly positive"});
  return out;
}

}  // namespace hinfcon
