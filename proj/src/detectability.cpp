#include "hinfcon/detectability.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace hinfcon {

using nlohmann::json;

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Right nullspace of m via SVD with relative threshold.
Matrix nullspace(const Matrix& m, double tol) {
  if (m.rows() == 0) return Matrix::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double s1 = s.size() > 0 ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(s1, 1e-300)) ++rank;
  const int null_dim = static_cast<int>(m.cols()) - rank;
  return svd.matrixV().rightCols(null_dim);
}

}  // namespace

SubspaceBasis orthonormalize(int ambient, const Matrix& columns, double tol) {
  if (columns.cols() == 0) return {ambient, Matrix::Zero(ambient, 0)};
  Eigen::JacobiSVD<Matrix> svd(columns, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double s1 = s.size() > 0 ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(s1, 1e-300)) ++rank;
  return {ambient, svd.matrixU().leftCols(rank)};
}

SubspaceBasis unobservable_subspace(const Matrix& c, const Matrix& a,
                                    const DetectTolerances& tol) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || c.cols() != n)
    throw std::invalid_argument("unobservable_subspace: incompatible dimensions");
  const int r = static_cast<int>(c.rows());
  Matrix obs(n * r, n);
  Matrix block = c;
  for (int p = 0; p < n; ++p) {
    obs.middleRows(p * r, r) = block;
    block = block * a;
  }
  Matrix kernel = nullspace(obs, tol.eps_rank);
  return {n, kernel};
}

namespace {

/// Orthonormal basis (within R^k) of the span of generalized eigenvectors of
/// m with Re(lambda) >= -eps_pbh.
Matrix antistable_invariant_basis(const Matrix& m, double eps_pbh,
                                  double rank_tol) {
  const int k = static_cast<int>(m.rows());
  if (k == 0) return Matrix::Zero(0, 0);
  Eigen::EigenSolver<Matrix> es(m);
  const auto& lam = es.eigenvalues();
  std::vector<bool> used(k, false);
  Matrix collected(k, 0);
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  const double cluster_tol = 1e-7 * scale;
  for (int i = 0; i < k; ++i) {
    if (used[i]) continue;
    if (lam(i).real() < -eps_pbh) continue;
    // cluster multiplicity (conjugates handled via the complex kernel)
    int mult = 0;
    for (int j = 0; j < k; ++j) {
      if (std::abs(lam(j) - lam(i)) < cluster_tol) {
        mult++;
        if (std::abs(lam(j).imag() - lam(i).imag()) < cluster_tol) used[j] = true;
      }
    }
    Eigen::MatrixXcd shifted =
        m.cast<std::complex<double>>() -
        lam(i) * Eigen::MatrixXcd::Identity(k, k);
    Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(k, k);
    for (int p = 0; p < mult; ++p) power = shifted * power;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(power, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double s1 = s.size() > 0 ? s(0) : 0.0;
    int rank = 0;
    for (int q = 0; q < s.size(); ++q)
      if (s(q) > rank_tol * std::max(s1, 1e-300)) ++rank;
    Eigen::MatrixXcd ker = svd.matrixV().rightCols(k - rank);
    Matrix real_part(k, 2 * ker.cols());
    real_part << ker.real(), ker.imag();
    Matrix joined(k, collected.cols() + real_part.cols());
    joined << collected, real_part;
    collected = joined;
  }
  return orthonormalize(k, collected, rank_tol).basis;
}

}  // namespace

SubspaceBasis undetectable_subspace(const Matrix& c, const Matrix& a,
                                    const DetectTolerances& tol) {
  SubspaceBasis unobs = unobservable_subspace(c, a, tol);
  if (unobs.trivial()) return unobs;
  // restriction of a to the unobservable subspace (A-invariant)
  Matrix a_res = unobs.basis.transpose() * a * unobs.basis;
  Matrix w = antistable_invariant_basis(a_res, tol.eps_pbh, tol.eps_rank);
  return {unobs.ambient, unobs.basis * w};
}

SubspaceBasis intersect(const SubspaceBasis& p, const SubspaceBasis& q,
                        double tol) {
  if (p.ambient != q.ambient)
    throw std::invalid_argument("intersect: ambient dimensions differ");
  if (p.trivial() || q.trivial()) return {p.ambient, Matrix::Zero(p.ambient, 0)};
  Matrix stacked(p.ambient, p.rank() + q.rank());
  stacked << p.basis, -q.basis;
  Matrix ker = nullspace(stacked, tol);
  if (ker.cols() == 0) return {p.ambient, Matrix::Zero(p.ambient, 0)};
  Matrix inter = p.basis * ker.topRows(p.rank());
  return orthonormalize(p.ambient, inter, tol);
}

SubspaceBasis subspace_sum(const SubspaceBasis& p, const SubspaceBasis& q,
                           double tol) {
  Matrix joined(p.ambient, p.rank() + q.rank());
  joined << p.basis, q.basis;
  return orthonormalize(p.ambient, joined, tol);
}

Matrix homogeneous_channel_matrix(const SwitchingNetwork& net,
                                  const ChannelModel& cm) {
  const auto edges = net.edge_union();
  if (edges.empty())
    throw std::domain_error("homogeneous_channel_matrix: network has no edges");
  const Matrix& h = cm.H(edges.front().first, edges.front().second);
  for (const auto& [i, j] : edges) {
    const Matrix& hij = cm.H(i, j);
    if (hij.rows() != h.rows() || hij.cols() != h.cols() || hij != h)
      throw std::domain_error(
          "channel matrices are not homogeneous (H_ij = H assumption violated)");
  }
  return h;
}

std::pair<Matrix, Matrix> network_observability_pair(const SwitchingNetwork& net,
                                                     const ChannelModel& cm,
                                                     const PlantModel& pm,
                                                     int global) {
  Matrix h = homogeneous_channel_matrix(net, cm);
  Matrix lap = laplacian(net.graph(global));
  const int n = pm.state_dim();
  const int nn = net.node_count();
  Matrix hbar = kron(lap, h);
  Matrix abar = kron(Matrix::Identity(nn, nn), pm.A) +
                0.5 * net.generator().rate(global, global) *
                    Matrix::Identity(n * nn, n * nn);
  return {hbar, abar};
}

Theorem3Report check_theorem3(const PlantModel& pm, const SwitchingNetwork& net,
                              const MeasurementModel& mm, const ChannelModel& cm,
                              const DetectTolerances& tol) {
  Theorem3Report rep;
  const int n = pm.state_dim();
  const int nn = net.node_count();
  for (int k = 1; k <= net.global_count(); ++k) {
    Matrix a_k = pm.A + 0.5 * net.generator().rate(k, k) * Matrix::Identity(n, n);
    // product space: block-diagonal stacking of per-node undetectable bases
    std::vector<SubspaceBasis> per_node;
    int total = 0;
    for (int i = 1; i <= nn; ++i) {
      per_node.push_back(undetectable_subspace(mm.at(i, k).C, a_k, tol));
      total += per_node.back().rank();
    }
    Theorem3StateReport sr;
    sr.state = k;
    if (total == 0) {
      sr.holds = true;
      sr.intersection_dim = 0;
      rep.per_state.push_back(sr);
      continue;
    }
    Matrix prod = Matrix::Zero(n * nn, total);
    int col = 0;
    for (int i = 0; i < nn; ++i) {
      const auto& b = per_node[i];
      prod.block(i * n, col, n, b.rank()) = b.basis;
      col += b.rank();
    }
    auto [hbar, abar] = network_observability_pair(net, cm, pm, k);
    SubspaceBasis obar = unobservable_subspace(hbar, abar, tol);
    SubspaceBasis inter = intersect(obar, SubspaceBasis{n * nn, prod}, tol.eps_rank);
    sr.intersection_dim = inter.rank();
    sr.holds = inter.trivial();
    if (!inter.trivial()) sr.witness = inter.basis.col(0);
    rep.per_state.push_back(sr);
  }
  return rep;
}

Theorem4Report check_theorem4(const PlantModel& pm, const SwitchingNetwork& net,
                              const MeasurementModel& mm, const ChannelModel& cm,
                              const DetectTolerances& tol) {
  Theorem4Report rep;
  const int n = pm.state_dim();
  const int nn = net.node_count();
  Matrix h = homogeneous_channel_matrix(net, cm);
  SubspaceBasis o_h = unobservable_subspace(h, pm.A, tol);
  for (int k = 1; k <= net.global_count(); ++k) {
    Matrix a_k = pm.A + 0.5 * net.generator().rate(k, k) * Matrix::Identity(n, n);
    Theorem4StateReport sr;
    sr.state = k;
    std::vector<SubspaceBasis> c_bases;
    for (int i = 1; i <= nn; ++i)
      c_bases.push_back(undetectable_subspace(mm.at(i, k).C, a_k, tol));
    // (i): intersection over all nodes
    SubspaceBasis common = c_bases[0];
    for (int i = 1; i < nn && !common.trivial(); ++i)
      common = intersect(common, c_bases[i], tol.eps_rank);
    sr.common_undetectable_trivial = common.trivial();
    // (ii): O_H cap C_i^k per node
    for (int i = 0; i < nn; ++i)
      sr.channel_separation.push_back(
          intersect(o_h, c_bases[i], tol.eps_rank).trivial());
    // Laplacian zero-eigenvalue geometric multiplicity = N - rank(L^k)
    Matrix lap = laplacian(net.graph(k));
    Eigen::JacobiSVD<Matrix> svd(lap);
    const auto& s = svd.singularValues();
    const double s1 = s.size() > 0 ? s(0) : 0.0;
    int rank = 0;
    for (int q = 0; q < s.size(); ++q)
      if (s(q) > tol.eps_rank * std::max(s1, 1e-300)) ++rank;
    sr.laplacian_zero_multiplicity = nn - rank;
    bool all_sep = true;
    for (bool b : sr.channel_separation) all_sep = all_sep && b;
    sr.sufficiency_implied = (sr.laplacian_zero_multiplicity == 1) &&
                             sr.common_undetectable_trivial && all_sep;
    rep.per_state.push_back(sr);
  }
  return rep;
}

std::string detectability_report_json(const Theorem3Report& t3,
                                      const Theorem4Report& t4) {
  json out;
  out["theorem3"] = json::array();
  for (const auto& r : t3.per_state) {
    json entry = {{"state", r.state},
                  {"holds", r.holds},
                  {"intersection_dim", r.intersection_dim}};
    if (r.witness) {
      json w = json::array();
      for (int i = 0; i < r.witness->size(); ++i) w.push_back((*r.witness)(i));
      entry["witness"] = w;
    }
    out["theorem3"].push_back(entry);
  }
  out["theorem3_holds_all"] = t3.holds_all();
  out["theorem4"] = json::array();
  for (const auto& r : t4.per_state) {
    out["theorem4"].push_back(
        {{"state", r.state},
         {"common_undetectable_trivial", r.common_undetectable_trivial},
         {"channel_separation", r.channel_separation},
         {"laplacian_zero_multiplicity", r.laplacian_zero_multiplicity},
         {"sufficiency_implied", r.sufficiency_implied}});
  }
  return out.dump(2);
}

}  // namespace hinfcon
