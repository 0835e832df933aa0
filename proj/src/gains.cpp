#include "hinfcon/gains.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hinfcon {

using nlohmann::json;

namespace {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows == 0 ? 0 : static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

}  // namespace

GainSet global_gains(const LmiAssembler& assembler, const LmiSolution& sol,
                     int m0) {
  const PlantModel& pm = assembler.plant();
  const MeasurementModel& mm = assembler.measurements();
  const ChannelModel& cm = assembler.channels();
  const SwitchingNetwork& net = assembler.network();
  const UncertaintyBudget& budget = assembler.budget();
  GainSet out;
  out.m0 = m0;
  out.certified_gamma2 = budget.gamma2;
  const auto& p = assembler.problem();
  const int nn = net.node_count();
  const int m = net.global_count();
  const int n = pm.state_dim();
  const double g2 = budget.gamma2;

  double worst_xy = 0.0;
  for (int i = 1; i <= nn; ++i) {
    for (int k = 1; k <= m; ++k) {
      Matrix x = p.get_matrix(sol.values, assembler.x_var(i, k));
      Matrix y;
      if (assembler.has_y()) {
        y = p.get_matrix(sol.values, assembler.y_var(i, k));
        worst_xy = std::max(worst_xy,
                            (x * y - Matrix::Identity(n, n)).norm());
      } else {
        Eigen::LLT<Matrix> llt(x);
        if (llt.info() != Eigen::Success)
          throw std::domain_error("global_gains: X block is not positive definite");
        y = llt.solve(Matrix::Identity(n, n));
        y = 0.5 * (y + y.transpose());
      }
      const auto& trip = mm.at(i, k);
      Matrix einv = assembler.Einv(i, k);
      out.L[{i, k}] =
          (g2 * y * trip.C.transpose() + pm.B2 * trip.D.transpose()) * einv;
      for (int j : net.in_neighbours(i, k)) {
        out.K[{i, j, k}] = g2 * y * cm.H(i, j).transpose() * assembler.Finv(i, j);
      }
    }
  }
  out.xy_residual = worst_xy;
  for (int k = 1; k <= m; ++k) {
    Matrix psum = Matrix::Zero(n, n);
    for (int i = 1; i <= nn; ++i)
      psum += p.get_matrix(sol.values, assembler.x_var(i, k));
    out.P_by_state.push_back(psum / (g2 * nn));
  }
  return out;
}

void localize_gains(GainSet& gains, const SwitchingNetwork& net) {
  gains.K_local.clear();
  gains.L_local.clear();
  const int nn = net.node_count();
  for (int i = 1; i <= nn; ++i) {
    for (int ki = 1; ki <= net.mapping().local_count(i); ++ki) {
      const auto weights = conditional_weights(net, i, ki);
      // neighbourhood is identical across the conditioning set
      const int rep = weights.begin()->first;
      Matrix lsum;
      bool first = true;
      for (const auto& [l, w] : weights) {
        const Matrix& gl = gains.L.at({i, l});
        if (first) {
          lsum = w * gl;
          first = false;
        } else {
          lsum += w * gl;
        }
      }
      gains.L_local[{i, ki}] = lsum;
      for (int j : net.in_neighbours(i, rep)) {
        Matrix ksum;
        bool kfirst = true;
        for (const auto& [l, w] : weights) {
          const Matrix& gk = gains.K.at({i, j, l});
          if (kfirst) {
            ksum = w * gk;
            kfirst = false;
          } else {
            ksum += w * gk;
          }
        }
        gains.K_local[{i, j, ki}] = ksum;
      }
    }
  }
}

double DeviationReport::max_l_deviation() const {
  double worst = 0;
  for (const auto& e : entries)
    if (e.neighbour == 0) worst = std::max(worst, e.deviation);
  return worst;
}

double DeviationReport::max_k_deviation() const {
  double worst = 0;
  for (const auto& e : entries)
    if (e.neighbour != 0) worst = std::max(worst, e.deviation);
  return worst;
}

DeviationReport deviation_bounds(const GainSet& gains,
                                 const SwitchingNetwork& net,
                                 const UncertaintyBudget& budget) {
  if (!gains.has_local())
    throw std::logic_error("deviation_bounds: localized gains are missing");
  DeviationReport rep;
  const int nn = net.node_count();
  for (int i = 1; i <= nn; ++i) {
    for (int k = 1; k <= net.global_count(); ++k) {
      const int ki = net.mapping().local_state(i, k);
      const double alpha = std::sqrt(budget.alpha2_of(i));
      double dev = spectral_norm(gains.L_local.at({i, ki}) - gains.L.at({i, k}));
      rep.entries.push_back({i, 0, k, dev, alpha, dev <= alpha + 1e-12});
      for (int j : net.in_neighbours(i, k)) {
        const double beta = std::sqrt(budget.beta2_of(i, j));
        double devk =
            spectral_norm(gains.K_local.at({i, j, ki}) - gains.K.at({i, j, k}));
        rep.entries.push_back({i, j, k, devk, beta, devk <= beta + 1e-12});
      }
    }
  }
  return rep;
}

Matrix closed_loop_error_matrix(const PlantModel& pm, const MeasurementModel& mm,
                                const ChannelModel& cm,
                                const SwitchingNetwork& net,
                                const GainSet& gains, bool use_local, int k) {
  const int n = pm.state_dim();
  const int nn = net.node_count();
  Matrix acl = Matrix::Zero(n * nn, n * nn);
  for (int i = 1; i <= nn; ++i) {
    const int ki = net.mapping().local_state(i, k);
    const Matrix& li = use_local ? gains.L_local.at({i, ki}) : gains.L.at({i, k});
    Matrix diag = pm.A - li * mm.at(i, k).C;
    for (int j : net.in_neighbours(i, k)) {
      const Matrix& kij =
          use_local ? gains.K_local.at({i, j, ki}) : gains.K.at({i, j, k});
      Matrix kh = kij * cm.H(i, j);
      diag -= kh;
      acl.block((i - 1) * n, (j - 1) * n, n, n) += kh;
    }
    acl.block((i - 1) * n, (i - 1) * n, n, n) += diag;
  }
  return acl;
}

DissipationReport verify_dissipation(const PlantModel& pm,
                                     const MeasurementModel& mm,
                                     const ChannelModel& cm,
                                     const SwitchingNetwork& net,
                                     const UncertaintyBudget& budget,
                                     const LmiAssembler& assembler,
                                     const LmiSolution& sol,
                                     const GainSet& gains, bool use_local,
                                     int sample_count, std::uint64_t seed) {
  DissipationReport rep;
  const int n = pm.state_dim();
  const int nn = net.node_count();
  const int m = net.global_count();

  // epsilon = min_{i,k} 2 delta_i / (q_i^k + 1)
  double eps = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= m; ++k)
    for (int i = 1; i <= nn; ++i) {
      auto [p_i, q_i] = degrees(net.graph(k), i);
      eps = std::min(eps, 2.0 * budget.delta_of(i) / (q_i + 1.0));
    }
  rep.epsilon = eps;

  // (a) Pi matrices and the column-sum bound
  rep.pi_column_sums_pass = true;
  for (int k = 1; k <= m; ++k) {
    Matrix pi = Matrix::Zero(nn, nn);
    for (int i = 1; i <= nn; ++i) {
      pi(i - 1, i - 1) = -2.0 * budget.delta_of(i);
      for (int j : net.in_neighbours(i, k)) {
        auto [p_j, q_j] = degrees(net.graph(k), j);
        pi(i - 1, j - 1) = 2.0 * budget.delta_of(j) / (q_j + 1.0);
      }
    }
    for (int j = 0; j < nn; ++j) {
      if (pi.col(j).sum() > -eps + 1e-12) rep.pi_column_sums_pass = false;
    }
    rep.pi_matrices.push_back(pi);
  }

  // (b) the quadratic form  L V + N Psi + eps V  on the closed loop
  const auto& p = assembler.problem();
  std::vector<Matrix> xk(m);
  for (int k = 1; k <= m; ++k) {
    xk[k - 1] = Matrix::Zero(n * nn, n * nn);
    for (int i = 1; i <= nn; ++i)
      xk[k - 1].block((i - 1) * n, (i - 1) * n, n, n) =
          p.get_matrix(sol.values, assembler.x_var(i, k));
  }
  double worst = -std::numeric_limits<double>::infinity();
  rep.quadratic_form_pass = true;
  SplitUniform rng(seed);
  for (int k = 1; k <= m; ++k) {
    Matrix acl = closed_loop_error_matrix(pm, mm, cm, net, gains, use_local, k);
    // N Psi^k(e) = e' (Q_L kron I) e with Q_L = Din + Dout - A - A'
    Matrix adj = Matrix::Zero(nn, nn);
    for (int i = 1; i <= nn; ++i)
      for (int j : net.in_neighbours(i, k)) adj(i - 1, j - 1) = 1.0;
    Matrix ql = Matrix::Zero(nn, nn);
    for (int i = 0; i < nn; ++i) {
      ql(i, i) += adj.row(i).sum() + adj.col(i).sum();
    }
    ql -= adj + adj.transpose();
    Matrix psi_form = Matrix::Zero(n * nn, n * nn);
    for (int a = 0; a < nn; ++a)
      for (int b = 0; b < nn; ++b)
        psi_form.block(a * n, b * n, n, n) =
            ql(a, b) * Matrix::Identity(n, n);

    Matrix mk = acl.transpose() * xk[k - 1] + xk[k - 1] * acl + psi_form +
                eps * xk[k - 1];
    for (int l = 1; l <= m; ++l)
      mk += net.generator().rate(k, l) * xk[l - 1];
    mk = 0.5 * (mk + mk.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> es(mk);
    rep.lambda_max.push_back(es.eigenvalues().maxCoeff());
    if (es.eigenvalues().maxCoeff() > 0) {
      rep.quadratic_form_pass = false;
      if (!rep.witness)
        rep.witness = es.eigenvectors().col(es.eigenvalues().size() - 1);
    }
    for (int s = 0; s < sample_count; ++s) {
      Vector e(n * nn);
      for (int d = 0; d < e.size(); ++d) e(d) = 2.0 * rng.next() - 1.0;
      double norm = e.norm();
      if (norm < 1e-12) continue;
      e /= norm;
      double val = e.dot(mk * e);
      worst = std::max(worst, val);
      if (val > 0 && !rep.witness) {
        rep.quadratic_form_pass = false;
        rep.witness = e;
      }
    }
  }
  rep.worst_sample_value = worst;
  rep.samples = sample_count;
  return rep;
}

std::string gains_to_json(const GainSet& gains) {
  json out;
  out["certified_gamma2"] = gains.certified_gamma2;
  out["m0"] = gains.m0;
  out["xy_residual"] = gains.xy_residual;
  json pj = json::array();
  for (const auto& p : gains.P_by_state) pj.push_back(matrix_to_json(p));
  out["P_by_state"] = pj;
  json kj = json::array();
  for (const auto& [key, mat] : gains.K) {
    kj.push_back({{"node", std::get<0>(key)},
                  {"from", std::get<1>(key)},
                  {"state", std::get<2>(key)},
                  {"value", matrix_to_json(mat)}});
  }
  out["K"] = kj;
  json lj = json::array();
  for (const auto& [key, mat] : gains.L) {
    lj.push_back({{"node", key.first},
                  {"state", key.second},
                  {"value", matrix_to_json(mat)}});
  }
  out["L"] = lj;
  json klj = json::array();
  for (const auto& [key, mat] : gains.K_local) {
    klj.push_back({{"node", std::get<0>(key)},
                   {"from", std::get<1>(key)},
                   {"local_state", std::get<2>(key)},
                   {"value", matrix_to_json(mat)}});
  }
  out["K_local"] = klj;
  json llj = json::array();
  for (const auto& [key, mat] : gains.L_local) {
    llj.push_back({{"node", key.first},
                   {"local_state", key.second},
                   {"value", matrix_to_json(mat)}});
  }
  out["L_local"] = llj;
  return out.dump(2);
}

GainSet gains_from_json(const std::string& text) {
  json j = json::parse(text);
  GainSet out;
  out.certified_gamma2 = j.at("certified_gamma2").get<double>();
  out.m0 = j.value("m0", 1);
  out.xy_residual = j.value("xy_residual", 0.0);
  for (const auto& p : j.at("P_by_state"))
    out.P_by_state.push_back(matrix_from_json(p));
  for (const auto& e : j.at("K")) {
    out.K[{e.at("node").get<int>(), e.at("from").get<int>(),
           e.at("state").get<int>()}] = matrix_from_json(e.at("value"));
  }
  for (const auto& e : j.at("L")) {
    out.L[{e.at("node").get<int>(), e.at("state").get<int>()}] =
        matrix_from_json(e.at("value"));
  }
  if (j.contains("K_local")) {
    for (const auto& e : j["K_local"]) {
      out.K_local[{e.at("node").get<int>(), e.at("from").get<int>(),
                   e.at("local_state").get<int>()}] =
          matrix_from_json(e.at("value"));
    }
  }
  if (j.contains("L_local")) {
    for (const auto& e : j["L_local"]) {
      out.L_local[{e.at("node").get<int>(), e.at("local_state").get<int>()}] =
          matrix_from_json(e.at("value"));
    }
  }
  return out;
}

}  // namespace hinfcon
