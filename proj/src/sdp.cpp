#include "hinfcon/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hinfcon {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::InfeasibleSuspected: return "infeasible-suspected";
    case SolveStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

std::string FeasibilityReport::residual_csv() const {
  std::ostringstream os;
  os << "iteration,margin,rank_residual\n";
  os.precision(17);
  for (const auto& r : residual_history)
    os << r.iteration << "," << r.margin << "," << r.rank_residual << "\n";
  return os.str();
}

double worst_slack(const LmiProblem& p, const Vector& v) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : p.constraints()) worst = std::max(worst, c.slack(v));
  return worst;
}

std::vector<std::pair<std::string, double>> min_slack_eig(const LmiProblem& p,
                                                          const Vector& v) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(p.constraints().size());
  for (const auto& c : p.constraints()) out.emplace_back(c.name, c.slack(v));
  return out;
}

double rank_residual(const LmiProblem& p, const RankConstraint& rc,
                     const Vector& v) {
  const Matrix y = p.get_matrix(v, rc.y_var);
  const Matrix x = p.get_matrix(v, rc.x_var);
  const int n = static_cast<int>(y.rows());
  Matrix w(2 * n, 2 * n);
  w.topLeftCorner(n, n) = y;
  w.topRightCorner(n, n) = Matrix::Identity(n, n);
  w.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
  w.bottomRightCorner(n, n) = x;
  Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
  Vector a = es.eigenvalues().cwiseAbs();
  std::sort(a.data(), a.data() + a.size(), std::greater<double>());
  if (a(0) <= 0) return 0.0;
  return a(rc.max_rank) / a(0);
}

double effective_eps(const LmiProblem& p, const SolverOptions& opts) {
  if (opts.eps_feas > 0) return opts.eps_feas;
  double max_norm = 0;
  for (const auto& c : p.constraints()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(c.constant, Eigen::EigenvaluesOnly);
    max_norm = std::max(max_norm, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return 1e-7 * (1.0 + max_norm);
}

namespace {

// Shared Newton machinery over the packed variable vector. Constraints are in
// negative-definite normal form F_c(v) < 0.
class BarrierEngine {
 public:
  BarrierEngine(const LmiProblem& p, const SolverOptions& opts)
      : p_(p), opts_(opts) {
    m_ = p.total_size();
    // component -> dense index (every component of every variable is active
    // because positivity constraints touch them all; keep a map anyway)
    comp_index_.assign(m_, -1);
    for (const auto& c : p.constraints())
      for (int g : c.comps)
        if (comp_index_[g] < 0) comp_index_[g] = 0;
    active_.clear();
    for (int g = 0; g < m_; ++g)
      if (comp_index_[g] == 0) {
        comp_index_[g] = static_cast<int>(active_.size());
        active_.push_back(g);
      }
    ma_ = static_cast<int>(active_.size());
  }

  int newton_spent() const { return newtons_; }
  bool budget_left() const { return newtons_ < opts_.max_newton; }

  // Phase-I: minimize t s.t. F_c(v) <= t I, following the barrier path.
  // Stops as soon as margin(v) <= stop_margin (or budget/path exhausted).
  // Returns best point found.
  std::pair<Vector, double> phase1(Vector v, double stop_margin) {
    double margin = worst_slack(p_, v);
    double t = margin + 0.1 * std::abs(margin) + 1.0;
    Vector best_v = v;
    double best_margin = margin;
    double mu = opts_.mu0;
    Vector g(ma_ + 1);
    Matrix h(ma_ + 1, ma_ + 1);
    while (mu > opts_.mu_min && budget_left()) {
      for (int it = 0; it < 120 && budget_left(); ++it) {
        ++newtons_;
        g.setZero();
        h.setZero();
        bool ok = accumulate_phase1(v, t, g, h);
        if (!ok) return {best_v, best_margin};  // should not happen
        g(ma_) += 1.0 / mu;
        for (int d = 0; d <= ma_; ++d) h(d, d) += 1e-12;
        Vector dir = solve_direction(h, g);
        double lam2 = -g.dot(dir);
        double f0 = phase1_objective(v, t, mu);
        double step = 1.0;
        Vector vn = v;
        double tn = t;
        while (step > 1e-13) {
          vn = v;
          for (int d = 0; d < ma_; ++d) vn(active_[d]) += step * dir(d);
          tn = t + step * dir(ma_);
          double fn = phase1_objective(vn, tn, mu);
          if (std::isfinite(fn) && fn <= f0 - 0.25 * step * lam2) break;
          step *= 0.5;
        }
        v = vn;
        t = tn;
        margin = worst_slack(p_, v);
        if (margin < best_margin) {
          best_margin = margin;
          best_v = v;
        }
        if (best_margin <= stop_margin) return {best_v, best_margin};
        if (lam2 * 0.5 < 1e-3) break;
      }
      mu *= opts_.mu_shrink;
    }
    return {best_v, best_margin};
  }

  // Proximal projection: min 1/2|v - target|^2 - mu sum log det(-F_c(v) - shift I),
  // mu swept over the given schedule. Start must satisfy margin < -shift.
  Vector prox(Vector v, const Vector& target, double shift,
              const std::vector<double>& mus) {
    Vector g(ma_);
    Matrix h(ma_, ma_);
    for (double mu : mus) {
      for (int it = 0; it < 60 && budget_left(); ++it) {
        ++newtons_;
        g.setZero();
        h.setZero();
        for (int d = 0; d < ma_; ++d) {
          g(d) = v(active_[d]) - target(active_[d]);
          h(d, d) = 1.0;
        }
        if (!accumulate_prox(v, shift, mu, g, h)) return v;
        Vector dir = solve_direction(h, g);
        double lam2 = -g.dot(dir);
        double f0 = prox_objective(v, target, shift, mu);
        double step = 1.0;
        Vector vn = v;
        while (step > 1e-13) {
          vn = v;
          for (int d = 0; d < ma_; ++d) vn(active_[d]) += step * dir(d);
          double fn = prox_objective(vn, target, shift, mu);
          if (std::isfinite(fn) && fn <= f0 - 0.25 * step * lam2) break;
          step *= 0.5;
        }
        v = vn;
        if (lam2 * 0.5 < 1e-11) break;
      }
    }
    return v;
  }

 private:
  static Vector solve_direction(const Matrix& h, const Vector& g) {
    Eigen::LDLT<Matrix> ldlt(h);
    if (ldlt.info() == Eigen::Success) {
      Vector d = ldlt.solve(-g);
      if (d.allFinite()) return d;
    }
    return h.colPivHouseholderQr().solve(-g);
  }

  double phase1_objective(const Vector& v, double t, double mu) const {
    double s = t / mu;
    for (const auto& c : p_.constraints()) {
      Matrix slab = t * Matrix::Identity(c.dim, c.dim) - c.evaluate(v);
      Eigen::LLT<Matrix> llt(slab);
      if (llt.info() != Eigen::Success)
        return std::numeric_limits<double>::infinity();
      s -= 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }
    return s;
  }

  double prox_objective(const Vector& v, const Vector& target, double shift,
                        double mu) const {
    double s = 0;
    for (int d = 0; d < ma_; ++d) {
      double diff = v(active_[d]) - target(active_[d]);
      s += 0.5 * diff * diff;
    }
    for (const auto& c : p_.constraints()) {
      Matrix slab = -c.evaluate(v) - shift * Matrix::Identity(c.dim, c.dim);
      Eigen::LLT<Matrix> llt(slab);
      if (llt.info() != Eigen::Success)
        return std::numeric_limits<double>::infinity();
      s -= mu * 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }
    return s;
  }

  bool accumulate_phase1(const Vector& v, double t, Vector& g, Matrix& h) const {
    for (const auto& c : p_.constraints()) {
      Matrix slab = t * Matrix::Identity(c.dim, c.dim) - c.evaluate(v);
      Eigen::LLT<Matrix> llt(slab);
      if (llt.info() != Eigen::Success) return false;
      Matrix si = llt.solve(Matrix::Identity(c.dim, c.dim));
      const int nc = static_cast<int>(c.comps.size());
      std::vector<Matrix> w(nc);
      for (int a = 0; a < nc; ++a) w[a] = si * c.coeffs[a];
      for (int a = 0; a < nc; ++a) {
        const int ia = comp_index_[c.comps[a]];
        g(ia) += w[a].trace();
        // d/dt of tr(S^-1 T_a) = -tr(S^-1 S^-1 T_a)
        h(ia, ma_) -= (si * w[a]).trace();
        for (int b = a; b < nc; ++b) {
          const int ib = comp_index_[c.comps[b]];
          double val = w[a].cwiseProduct(w[b].transpose()).sum();
          h(ia, ib) += val;
          if (ib != ia) h(ib, ia) += val;
        }
      }
      g(ma_) -= si.trace();
      h(ma_, ma_) += si.cwiseProduct(si).sum();
    }
    for (int d = 0; d < ma_; ++d) h(ma_, d) = h(d, ma_);
    return true;
  }

  bool accumulate_prox(const Vector& v, double shift, double mu, Vector& g,
                       Matrix& h) const {
    for (const auto& c : p_.constraints()) {
      Matrix slab = -c.evaluate(v) - shift * Matrix::Identity(c.dim, c.dim);
      Eigen::LLT<Matrix> llt(slab);
      if (llt.info() != Eigen::Success) return false;
      Matrix si = llt.solve(Matrix::Identity(c.dim, c.dim));
      const int nc = static_cast<int>(c.comps.size());
      std::vector<Matrix> w(nc);
      for (int a = 0; a < nc; ++a) w[a] = si * c.coeffs[a];
      for (int a = 0; a < nc; ++a) {
        const int ia = comp_index_[c.comps[a]];
        g(ia) += mu * w[a].trace();
        for (int b = a; b < nc; ++b) {
          const int ib = comp_index_[c.comps[b]];
          double val = mu * w[a].cwiseProduct(w[b].transpose()).sum();
          h(ia, ib) += val;
          if (ib != ia) h(ib, ia) += val;
        }
      }
    }
    return true;
  }

  const LmiProblem& p_;
  const SolverOptions& opts_;
  int m_ = 0, ma_ = 0;
  std::vector<int> active_;
  std::vector<int> comp_index_;
  int newtons_ = 0;
};

void snap_rank_pairs(const LmiProblem& p, Vector& v) {
  for (const auto& rc : p.rank_constraints()) {
    Matrix x = p.get_matrix(v, rc.x_var);
    Eigen::LLT<Matrix> llt(x);
    if (llt.info() != Eigen::Success) continue;  // leave Y as is
    Matrix xinv = llt.solve(Matrix::Identity(x.rows(), x.cols()));
    p.set_matrix(v, rc.y_var, 0.5 * (xinv + xinv.transpose()));
  }
}

double max_rank_residual(const LmiProblem& p, const Vector& v) {
  double r = 0;
  for (const auto& rc : p.rank_constraints())
    r = std::max(r, rank_residual(p, rc, v));
  return r;
}

// Truncated-eigendecomposition projection of each rank block; overwrites the
// (Y, X) corners with the corners of the rank-limited PSD matrix.
void rank_project(const LmiProblem& p, Vector& v) {
  for (const auto& rc : p.rank_constraints()) {
    const Matrix y = p.get_matrix(v, rc.y_var);
    const Matrix x = p.get_matrix(v, rc.x_var);
    const int n = static_cast<int>(y.rows());
    Matrix w(2 * n, 2 * n);
    w.topLeftCorner(n, n) = y;
    w.topRightCorner(n, n) = Matrix::Identity(n, n);
    w.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
    w.bottomRightCorner(n, n) = x;
    Eigen::SelfAdjointEigenSolver<Matrix> es(w);
    Vector lam = es.eigenvalues();
    std::vector<int> order(2 * n);
    for (int i = 0; i < 2 * n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(lam(a)) > std::abs(lam(b));
    });
    Matrix wp = Matrix::Zero(2 * n, 2 * n);
    for (int t = 0; t < rc.max_rank; ++t) {
      const int i = order[t];
      const double kept = std::max(lam(i), 0.0);
      wp += kept * es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose();
    }
    p.set_matrix(v, rc.y_var, wp.topLeftCorner(n, n));
    p.set_matrix(v, rc.x_var, wp.bottomRightCorner(n, n));
  }
}

}  // namespace

FeasibilityReport solve_feasibility(const LmiProblem& p,
                                    const SolverOptions& opts) {
  FeasibilityReport rep;
  rep.eps_feas_used = effective_eps(p, opts);
  const double eps = rep.eps_feas_used;
  BarrierEngine engine(p, opts);
  const double stop =
      opts.polish ? -opts.polish_factor * eps : -2.0 * eps;
  auto [v, margin] = engine.phase1(p.initial_point(), stop);
  rep.iterations = engine.newton_spent();
  rep.solution.values = v;
  rep.margin = worst_slack(p, v);
  rep.solution.margin = rep.margin;
  rep.residual_history.push_back({rep.iterations, rep.margin, 0.0, true});
  if (rep.margin <= -eps) {
    rep.status = SolveStatus::Feasible;
  } else {
    rep.status = engine.budget_left() ? SolveStatus::InfeasibleSuspected
                                      : SolveStatus::IterationLimit;
  }
  return rep;
}

FeasibilityReport solve_rank_constrained(const LmiProblem& p,
                                         const SolverOptions& opts) {
  if (p.rank_constraints().empty()) return solve_feasibility(p, opts);

  FeasibilityReport rep;
  rep.eps_feas_used = effective_eps(p, opts);
  const double eps = rep.eps_feas_used;
  BarrierEngine engine(p, opts);

  auto [v, margin] = engine.phase1(p.initial_point(), -2.0 * eps);
  double best_res = std::numeric_limits<double>::infinity();
  Vector best_v = v;
  double best_margin = margin;

  const double shift = eps;
  const std::vector<double> mus = {1e-3 * (1 + std::abs(margin)),
                                   1e-6 * (1 + std::abs(margin)),
                                   1e-9 * (1 + std::abs(margin))};

  for (int outer = 0; outer < opts.max_outer && engine.budget_left(); ++outer) {
    // exact substitution test: Y = X^-1 keeps the rank blocks at machine rank n
    Vector snapped = v;
    snap_rank_pairs(p, snapped);
    const double snap_margin = worst_slack(p, snapped);
    const double res = max_rank_residual(p, v);
    const bool accepted = res < best_res;
    if (accepted) {
      best_res = res;
      best_v = v;
      best_margin = worst_slack(p, v);
    }
    rep.residual_history.push_back({outer, worst_slack(p, v), res, accepted});
    if (snap_margin <= -eps) {
      rep.status = SolveStatus::Feasible;
      rep.solution.values = snapped;
      rep.margin = snap_margin;
      rep.solution.margin = snap_margin;
      rep.iterations = engine.newton_spent();
      rep.residual_history.push_back(
          {outer, snap_margin, max_rank_residual(p, snapped), true});
      return rep;
    }
    const double cur_margin = worst_slack(p, v);
    if (cur_margin <= -eps && res <= opts.eps_rank) {
      rep.status = SolveStatus::Feasible;
      rep.solution.values = v;
      rep.margin = cur_margin;
      rep.solution.margin = cur_margin;
      rep.iterations = engine.newton_spent();
      return rep;
    }
    // (b) rank projection, then (a) proximal re-entry into the LMI set
    Vector target = v;
    rank_project(p, target);
    if (worst_slack(p, v) >= -shift) {
      // re-center first so the prox start is strictly inside the shifted set
      auto [vc, mc] = engine.phase1(v, -2.0 * shift);
      v = vc;
      if (worst_slack(p, v) >= -shift) break;  // cannot maintain interior
    }
    v = engine.prox(v, target, shift, mus);
  }

  rep.iterations = engine.newton_spent();
  rep.solution.values = best_v;
  rep.margin = best_margin;
  rep.solution.margin = best_margin;
  rep.status = engine.budget_left() ? SolveStatus::InfeasibleSuspected
                                    : SolveStatus::IterationLimit;
  return rep;
}

}  // namespace hinfcon
