#include "hinfcon/lmi.hpp"

#include <json.hpp>

#include <sstream>
#include <stdexcept>

namespace hinfcon {

using nlohmann::json;

Matrix LmiConstraint::evaluate(const Vector& v) const {
  Matrix out = constant;
  for (size_t g = 0; g < comps.size(); ++g) out += v(comps[g]) * coeffs[g];
  return out;
}

double LmiConstraint::slack(const Vector& v) const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(evaluate(v), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

int LmiProblem::add_symmetric_var(const std::string& name, int dim) {
  const int size = dim * (dim + 1) / 2;
  vars_.push_back({name, VarKind::SymmetricMatrix, dim, total_, size});
  total_ += size;
  return static_cast<int>(vars_.size()) - 1;
}

int LmiProblem::add_scalar_var(const std::string& name) {
  vars_.push_back({name, VarKind::Scalar, 1, total_, 1});
  total_ += 1;
  return static_cast<int>(vars_.size()) - 1;
}

int LmiProblem::var_index(const std::string& name) const {
  for (size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<int>(i);
  throw std::out_of_range("LmiProblem: no variable named " + name);
}

Matrix LmiProblem::get_matrix(const Vector& v, int var) const {
  const auto& d = vars_[var];
  if (d.kind != VarKind::SymmetricMatrix)
    throw std::invalid_argument("get_matrix on a scalar variable");
  Matrix out(d.dim, d.dim);
  int t = 0;
  for (int a = 0; a < d.dim; ++a)
    for (int b = a; b < d.dim; ++b) {
      out(a, b) = out(b, a) = v(d.offset + t);
      ++t;
    }
  return out;
}

void LmiProblem::set_matrix(Vector& v, int var, const Matrix& value) const {
  const auto& d = vars_[var];
  if (d.kind != VarKind::SymmetricMatrix)
    throw std::invalid_argument("set_matrix on a scalar variable");
  int t = 0;
  for (int a = 0; a < d.dim; ++a)
    for (int b = a; b < d.dim; ++b) {
      v(d.offset + t) = 0.5 * (value(a, b) + value(b, a));
      ++t;
    }
}

double LmiProblem::get_scalar(const Vector& v, int var) const {
  return v(vars_[var].offset);
}

void LmiProblem::set_scalar(Vector& v, int var, double value) const {
  v(vars_[var].offset) = value;
}

Vector LmiProblem::initial_point() const {
  Vector v = Vector::Zero(total_);
  for (const auto& d : vars_) {
    if (d.kind == VarKind::SymmetricMatrix) {
      int t = 0;
      for (int a = 0; a < d.dim; ++a)
        for (int b = a; b < d.dim; ++b) {
          v(d.offset + t) = (a == b) ? 1.0 : 0.0;
          ++t;
        }
    } else {
      v(d.offset) = 1.0;
    }
  }
  return v;
}

std::string LmiProblem::debug_dump_json() const {
  json out;
  out["variables"] = json::array();
  for (const auto& d : vars_) {
    out["variables"].push_back(
        {{"name", d.name},
         {"kind", d.kind == VarKind::SymmetricMatrix ? "symmetric" : "scalar"},
         {"dim", d.dim},
         {"offset", d.offset},
         {"size", d.size}});
  }
  out["constraints"] = json::array();
  for (const auto& c : constraints_) {
    json rows = json::array();
    for (int r = 0; r < c.dim; ++r) {
      json row = json::array();
      for (int cc = 0; cc < c.dim; ++cc) row.push_back(c.constant(r, cc));
      rows.push_back(row);
    }
    out["constraints"].push_back({{"name", c.name},
                                  {"dim", c.dim},
                                  {"sense", c.flipped ? "pd" : "nd"},
                                  {"term_count", c.comps.size()},
                                  {"constant", rows}});
  }
  out["rank_constraints"] = json::array();
  for (const auto& r : ranks_) {
    out["rank_constraints"].push_back({{"name", r.name},
                                       {"y", vars_[r.y_var].name},
                                       {"x", vars_[r.x_var].name},
                                       {"max_rank", r.max_rank}});
  }
  return out.dump(2);
}

ConstraintBuilder::ConstraintBuilder(const LmiProblem& p, std::string name,
                                     std::vector<int> block_sizes)
    : problem_(p), name_(std::move(name)), sizes_(std::move(block_sizes)) {
  offsets_.resize(sizes_.size() + 1, 0);
  for (size_t i = 0; i < sizes_.size(); ++i)
    offsets_[i + 1] = offsets_[i] + sizes_[i];
  dim_ = offsets_.back();
  constant_ = Matrix::Zero(dim_, dim_);
}

Matrix& ConstraintBuilder::coeff_for(int comp) {
  for (size_t i = 0; i < comps_.size(); ++i)
    if (comps_[i] == comp) return coeffs_[i];
  comps_.push_back(comp);
  coeffs_.emplace_back(Matrix::Zero(dim_, dim_));
  return coeffs_.back();
}

void ConstraintBuilder::add_const(int r, int c, const Matrix& m) {
  constant_.block(offsets_[r], offsets_[c], sizes_[r], sizes_[c]) += m;
  if (r != c)
    constant_.block(offsets_[c], offsets_[r], sizes_[c], sizes_[r]) +=
        m.transpose();
}

namespace {
// basis matrix for the (a,b) component of a symmetric variable
Matrix sym_basis(int dim, int a, int b) {
  Matrix out = Matrix::Zero(dim, dim);
  out(a, b) = 1.0;
  out(b, a) = 1.0;
  if (a == b) out(a, a) = 1.0;
  return out;
}
}  // namespace

void ConstraintBuilder::add_sym_pair(int var, const Matrix& s, int r) {
  const auto& d = problem_.var(var);
  int t = 0;
  for (int a = 0; a < d.dim; ++a)
    for (int b = a; b < d.dim; ++b) {
      Matrix p = sym_basis(d.dim, a, b) * s;
      Matrix& coef = coeff_for(d.offset + t);
      coef.block(offsets_[r], offsets_[r], sizes_[r], sizes_[r]) +=
          p + p.transpose();
      ++t;
    }
}

void ConstraintBuilder::add_scaled(int var, double scale, int r) {
  const auto& d = problem_.var(var);
  int t = 0;
  for (int a = 0; a < d.dim; ++a)
    for (int b = a; b < d.dim; ++b) {
      Matrix& coef = coeff_for(d.offset + t);
      coef.block(offsets_[r], offsets_[r], sizes_[r], sizes_[r]) +=
          scale * sym_basis(d.dim, a, b);
      ++t;
    }
}

void ConstraintBuilder::add_off(int var, const Matrix& l, const Matrix& r_mat,
                                int r, int c) {
  if (r == c) throw std::invalid_argument("add_off requires r != c");
  const auto& d = problem_.var(var);
  int t = 0;
  for (int a = 0; a < d.dim; ++a)
    for (int b = a; b < d.dim; ++b) {
      Matrix p = l * sym_basis(d.dim, a, b) * r_mat;
      Matrix& coef = coeff_for(d.offset + t);
      coef.block(offsets_[r], offsets_[c], sizes_[r], sizes_[c]) += p;
      coef.block(offsets_[c], offsets_[r], sizes_[c], sizes_[r]) +=
          p.transpose();
      ++t;
    }
}

void ConstraintBuilder::add_scalar_term(int var, const Matrix& m, int r, int c) {
  const auto& d = problem_.var(var);
  Matrix& coef = coeff_for(d.offset);
  coef.block(offsets_[r], offsets_[c], sizes_[r], sizes_[c]) += m;
  if (r != c)
    coef.block(offsets_[c], offsets_[r], sizes_[c], sizes_[r]) += m.transpose();
}

LmiConstraint ConstraintBuilder::build(bool flipped) {
  LmiConstraint out;
  out.name = name_;
  out.dim = dim_;
  out.flipped = flipped;
  out.constant = std::move(constant_);
  out.comps = std::move(comps_);
  out.coeffs = std::move(coeffs_);
  return out;
}

// ---------------------------------------------------------------------------

LmiAssembler::LmiAssembler(const PlantModel& pm, const MeasurementModel& mm,
                           const ChannelModel& cm, const SwitchingNetwork& net,
                           const UncertaintyBudget& budget, SynthesisMode mode)
    : pm_(pm), mm_(mm), cm_(cm), net_(net), budget_(budget), mode_(mode) {
  n_ = pm.state_dim();
  nn_ = net.node_count();
  m_ = net.global_count();
  e_.resize(nn_ * m_);
  einv_.resize(nn_ * m_);
  for (int i = 1; i <= nn_; ++i) {
    for (int k = 1; k <= m_; ++k) {
      e_[idx(i, k)] = noise_shape_E(mm_, i, k);
      einv_[idx(i, k)] = e_[idx(i, k)].inverse();
    }
  }
  for (const auto& [i, j] : net.edge_union()) {
    finv_[{i, j}] = noise_shape_F(cm_, i, j).inverse();
  }

  for (int i = 1; i <= nn_; ++i)
    for (int k = 1; k <= m_; ++k) {
      std::ostringstream nm;
      nm << "X_" << i << "^" << k;
      xvar_[{i, k}] = problem_.add_symmetric_var(nm.str(), n_);
    }
  if (mode_ == SynthesisMode::LocalTheorem2) {
    for (int i = 1; i <= nn_; ++i)
      for (int k = 1; k <= m_; ++k) {
        std::ostringstream nm;
        nm << "Y_" << i << "^" << k;
        yvar_[{i, k}] = problem_.add_symmetric_var(nm.str(), n_);
      }
  }
  if (mode_ != SynthesisMode::GlobalCorollary1) {
    for (int i = 1; i <= nn_; ++i) {
      if (!has_tau(i)) continue;
      for (int k = 1; k <= m_; ++k) {
        std::ostringstream nm;
        nm << "tau_" << i << "^" << k;
        tauvar_[{i, k}] = problem_.add_scalar_var(nm.str());
      }
    }
    for (int k = 1; k <= m_; ++k) {
      for (int i = 1; i <= nn_; ++i) {
        for (int j : net_.in_neighbours(i, k)) {
          if (!has_theta(i, j)) continue;
          if (!thetavar_.count({i, j, k})) {
            std::ostringstream nm;
            nm << "theta_" << i << "," << j << "^" << k;
            thetavar_[{i, j, k}] = problem_.add_scalar_var(nm.str());
            std::ostringstream nm2;
            nm2 << "vartheta_" << i << "," << j << "^" << k;
            varthetavar_[{i, j, k}] = problem_.add_scalar_var(nm2.str());
          }
        }
      }
    }
  }
}

bool LmiAssembler::has_tau(int node) const {
  return mode_ != SynthesisMode::GlobalCorollary1 && budget_.alpha2_of(node) > 0;
}

bool LmiAssembler::has_theta(int i, int j) const {
  return mode_ != SynthesisMode::GlobalCorollary1 && budget_.beta2_of(i, j) > 0;
}

int LmiAssembler::x_var(int node, int global) const {
  return xvar_.at({node, global});
}

int LmiAssembler::y_var(int node, int global) const {
  auto it = yvar_.find({node, global});
  return it == yvar_.end() ? -1 : it->second;
}

int LmiAssembler::tau_var(int node, int global) const {
  auto it = tauvar_.find({node, global});
  return it == tauvar_.end() ? -1 : it->second;
}

int LmiAssembler::theta_var(int i, int j, int global) const {
  auto it = thetavar_.find({i, j, global});
  return it == thetavar_.end() ? -1 : it->second;
}

int LmiAssembler::vartheta_var(int i, int j, int global) const {
  auto it = varthetavar_.find({i, j, global});
  return it == varthetavar_.end() ? -1 : it->second;
}

Matrix LmiAssembler::Finv(int i, int j) const { return finv_.at({i, j}); }

std::vector<LmiConstraint> LmiAssembler::assemble_scalar_lmis() const {
  std::vector<LmiConstraint> out;
  const double g2 = budget_.gamma2;
  for (int k = 1; k <= m_; ++k) {
    for (int i = 1; i <= nn_; ++i) {
      if (has_tau(i)) {
        // gamma^2 I - tau alpha^2 E > 0, stored negated
        const Matrix& e = e_[idx(i, k)];
        std::ostringstream nm;
        nm << "scalar_tau_" << i << "^" << k;
        ConstraintBuilder b(problem_, nm.str(), {static_cast<int>(e.rows())});
        b.add_const(0, 0, -g2 * Matrix::Identity(e.rows(), e.cols()));
        b.add_scalar_term(tau_var(i, k), budget_.alpha2_of(i) * e, 0, 0);
        out.push_back(b.build(true));
      }
      for (int j : net_.in_neighbours(i, k)) {
        if (!has_theta(i, j)) continue;
        Matrix f = noise_shape_F(cm_, i, j);
        std::ostringstream nm;
        nm << "scalar_theta_" << i << "," << j << "^" << k;
        ConstraintBuilder b(problem_, nm.str(), {static_cast<int>(f.rows())});
        b.add_const(0, 0, -g2 * Matrix::Identity(f.rows(), f.cols()));
        b.add_scalar_term(theta_var(i, j, k), budget_.beta2_of(i, j) * f, 0, 0);
        out.push_back(b.build(true));
      }
    }
  }
  return out;
}

LmiConstraint LmiAssembler::assemble_main_lmi(int node, int global) const {
  const int i = node, k = global;
  const double g2 = budget_.gamma2;
  const auto& trip = mm_.at(i, k);
  const Matrix& einv = einv_[idx(i, k)];
  const auto nbrs = net_.in_neighbours(i, k);
  auto [p_i, q_i] = degrees(net_.graph(k), i);

  const int l = pm_.disturbance_dim();
  const int l_i = static_cast<int>(trip.Dbar.cols());

  // scalar entries of the T block, in the paper's order: tau, thetas, varthetas
  std::vector<int> t_entries;
  if (has_tau(i)) t_entries.push_back(tau_var(i, k));
  for (int j : nbrs)
    if (has_theta(i, j)) t_entries.push_back(theta_var(i, j, k));
  for (int j : nbrs)
    if (has_theta(i, j)) t_entries.push_back(vartheta_var(i, j, k));

  std::vector<int> blocks = {n_, l, l_i};
  for (size_t t = 0; t < t_entries.size(); ++t) blocks.push_back(n_);
  for (size_t t = 0; t < nbrs.size(); ++t) blocks.push_back(n_);

  std::ostringstream nm;
  nm << "main_" << i << "^" << k;
  ConstraintBuilder b(problem_, nm.str(), blocks);

  // Q block
  Matrix s0 = pm_.A + budget_.delta_of(i) * Matrix::Identity(n_, n_) -
              pm_.B2 * trip.D.transpose() * einv * trip.C;
  b.add_sym_pair(x_var(i, k), s0, 0);
  for (int lstate = 1; lstate <= m_; ++lstate)
    b.add_scaled(x_var(i, lstate), net_.generator().rate(k, lstate), 0);
  Matrix q_const = (p_i + q_i) * Matrix::Identity(n_, n_) -
                   g2 * trip.C.transpose() * einv * trip.C;
  for (int j : nbrs)
    q_const -= g2 * cm_.H(i, j).transpose() * Finv(i, j) * cm_.H(i, j);
  b.add_const(0, 0, q_const);
  // incoming vartheta coupling: nodes j receiving from i with beta_ji > 0
  for (int j = 1; j <= nn_; ++j) {
    if (j == i) continue;
    if (net_.graph(k).has_edge(j, i) && has_theta(j, i)) {
      b.add_scalar_term(vartheta_var(j, i, k),
                        budget_.beta2_of(j, i) *
                            cm_.H(j, i).transpose() * cm_.H(j, i),
                        0, 0);
    }
  }

  // N row: (I - D' E^-1 D) B2' X
  Matrix n_left = (Matrix::Identity(l, l) - trip.D.transpose() * einv * trip.D) *
                  pm_.B2.transpose();
  b.add_off(x_var(i, k), n_left, Matrix::Identity(n_, n_), 1, 0);
  b.add_const(1, 1, -g2 * Matrix::Identity(l, l));

  // S row: -Dbar' E^-1 D B2' X
  Matrix s_left = -trip.Dbar.transpose() * einv * trip.D * pm_.B2.transpose();
  b.add_off(x_var(i, k), s_left, Matrix::Identity(n_, n_), 2, 0);
  b.add_const(2, 2, -g2 * Matrix::Identity(l_i, l_i));

  // T rows: stacked X against -diag(tau, theta..., vartheta...)
  for (size_t t = 0; t < t_entries.size(); ++t) {
    const int r = 3 + static_cast<int>(t);
    b.add_off(x_var(i, k), Matrix::Identity(n_, n_), Matrix::Identity(n_, n_),
              r, 0);
    b.add_scalar_term(t_entries[t], -Matrix::Identity(n_, n_), r, r);
  }

  // Xi rows and Z diagonal
  for (size_t jj = 0; jj < nbrs.size(); ++jj) {
    const int j = nbrs[jj];
    const int r = 3 + static_cast<int>(t_entries.size()) + static_cast<int>(jj);
    Matrix xi = g2 * cm_.H(i, j).transpose() * Finv(i, j) * cm_.H(i, j) -
                Matrix::Identity(n_, n_);
    b.add_const(r, 0, xi.transpose());
    auto [p_j, q_j] = degrees(net_.graph(k), j);
    b.add_scaled(x_var(j, k), -2.0 * budget_.delta_of(j) / (q_j + 1.0), r);
  }
  return b.build();
}

LmiConstraint LmiAssembler::assemble_corollary_lmi(int node, int global) const {
  const int i = node, k = global;
  const double g2 = budget_.gamma2;
  const auto& trip = mm_.at(i, k);
  const Matrix& einv = einv_[idx(i, k)];
  const auto nbrs = net_.in_neighbours(i, k);
  auto [p_i, q_i] = degrees(net_.graph(k), i);
  const int l = pm_.disturbance_dim();
  const int l_i = static_cast<int>(trip.Dbar.cols());

  std::vector<int> blocks = {n_, l, l_i};
  for (size_t t = 0; t < nbrs.size(); ++t) blocks.push_back(n_);

  std::ostringstream nm;
  nm << "corollary_" << i << "^" << k;
  ConstraintBuilder b(problem_, nm.str(), blocks);

  Matrix s0 = pm_.A + budget_.delta_of(i) * Matrix::Identity(n_, n_) -
              pm_.B2 * trip.D.transpose() * einv * trip.C;
  b.add_sym_pair(x_var(i, k), s0, 0);
  for (int lstate = 1; lstate <= m_; ++lstate)
    b.add_scaled(x_var(i, lstate), net_.generator().rate(k, lstate), 0);
  Matrix q_const = (p_i + q_i) * Matrix::Identity(n_, n_) -
                   g2 * trip.C.transpose() * einv * trip.C;
  for (int j : nbrs)
    q_const -= g2 * cm_.H(i, j).transpose() * Finv(i, j) * cm_.H(i, j);
  b.add_const(0, 0, q_const);

  Matrix n_left = (Matrix::Identity(l, l) - trip.D.transpose() * einv * trip.D) *
                  pm_.B2.transpose();
  b.add_off(x_var(i, k), n_left, Matrix::Identity(n_, n_), 1, 0);
  b.add_const(1, 1, -g2 * Matrix::Identity(l, l));

  Matrix s_left = -trip.Dbar.transpose() * einv * trip.D * pm_.B2.transpose();
  b.add_off(x_var(i, k), s_left, Matrix::Identity(n_, n_), 2, 0);
  b.add_const(2, 2, -g2 * Matrix::Identity(l_i, l_i));

  for (size_t jj = 0; jj < nbrs.size(); ++jj) {
    const int j = nbrs[jj];
    const int r = 3 + static_cast<int>(jj);
    Matrix xi = g2 * cm_.H(i, j).transpose() * Finv(i, j) * cm_.H(i, j) -
                Matrix::Identity(n_, n_);
    b.add_const(r, 0, xi.transpose());
    auto [p_j, q_j] = degrees(net_.graph(k), j);
    b.add_scaled(x_var(j, k), -2.0 * budget_.delta_of(j) / (q_j + 1.0), r);
  }
  return b.build();
}

std::vector<LmiConstraint> LmiAssembler::assemble_delta_lmis(int node,
                                                             int global) const {
  if (mode_ != SynthesisMode::LocalTheorem2)
    throw std::logic_error("delta LMIs exist only in local (Theorem 2) mode");
  std::vector<LmiConstraint> out;
  const int i = node, k = global;
  const double g2 = budget_.gamma2;
  const int local = net_.mapping().local_state(i, k);
  const auto weights = conditional_weights(net_, i, local);
  if (weights.size() <= 1) return out;  // deviations vanish identically

  // weight of "all others" on Y_i^k, and individual weights on each Y_i^l
  double w_sum_others = 0;
  for (const auto& [l, w] : weights)
    if (l != k) w_sum_others += w;

  const auto& trip = mm_.at(i, k);
  const Matrix ce = trip.C.transpose() * einv_[idx(i, k)];  // n x r_i
  const int r_i = static_cast<int>(ce.cols());

  {
    // [[alpha^2 I, DL],[DL', I]] > 0, stored negated
    std::ostringstream nm;
    nm << "deltaL_" << i << "^" << k;
    ConstraintBuilder b(problem_, nm.str(), {n_, r_i});
    b.add_const(0, 0, -budget_.alpha2_of(i) * Matrix::Identity(n_, n_));
    b.add_const(1, 1, -Matrix::Identity(r_i, r_i));
    b.add_off(y_var(i, k), -g2 * w_sum_others * Matrix::Identity(n_, n_), ce, 0, 1);
    for (const auto& [l, w] : weights) {
      if (l == k) continue;
      b.add_off(y_var(i, l), g2 * w * Matrix::Identity(n_, n_), ce, 0, 1);
    }
    out.push_back(b.build(true));
  }

  for (int j : net_.in_neighbours(i, k)) {
    Matrix hf = cm_.H(i, j).transpose() * Finv(i, j);  // n x r_ij
    const int r_ij = static_cast<int>(hf.cols());
    std::ostringstream nm;
    nm << "deltaK_" << i << "," << j << "^" << k;
    ConstraintBuilder b(problem_, nm.str(), {n_, r_ij});
    b.add_const(0, 0, -budget_.beta2_of(i, j) * Matrix::Identity(n_, n_));
    b.add_const(1, 1, -Matrix::Identity(r_ij, r_ij));
    b.add_off(y_var(i, k), -g2 * w_sum_others * Matrix::Identity(n_, n_), hf, 0, 1);
    for (const auto& [l, w] : weights) {
      if (l == k) continue;
      b.add_off(y_var(i, l), g2 * w * Matrix::Identity(n_, n_), hf, 0, 1);
    }
    out.push_back(b.build(true));
  }
  return out;
}

RankConstraint LmiAssembler::assemble_rank_blocks(int node, int global) const {
  if (mode_ != SynthesisMode::LocalTheorem2)
    throw std::logic_error("rank blocks exist only in local (Theorem 2) mode");
  std::ostringstream nm;
  nm << "rank_" << node << "^" << global;
  return {nm.str(), y_var(node, global), x_var(node, global), n_};
}

std::vector<LmiConstraint> LmiAssembler::assemble_positivity() const {
  std::vector<LmiConstraint> out;
  for (size_t vi = 0; vi < problem_.variables().size(); ++vi) {
    const auto& d = problem_.var(static_cast<int>(vi));
    ConstraintBuilder b(problem_, "positive_" + d.name, {d.dim});
    if (d.kind == VarKind::SymmetricMatrix) {
      b.add_scaled(static_cast<int>(vi), -1.0, 0);
    } else {
      b.add_scalar_term(static_cast<int>(vi), -Matrix::Identity(1, 1), 0, 0);
    }
    out.push_back(b.build(true));
  }
  return out;
}

LmiProblem LmiAssembler::build() const {
  LmiProblem p = problem_;  // copy of the variable registry
  for (auto& c : assemble_positivity()) p.add_constraint(std::move(c));
  if (mode_ != SynthesisMode::GlobalCorollary1) {
    for (auto& c : assemble_scalar_lmis()) p.add_constraint(std::move(c));
  }
  for (int i = 1; i <= nn_; ++i) {
    for (int k = 1; k <= m_; ++k) {
      if (mode_ == SynthesisMode::GlobalCorollary1) {
        p.add_constraint(assemble_corollary_lmi(i, k));
      } else {
        p.add_constraint(assemble_main_lmi(i, k));
      }
    }
  }
  if (mode_ == SynthesisMode::LocalTheorem2) {
    for (int i = 1; i <= nn_; ++i) {
      for (int k = 1; k <= m_; ++k) {
        for (auto& c : assemble_delta_lmis(i, k)) p.add_constraint(std::move(c));
        p.add_rank_constraint(assemble_rank_blocks(i, k));
      }
    }
  }
  return p;
}

}  // namespace hinfcon
