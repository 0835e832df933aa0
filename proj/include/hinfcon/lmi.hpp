#ifndef HINFCON_LMI_HPP
#define HINFCON_LMI_HPP

#include <optional>
#include <string>
#include <vector>

#include "hinfcon/model.hpp"
#include "hinfcon/network.hpp"

namespace hinfcon {

enum class VarKind { SymmetricMatrix, Scalar };

struct VariableDecl {
  std::string name;
  VarKind kind;
  int dim;     // matrix edge length; 1 for scalars
  int offset;  // first component index in the packed vector
  int size;    // dim*(dim+1)/2 for matrices, 1 for scalars
};

/// One affine symmetric-matrix constraint, stored in negative-definite
/// normal form: constant + sum_g v[comps[g]] * coeffs[g]  must be < 0.
/// `flipped` records that the source inequality was "> 0".
struct LmiConstraint {
  std::string name;
  int dim = 0;
  bool flipped = false;
  Matrix constant;
  std::vector<int> comps;
  std::vector<Matrix> coeffs;

  Matrix evaluate(const Vector& v) const;
  /// Largest eigenvalue of the normal form at v (negative = satisfied).
  double slack(const Vector& v) const;
};

/// rank [[Y, I], [I, X]] <= max_rank over the two named matrix variables.
struct RankConstraint {
  std::string name;
  int y_var = -1;
  int x_var = -1;
  int max_rank = 0;
};

struct LmiSolution {
  Vector values;
  double margin = 0.0;  // most positive slack across constraints
};

/// Affine-in-variables LMI feasibility problem over named symmetric-matrix
/// and positive-scalar decision variables.
class LmiProblem {
 public:
  int add_symmetric_var(const std::string& name, int dim);
  int add_scalar_var(const std::string& name);
  void add_constraint(LmiConstraint c) { constraints_.push_back(std::move(c)); }
  void add_rank_constraint(RankConstraint r) { ranks_.push_back(std::move(r)); }

  int total_size() const { return total_; }
  const std::vector<VariableDecl>& variables() const { return vars_; }
  const std::vector<LmiConstraint>& constraints() const { return constraints_; }
  const std::vector<RankConstraint>& rank_constraints() const { return ranks_; }
  int var_index(const std::string& name) const;
  const VariableDecl& var(int index) const { return vars_[index]; }

  Matrix get_matrix(const Vector& v, int var) const;
  void set_matrix(Vector& v, int var, const Matrix& value) const;
  double get_scalar(const Vector& v, int var) const;
  void set_scalar(Vector& v, int var, double value) const;

  /// X = I, scalars = 1.
  Vector initial_point() const;

  /// Debug dump: variable names/shapes and constraint constants.
  std::string debug_dump_json() const;

 private:
  std::vector<VariableDecl> vars_;
  std::vector<LmiConstraint> constraints_;
  std::vector<RankConstraint> ranks_;
  int total_ = 0;
};

/// Builder for block-partitioned symmetric affine constraints. Rows/columns
/// are declared once; terms are lowered onto per-component dense coefficient
/// matrices.
class ConstraintBuilder {
 public:
  ConstraintBuilder(const LmiProblem& p, std::string name,
                    std::vector<int> block_sizes);

  /// constant M at block (r,c); transposed copy mirrored when r != c.
  void add_const(int r, int c, const Matrix& m);
  /// X*S + S'*X at diagonal block (r,r) for symmetric variable X.
  void add_sym_pair(int var, const Matrix& s, int r);
  /// scale * X at diagonal block (r,r).
  void add_scaled(int var, double scale, int r);
  /// L*X*R at block (r,c), r != c; transpose mirrored.
  void add_off(int var, const Matrix& l, const Matrix& r_mat, int r, int c);
  /// scalar v * M at block (r,c); mirrored when off-diagonal.
  void add_scalar_term(int var, const Matrix& m, int r, int c);

  LmiConstraint build(bool flipped = false);

 private:
  Matrix& coeff_for(int comp);
  const LmiProblem& problem_;
  std::string name_;
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int dim_;
  Matrix constant_;
  std::vector<int> comps_;
  std::vector<Matrix> coeffs_;
};

/// Synthesis modes of the assembled systems.
enum class SynthesisMode { GlobalTheorem1, GlobalCorollary1, LocalTheorem2 };

/// Assembles the paper's constraint families over a fixed variable registry.
/// Variables: X_i^k per (node, global state); tau_i^k when alpha_i > 0;
/// theta_ij^k / vartheta_ij^k per in-edge with beta_ij > 0; Y_i^k in local
/// (rank-constrained) mode.
class LmiAssembler {
 public:
  LmiAssembler(const PlantModel& pm, const MeasurementModel& mm,
               const ChannelModel& cm, const SwitchingNetwork& net,
               const UncertaintyBudget& budget, SynthesisMode mode);

  const LmiProblem& problem() const { return problem_; }
  SynthesisMode mode() const { return mode_; }
  const PlantModel& plant() const { return pm_; }
  const MeasurementModel& measurements() const { return mm_; }
  const ChannelModel& channels() const { return cm_; }
  const SwitchingNetwork& network() const { return net_; }
  const UncertaintyBudget& budget() const { return budget_; }

  int x_var(int node, int global) const;
  int y_var(int node, int global) const;  // -1 unless local mode
  bool has_y() const { return mode_ == SynthesisMode::LocalTheorem2; }

  /// One constraint per (i,k) with alpha_i>0 and per edge with beta_ij>0.
  std::vector<LmiConstraint> assemble_scalar_lmis() const;
  /// The Theorem-1 block LMI for (i,k); rows with zero width are dropped.
  LmiConstraint assemble_main_lmi(int node, int global) const;
  /// The Corollary-1 block LMI for (i,k) (no uncertainty machinery).
  LmiConstraint assemble_corollary_lmi(int node, int global) const;
  /// The Delta-LMIs for (i,k); empty when the conditioning set is a
  /// singleton (the deviations vanish identically).
  std::vector<LmiConstraint> assemble_delta_lmis(int node, int global) const;
  /// rank [[Y_i^k, I],[I, X_i^k]] <= n.
  RankConstraint assemble_rank_blocks(int node, int global) const;

  /// Positivity of every declared variable, as strict constraints.
  std::vector<LmiConstraint> assemble_positivity() const;

  /// Complete problem for the configured mode.
  LmiProblem build() const;

  // resolved per-instance data, shared with gain synthesis
  Matrix E(int node, int global) const { return e_[idx(node, global)]; }
  Matrix Einv(int node, int global) const { return einv_[idx(node, global)]; }
  Matrix Finv(int i, int j) const;

 private:
  int idx(int node, int global) const { return (node - 1) * m_ + (global - 1); }
  bool has_tau(int node) const;
  bool has_theta(int i, int j) const;

  const PlantModel& pm_;
  const MeasurementModel& mm_;
  const ChannelModel& cm_;
  const SwitchingNetwork& net_;
  const UncertaintyBudget& budget_;
  SynthesisMode mode_;
  int n_, nn_, m_;
  LmiProblem problem_;
  std::vector<Matrix> e_, einv_;
  std::map<std::pair<int, int>, Matrix> finv_;
  std::map<std::tuple<int, int>, int> xvar_, yvar_, tauvar_;
  std::map<std::tuple<int, int, int>, int> thetavar_, varthetavar_;

 public:
  int tau_var(int node, int global) const;
  int theta_var(int i, int j, int global) const;
  int vartheta_var(int i, int j, int global) const;
};

}  // namespace hinfcon

#endif
