#ifndef HINFCON_DETECTABILITY_HPP
#define HINFCON_DETECTABILITY_HPP

#include <optional>
#include <string>
#include <vector>

#include "hinfcon/model.hpp"
#include "hinfcon/network.hpp"

namespace hinfcon {

/// Orthonormal basis of a subspace of R^ambient; zero columns = {0}.
struct SubspaceBasis {
  int ambient = 0;
  Matrix basis;  // ambient x rank, orthonormal columns
  int rank() const { return static_cast<int>(basis.cols()); }
  bool trivial() const { return rank() == 0; }
};

struct DetectTolerances {
  double eps_rank = 1e-9;  // singular values below eps_rank * s1 are zero
  double eps_pbh = 1e-9;   // Re(lambda) >= -eps_pbh counts as nonnegative
};

/// Kernel of the stacked observability matrix of (C, A); A-invariant.
SubspaceBasis unobservable_subspace(const Matrix& c, const Matrix& a,
                                    const DetectTolerances& tol = {});

/// Unobservable modes of (C, A) with nonnegative real part: the intersection
/// of the unobservable subspace with the antistable spectral subspace,
/// computed on the restriction of A to the unobservable subspace.
SubspaceBasis undetectable_subspace(const Matrix& c, const Matrix& a,
                                    const DetectTolerances& tol = {});

/// Intersection via the nullspace of [P, -Q] over orthonormal bases.
SubspaceBasis intersect(const SubspaceBasis& p, const SubspaceBasis& q,
                        double tol = 1e-9);

/// Span of the union of two subspaces.
SubspaceBasis subspace_sum(const SubspaceBasis& p, const SubspaceBasis& q,
                           double tol = 1e-9);

/// Orthonormal basis from arbitrary spanning columns.
SubspaceBasis orthonormalize(int ambient, const Matrix& columns,
                             double tol = 1e-9);

/// Requires the homogeneous-channel assumption H_ij = H; returns
/// (Hbar^k = L^k kron H, Abar_k = I kron A + (lambda_kk/2) I).
std::pair<Matrix, Matrix> network_observability_pair(const SwitchingNetwork& net,
                                                     const ChannelModel& cm,
                                                     const PlantModel& pm,
                                                     int global);

/// The shared channel matrix H, or an error if edges disagree.
Matrix homogeneous_channel_matrix(const SwitchingNetwork& net,
                                  const ChannelModel& cm);

struct Theorem3StateReport {
  int state = 0;
  bool holds = false;
  int intersection_dim = 0;
  std::optional<Vector> witness;  // a nonzero vector in the intersection
};

struct Theorem3Report {
  std::vector<Theorem3StateReport> per_state;
  bool holds_all() const {
    for (const auto& r : per_state)
      if (!r.holds) return false;
    return !per_state.empty();
  }
};

Theorem3Report check_theorem3(const PlantModel& pm, const SwitchingNetwork& net,
                              const MeasurementModel& mm, const ChannelModel& cm,
                              const DetectTolerances& tol = {});

struct Theorem4StateReport {
  int state = 0;
  bool common_undetectable_trivial = false;        // (a)(i)
  std::vector<bool> channel_separation;            // (a)(ii) per node
  int laplacian_zero_multiplicity = 0;
  bool sufficiency_implied = false;  // multiplicity 1 and (i),(ii) hold
};

struct Theorem4Report {
  std::vector<Theorem4StateReport> per_state;
};

Theorem4Report check_theorem4(const PlantModel& pm, const SwitchingNetwork& net,
                              const MeasurementModel& mm, const ChannelModel& cm,
                              const DetectTolerances& tol = {});

/// JSON rendering of the two reports combined.
std::string detectability_report_json(const Theorem3Report& t3,
                                      const Theorem4Report& t4);

}  // namespace hinfcon

#endif
