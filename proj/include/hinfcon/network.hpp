#ifndef HINFCON_NETWORK_HPP
#define HINFCON_NETWORK_HPP

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hinfcon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A structured validation failure: JSON-ish field path plus message.
struct Violation {
  std::string path;
  std::string message;
};

/// Directed graph without self-loops. adjacency(i,j) = 1 iff node i+1
/// receives from node j+1 (nodes are 1-based at the interface).
class Digraph {
 public:
  Digraph() = default;
  Digraph(int n_nodes, Eigen::MatrixXi adjacency);

  /// Build from 1-based in-neighbour lists, one list per node.
  static Digraph from_in_neighbours(int n_nodes,
                                    const std::vector<std::vector<int>>& vin);

  int node_count() const { return n_nodes_; }
  const Eigen::MatrixXi& adjacency() const { return adjacency_; }
  bool has_edge(int receiver, int transmitter) const;
  /// 1-based in-neighbour list of a 1-based node.
  const std::vector<int>& in_neighbours(int node) const;
  /// Connectivity of the underlying undirected graph.
  bool weakly_connected() const;

 private:
  int n_nodes_ = 0;
  Eigen::MatrixXi adjacency_;
  std::vector<std::vector<int>> vin_;
};

/// L = D_in - A; row sums are exactly zero.
Matrix laplacian(const Digraph& g);

/// (in-degree p_i, out-degree q_i) for the 1-based node i.
std::pair<int, int> degrees(const Digraph& g, int node);

/// Transition rate matrix of a continuous-time Markov chain.
class MarkovGenerator {
 public:
  MarkovGenerator() = default;
  explicit MarkovGenerator(Matrix rates);

  int state_count() const { return static_cast<int>(rates_.rows()); }
  const Matrix& rates() const { return rates_; }
  double rate(int from, int to) const { return rates_(from - 1, to - 1); }

  /// Off-diagonal entries nonnegative and row sums zero, within tol.
  std::vector<Violation> structural_violations(double tol = 1e-9) const;
  /// Strong connectivity of the digraph induced by positive off-diagonal rates.
  bool irreducible() const;

 private:
  Matrix rates_;
};

/// Stationary distribution; throws std::domain_error if the chain is reducible.
Vector invariant_distribution(const MarkovGenerator& m);

/// Global-to-local state table: phi maps each global state (1-based) to the
/// N-tuple of 1-based local states.
class StateMapping {
 public:
  StateMapping() = default;
  StateMapping(int n_nodes, std::vector<int> local_counts,
               std::vector<std::vector<int>> phi);

  int node_count() const { return n_nodes_; }
  int global_count() const { return static_cast<int>(phi_.size()); }
  int local_count(int node) const { return local_counts_[node - 1]; }
  /// Phi_i(k) for 1-based node and global state.
  int local_state(int node, int global) const;
  bool injective() const;
  /// Global states l with Phi_i(l) == local (ascending, 1-based).
  std::vector<int> conditioning_set(int node, int local) const;

 private:
  int n_nodes_ = 0;
  std::vector<int> local_counts_;
  std::vector<std::vector<int>> phi_;
};

/// The switching network: one digraph per global state, the Markov generator
/// driving the global state, and the global-to-local mapping.
class SwitchingNetwork {
 public:
  SwitchingNetwork() = default;
  SwitchingNetwork(std::vector<Digraph> graphs, MarkovGenerator generator,
                   StateMapping mapping);

  int node_count() const;
  int global_count() const { return static_cast<int>(graphs_.size()); }
  const Digraph& graph(int global) const { return graphs_[global - 1]; }
  const MarkovGenerator& generator() const { return generator_; }
  const StateMapping& mapping() const { return mapping_; }
  const std::vector<int>& in_neighbours(int node, int global) const {
    return graph(global).in_neighbours(node);
  }
  /// Edges (receiver, transmitter) present in at least one global state,
  /// sorted lexicographically.
  std::vector<std::pair<int, int>> edge_union() const;

 private:
  std::vector<Digraph> graphs_;
  MarkovGenerator generator_;
  StateMapping mapping_;
};

/// lambda-bar conditional weights over the conditioning set of (node, local
/// state); keys are global states. Throws if the set is empty or the chain
/// is reducible.
std::map<int, double> conditional_weights(const SwitchingNetwork& net, int node,
                                          int local_state);

/// One constant-state segment of a sampled Markov path; [t_begin, t_end).
struct PathSegment {
  double t_begin;
  double t_end;
  int state;
};
using MarkovPath = std::vector<PathSegment>;

/// Exact-jump CTMC sampling over [0, horizon]; deterministic given seed.
MarkovPath sample_ctmc_path(const MarkovGenerator& m, int initial_state,
                            double horizon, std::uint64_t seed);

/// Pointwise Phi_i with consecutive duplicate segments merged.
MarkovPath local_path(const SwitchingNetwork& net, const MarkovPath& path,
                      int node);

/// State of a path at time t (segments are right-open; the last segment is
/// closed at the horizon).
int path_state_at(const MarkovPath& path, double t);

/// Empty iff all per-state graphs are weakly connected, the generator is
/// structurally valid, phi is injective and in-range, and equal local states
/// imply equal neighbourhoods.
std::vector<Violation> validate_network(const SwitchingNetwork& net);

/// 53-bit uniform in [0,1); explicit so sampled paths are reproducible
/// across standard library implementations.
class SplitUniform {
 public:
  explicit SplitUniform(std::uint64_t seed) : rng_(seed) {}
  double next() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  std::uint64_t next_raw() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace hinfcon

#endif
