#include "hinfcon/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hinfcon {

namespace {

std::string idx(const std::string& base, int i) {
  std::ostringstream os;
  os << base << "[" << i << "]";
  return os.str();
}

}  // namespace

Digraph::Digraph(int n_nodes, Eigen::MatrixXi adjacency)
    : n_nodes_(n_nodes), adjacency_(std::move(adjacency)) {
  if (adjacency_.rows() != n_nodes_ || adjacency_.cols() != n_nodes_)
    throw std::invalid_argument("Digraph: adjacency must be n_nodes x n_nodes");
  for (int i = 0; i < n_nodes_; ++i) {
    if (adjacency_(i, i) != 0)
      throw std::invalid_argument("Digraph: self-loops are not allowed");
    for (int j = 0; j < n_nodes_; ++j) {
      if (adjacency_(i, j) != 0 && adjacency_(i, j) != 1)
        throw std::invalid_argument("Digraph: adjacency entries must be 0/1");
    }
  }
  vin_.resize(n_nodes_);
  for (int i = 0; i < n_nodes_; ++i)
    for (int j = 0; j < n_nodes_; ++j)
      if (adjacency_(i, j) == 1) vin_[i].push_back(j + 1);
}

Digraph Digraph::from_in_neighbours(int n_nodes,
                                    const std::vector<std::vector<int>>& vin) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n_nodes, n_nodes);
  if (static_cast<int>(vin.size()) != n_nodes)
    throw std::invalid_argument("Digraph: need one in-neighbour list per node");
  for (int i = 0; i < n_nodes; ++i) {
    for (int j : vin[i]) {
      if (j < 1 || j > n_nodes)
        throw std::invalid_argument("Digraph: in-neighbour index out of range");
      a(i, j - 1) = 1;
    }
  }
  return Digraph(n_nodes, std::move(a));
}

bool Digraph::has_edge(int receiver, int transmitter) const {
  return adjacency_(receiver - 1, transmitter - 1) == 1;
}

const std::vector<int>& Digraph::in_neighbours(int node) const {
  if (node < 1 || node > n_nodes_)
    throw std::out_of_range("Digraph: node index out of range");
  return vin_[node - 1];
}

bool Digraph::weakly_connected() const {
  if (n_nodes_ == 0) return false;
  std::vector<int> stack = {0};
  std::vector<bool> seen(n_nodes_, false);
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int vtx = 0; vtx < n_nodes_; ++vtx) {
      if (!seen[vtx] && (adjacency_(u, vtx) == 1 || adjacency_(vtx, u) == 1)) {
        seen[vtx] = true;
        ++count;
        stack.push_back(vtx);
      }
    }
  }
  return count == n_nodes_;
}

Matrix laplacian(const Digraph& g) {
  const int n = g.node_count();
  Matrix lap = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double p = 0;
    for (int j = 0; j < n; ++j) {
      if (g.adjacency()(i, j) == 1) {
        lap(i, j) = -1.0;
        p += 1.0;
      }
    }
    lap(i, i) = p;
  }
  return lap;
}

std::pair<int, int> degrees(const Digraph& g, int node) {
  if (node < 1 || node > g.node_count())
    throw std::out_of_range("degrees: node index out of range");
  const int i = node - 1;
  int p = 0, q = 0;
  for (int j = 0; j < g.node_count(); ++j) {
    p += g.adjacency()(i, j);
    q += g.adjacency()(j, i);
  }
  return {p, q};
}

MarkovGenerator::MarkovGenerator(Matrix rates) : rates_(std::move(rates)) {
  if (rates_.rows() != rates_.cols() || rates_.rows() == 0)
    throw std::invalid_argument("MarkovGenerator: rates must be square and nonempty");
}

std::vector<Violation> MarkovGenerator::structural_violations(double tol) const {
  std::vector<Violation> out;
  const int m = state_count();
  for (int k = 0; k < m; ++k) {
    double row = 0;
    for (int l = 0; l < m; ++l) {
      row += rates_(k, l);
      if (l != k && rates_(k, l) < -tol) {
        out.push_back({idx("network.Lambda", k),
                       "negative off-diagonal transition rate"});
      }
    }
    if (std::abs(row) > tol * (1.0 + rates_.cwiseAbs().maxCoeff())) {
      out.push_back({idx("network.Lambda", k), "row sum is not zero"});
    }
  }
  return out;
}

bool MarkovGenerator::irreducible() const {
  const int m = state_count();
  if (m == 1) return true;
  // strong connectivity: forward and backward reachability from state 0
  auto reach = [&](bool forward) {
    std::vector<bool> seen(m, false);
    std::vector<int> stack = {0};
    seen[0] = true;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int vtx = 0; vtx < m; ++vtx) {
        double r = forward ? rates_(u, vtx) : rates_(vtx, u);
        if (vtx != u && !seen[vtx] && r > 0) {
          seen[vtx] = true;
          ++count;
          stack.push_back(vtx);
        }
      }
    }
    return count == m;
  };
  return reach(true) && reach(false);
}

Vector invariant_distribution(const MarkovGenerator& m) {
  if (!m.irreducible())
    throw std::domain_error(
        "invariant_distribution: generator is reducible, no unique invariant "
        "distribution");
  const int n = m.state_count();
  // augmented system [Lambda'; 1'] x = [0; 1], least squares
  Matrix a(n + 1, n);
  a.topRows(n) = m.rates().transpose();
  a.row(n).setOnes();
  Vector b = Vector::Zero(n + 1);
  b(n) = 1.0;
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  if (qr.rank() < n)
    throw std::domain_error("invariant_distribution: augmented system rank-deficient");
  Vector x = qr.solve(b);
  return x;
}

StateMapping::StateMapping(int n_nodes, std::vector<int> local_counts,
                           std::vector<std::vector<int>> phi)
    : n_nodes_(n_nodes),
      local_counts_(std::move(local_counts)),
      phi_(std::move(phi)) {
  if (static_cast<int>(local_counts_.size()) != n_nodes_)
    throw std::invalid_argument("StateMapping: need one local count per node");
  for (const auto& tup : phi_) {
    if (static_cast<int>(tup.size()) != n_nodes_)
      throw std::invalid_argument("StateMapping: phi entries must be N-tuples");
  }
}

int StateMapping::local_state(int node, int global) const {
  if (node < 1 || node > n_nodes_)
    throw std::out_of_range("StateMapping: node out of range");
  if (global < 1 || global > global_count())
    throw std::out_of_range("StateMapping: global state out of range");
  return phi_[global - 1][node - 1];
}

bool StateMapping::injective() const {
  std::set<std::vector<int>> seen;
  for (const auto& tup : phi_) {
    if (!seen.insert(tup).second) return false;
  }
  return true;
}

std::vector<int> StateMapping::conditioning_set(int node, int local) const {
  std::vector<int> out;
  for (int k = 1; k <= global_count(); ++k)
    if (local_state(node, k) == local) out.push_back(k);
  return out;
}

SwitchingNetwork::SwitchingNetwork(std::vector<Digraph> graphs,
                                   MarkovGenerator generator,
                                   StateMapping mapping)
    : graphs_(std::move(graphs)),
      generator_(std::move(generator)),
      mapping_(std::move(mapping)) {
  if (graphs_.empty())
    throw std::invalid_argument("SwitchingNetwork: need at least one graph");
  if (static_cast<int>(graphs_.size()) != generator_.state_count() ||
      static_cast<int>(graphs_.size()) != mapping_.global_count())
    throw std::invalid_argument("SwitchingNetwork: state counts inconsistent");
  for (const auto& g : graphs_) {
    if (g.node_count() != graphs_.front().node_count())
      throw std::invalid_argument("SwitchingNetwork: graphs must share the vertex set");
  }
  if (mapping_.node_count() != graphs_.front().node_count())
    throw std::invalid_argument("SwitchingNetwork: mapping node count mismatch");
}

int SwitchingNetwork::node_count() const { return graphs_.front().node_count(); }

std::vector<std::pair<int, int>> SwitchingNetwork::edge_union() const {
  std::set<std::pair<int, int>> edges;
  for (int k = 1; k <= global_count(); ++k) {
    for (int i = 1; i <= node_count(); ++i)
      for (int j : in_neighbours(i, k)) edges.insert({i, j});
  }
  return {edges.begin(), edges.end()};
}

std::map<int, double> conditional_weights(const SwitchingNetwork& net, int node,
                                          int local_state) {
  const auto set = net.mapping().conditioning_set(node, local_state);
  if (set.empty())
    throw std::domain_error("conditional_weights: empty conditioning set");
  Vector lbar = invariant_distribution(net.generator());
  double total = 0;
  for (int l : set) total += lbar(l - 1);
  std::map<int, double> out;
  for (int l : set) out[l] = lbar(l - 1) / total;
  return out;
}

MarkovPath sample_ctmc_path(const MarkovGenerator& m, int initial_state,
                            double horizon, std::uint64_t seed) {
  if (horizon <= 0) throw std::invalid_argument("sample_ctmc_path: horizon must be > 0");
  if (initial_state < 1 || initial_state > m.state_count())
    throw std::out_of_range("sample_ctmc_path: initial state out of range");
  SplitUniform rng(seed);
  MarkovPath path;
  double t = 0;
  int state = initial_state;
  while (t < horizon) {
    const double exit_rate = -m.rates()(state - 1, state - 1);
    if (exit_rate <= 0) {
      // absorbing state: path stays constant
      path.push_back({t, horizon, state});
      break;
    }
    double u = rng.next();
    // u in [0,1): -log(1-u) is a standard exponential sample
    double hold = -std::log1p(-u) / exit_rate;
    double t_end = std::min(t + hold, horizon);
    path.push_back({t, t_end, state});
    t = t + hold;
    if (t >= horizon) break;
    double u2 = rng.next() * exit_rate;
    double cum = 0;
    int next = state;
    for (int l = 1; l <= m.state_count(); ++l) {
      if (l == state) continue;
      cum += m.rates()(state - 1, l - 1);
      if (u2 <= cum) {
        next = l;
        break;
      }
    }
    state = next;
  }
  return path;
}

MarkovPath local_path(const SwitchingNetwork& net, const MarkovPath& path,
                      int node) {
  MarkovPath out;
  for (const auto& seg : path) {
    int ls = net.mapping().local_state(node, seg.state);
    if (!out.empty() && out.back().state == ls) {
      out.back().t_end = seg.t_end;
    } else {
      out.push_back({seg.t_begin, seg.t_end, ls});
    }
  }
  return out;
}

int path_state_at(const MarkovPath& path, double t) {
  if (path.empty()) throw std::invalid_argument("path_state_at: empty path");
  for (const auto& seg : path) {
    if (t >= seg.t_begin && t < seg.t_end) return seg.state;
  }
  return path.back().state;
}

std::vector<Violation> validate_network(const SwitchingNetwork& net) {
  std::vector<Violation> out;
  const int n = net.node_count();
  const int m = net.global_count();

  auto gen_viol = net.generator().structural_violations();
  out.insert(out.end(), gen_viol.begin(), gen_viol.end());

  for (int k = 1; k <= m; ++k) {
    if (!net.graph(k).weakly_connected())
      out.push_back({idx("network.adjacency", k - 1),
                     "per-state graph is not weakly connected"});
  }

  if (!net.mapping().injective())
    out.push_back({"network.phi", "phi maps two global states to the same tuple"});

  for (int k = 1; k <= m; ++k) {
    for (int i = 1; i <= n; ++i) {
      int ls = net.mapping().local_state(i, k);
      if (ls < 1 || ls > net.mapping().local_count(i))
        out.push_back({idx("network.phi", k - 1), "local state index out of range"});
    }
  }

  // a local state determines the neighbourhood
  for (int i = 1; i <= n; ++i) {
    std::map<int, std::vector<int>> by_local;
    for (int k = 1; k <= m; ++k) {
      int ls = net.mapping().local_state(i, k);
      auto nb = net.in_neighbours(i, k);
      auto it = by_local.find(ls);
      if (it == by_local.end()) {
        by_local[ls] = nb;
      } else if (it->second != nb) {
        std::ostringstream os;
        os << "node " << i << ": local state " << ls
           << " pairs with two different neighbourhoods";
        out.push_back({"network", os.str()});
      }
    }
  }
  return out;
}

}  // namespace hinfcon
