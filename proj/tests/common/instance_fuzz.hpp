#ifndef HINFCON_INSTANCE_FUZZ_HPP
#define HINFCON_INSTANCE_FUZZ_HPP

// Randomized detectability instances with a controlled eigenstructure:
// A = Q D Q' with well-separated eigenvalues, measurement rows built to blind
// each node to a chosen mode subset, and digraphs grown around a spanning
// tree so the Laplacian zero eigenvalue stays simple.

#include <set>
#include <vector>

#include "hinfcon/detectability.hpp"

namespace hinfcon_fuzz {

using hinfcon::Matrix;
using hinfcon::Vector;

struct Instance {
  hinfcon::PlantModel plant;
  hinfcon::MeasurementModel measurements;
  hinfcon::ChannelModel channels;
  hinfcon::SwitchingNetwork network;
  std::vector<std::set<int>> blind_modes;  // per node, 0-based mode indices
  std::set<int> channel_blind_modes;
  std::vector<double> eigenvalues;
};

inline Matrix random_orthogonal(int n, hinfcon::SplitUniform& rng) {
  Matrix g(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) g(r, c) = 2.0 * rng.next() - 1.0;
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ();
}

inline Matrix blinded_rows(const Matrix& q, const std::set<int>& blind,
                           hinfcon::SplitUniform& rng) {
  const int n = static_cast<int>(q.rows());
  std::vector<int> observed;
  for (int t = 0; t < n; ++t)
    if (!blind.count(t)) observed.push_back(t);
  if (observed.empty()) return Matrix::Zero(1, n);
  Matrix p(n, observed.size());
  for (size_t c = 0; c < observed.size(); ++c) p.col(c) = q.col(observed[c]);
  const int rows = 1 + static_cast<int>(rng.next() * 2);
  Matrix r(rows, observed.size());
  for (int a = 0; a < rows; ++a)
    for (int b = 0; b < static_cast<int>(observed.size()); ++b) {
      double mag = 0.2 + rng.next();
      r(a, b) = rng.next() < 0.5 ? -mag : mag;
    }
  return r * p.transpose();
}

inline Instance make_instance(std::uint64_t seed) {
  hinfcon::SplitUniform rng(seed);
  const int n = 3 + static_cast<int>(rng.next() * 3);
  const int nn = 2 + static_cast<int>(rng.next() * 3);

  Matrix q = random_orthogonal(n, rng);
  Vector d(n);
  for (int t = 0; t < n; ++t) {
    double mag = 0.3 + 0.35 * t + 0.2 * rng.next();
    d(t) = rng.next() < 0.5 ? -mag : mag;
  }
  Matrix a = q * d.asDiagonal() * q.transpose();

  Instance inst;
  inst.plant.A = a;
  inst.plant.B2 = Matrix::Zero(n, 1);
  inst.eigenvalues.assign(d.data(), d.data() + n);

  std::vector<std::vector<hinfcon::MeasurementTriplet>> table(nn);
  for (int i = 0; i < nn; ++i) {
    std::set<int> blind;
    for (int t = 0; t < n; ++t)
      if (rng.next() < 0.45) blind.insert(t);
    inst.blind_modes.push_back(blind);
    hinfcon::MeasurementTriplet trip;
    trip.C = blinded_rows(q, blind, rng);
    trip.D = Matrix::Zero(trip.C.rows(), 1);
    trip.Dbar = Matrix::Identity(trip.C.rows(), trip.C.rows());
    table[i] = {trip};
  }
  inst.measurements = hinfcon::MeasurementModel(table);

  std::set<int> ch_blind;
  for (int t = 0; t < n; ++t)
    if (rng.next() < 0.3) ch_blind.insert(t);
  inst.channel_blind_modes = ch_blind;
  Matrix h = blinded_rows(q, ch_blind, rng);

  // spanning tree rooted at node 1 (parents transmit to children), plus a
  // few extra edges
  std::vector<std::vector<int>> vin(nn);
  for (int i = 1; i < nn; ++i) {
    int parent = static_cast<int>(rng.next() * i);
    vin[i].push_back(parent + 1);
  }
  for (int i = 0; i < nn; ++i)
    for (int j = 1; j <= nn; ++j) {
      if (j == i + 1) continue;
      bool present = false;
      for (int e : vin[i]) present = present || (e == j);
      if (!present && rng.next() < 0.2) vin[i].push_back(j);
    }
  auto graph = hinfcon::Digraph::from_in_neighbours(nn, vin);

  for (int i = 1; i <= nn; ++i)
    for (int j : graph.in_neighbours(i))
      inst.channels.set(i, j, h, Matrix::Identity(h.rows(), h.rows()));

  std::vector<int> ones(nn, 1);
  std::vector<int> tuple(nn, 1);
  inst.network = hinfcon::SwitchingNetwork(
      {graph}, hinfcon::MarkovGenerator(Matrix::Zero(1, 1)),
      hinfcon::StateMapping(nn, ones, {tuple}));
  return inst;
}

}  // namespace hinfcon_fuzz

#endif
