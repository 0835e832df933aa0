#include "hinfcon/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hinfcon {

DisturbanceSignal DisturbanceSignal::damped_sine(double a, double phase,
                                                 double b) {
  if (b <= 0)
    throw std::invalid_argument(
        "damped_sine: decay rate b must be positive (L2 membership)");
  DisturbanceSignal s;
  s.kind = Kind::DampedSine;
  s.a = a;
  s.phase = phase;
  s.b = b;
  return s;
}

bool DisturbanceSpec::all_zero() const {
  if (!xi.is_zero()) return false;
  for (const auto& s : xi_nodes)
    if (!s.is_zero()) return false;
  for (const auto& [e, s] : w)
    if (!s.is_zero()) return false;
  return true;
}

namespace {

double eval_signal(const DisturbanceSignal& s, double t) {
  switch (s.kind) {
    case DisturbanceSignal::Kind::Zero:
      return 0.0;
    case DisturbanceSignal::Kind::DampedSine:
      return std::sin(s.a * M_PI * t + s.phase) * std::exp(-s.b * t);
    case DisturbanceSignal::Kind::Samples: {
      if (s.times.empty()) return 0.0;
      if (t <= s.times.front()) return t == s.times.front() ? s.values.front() : 0.0;
      if (t >= s.times.back()) return t == s.times.back() ? s.values.back() : 0.0;
      auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
      size_t hi = static_cast<size_t>(it - s.times.begin());
      size_t lo = hi - 1;
      double w = (t - s.times[lo]) / (s.times[hi] - s.times[lo]);
      return (1 - w) * s.values[lo] + w * s.values[hi];
    }
    case DisturbanceSignal::Kind::PiecewiseRandom: {
      // realized elsewhere; treat an unrealized signal as zero-hold samples
      if (s.values.empty()) return 0.0;
      size_t idx = static_cast<size_t>(std::floor(t / s.dt));
      if (idx >= s.values.size()) return 0.0;
      return s.values[idx];
    }
  }
  return 0.0;
}

/// envelope decay rate of the signal (0 = compactly supported / none needed)
double envelope_rate(const DisturbanceSignal& s) {
  switch (s.kind) {
    case DisturbanceSignal::Kind::DampedSine:
    case DisturbanceSignal::Kind::PiecewiseRandom:
      return s.b;
    default:
      return 0.0;
  }
}

DisturbanceSignal realize(const DisturbanceSignal& s, double horizon,
                          std::uint64_t seed) {
  if (s.kind != DisturbanceSignal::Kind::PiecewiseRandom) return s;
  if (!s.values.empty()) return s;  // already realized
  DisturbanceSignal out = s;
  SplitUniform rng(seed);
  const int cells = static_cast<int>(std::ceil(horizon / s.dt)) + 1;
  out.values.resize(cells);
  for (int c = 0; c < cells; ++c) {
    // Box-Muller from the explicit uniform stream
    double u1 = std::max(rng.next(), 1e-300);
    double u2 = rng.next();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    out.values[c] = s.sigma * z * std::exp(-s.b * c * s.dt);
  }
  return out;
}

/// canonical per-edge signal lookup honouring the symmetric option
const DisturbanceSignal* edge_signal(const DisturbanceSpec& d, int i, int j) {
  auto it = d.w.find({i, j});
  if (it != d.w.end()) return &it->second;
  if (d.symmetric_w) {
    it = d.w.find({j, i});
    if (it != d.w.end()) return &it->second;
  }
  return nullptr;
}

struct StateSystem {
  Matrix a;                     // joint (x, xhat_1..N) dynamics
  Vector b_xi;                  // input column for the scalar xi signal
  std::vector<Vector> b_xii;    // per node
  std::map<std::pair<int, int>, Vector> b_w;  // per active edge
};

}  // namespace

DisturbanceSpec realize_disturbances(const DisturbanceSpec& dist_in,
                                     double horizon, std::uint64_t seed) {
  DisturbanceSpec dist = dist_in;
  const std::uint64_t salt = seed * 0x9E3779B97F4A7C15ull + 0x1234567ull;
  dist.xi = realize(dist.xi, horizon, salt);
  for (size_t i = 0; i < dist.xi_nodes.size(); ++i)
    dist.xi_nodes[i] = realize(dist.xi_nodes[i], horizon, salt + 17 * (i + 1));
  for (auto& [edge, s] : dist.w) {
    int a = std::min(edge.first, edge.second);
    int b = std::max(edge.first, edge.second);
    std::uint64_t edge_salt =
        dist.symmetric_w ? salt + 1000003ull * a + 7919ull * b
                         : salt + 1000003ull * edge.first + 7919ull * edge.second;
    s = realize(s, horizon, edge_salt);
  }
  return dist;
}

double disagreement(const SwitchingNetwork& net, int k,
                    const std::vector<Vector>& xhat) {
  const int nn = net.node_count();
  if (static_cast<int>(xhat.size()) != nn)
    throw std::invalid_argument("disagreement: need one estimate per node");
  double total = 0;
  for (int i = 1; i <= nn; ++i) {
    for (int j : net.in_neighbours(i, k))
      total += (xhat[j - 1] - xhat[i - 1]).squaredNorm();
  }
  return total / nn;
}

namespace {

/// composite Simpson of s(t)^2 over [t0, t1]
double signal_energy(const DisturbanceSignal& s, double t0, double t1,
                     double step) {
  if (s.is_zero() || t1 <= t0) return 0.0;
  int cells = std::max(2, static_cast<int>(std::ceil((t1 - t0) / step)));
  if (cells % 2 == 1) ++cells;
  const double h = (t1 - t0) / cells;
  double acc = 0;
  for (int c = 0; c <= cells; ++c) {
    double v = eval_signal(s, t0 + c * h);
    double w = (c == 0 || c == cells) ? 1.0 : (c % 2 == 1 ? 4.0 : 2.0);
    acc += w * v * v;
  }
  return acc * h / 3.0;
}

}  // namespace

double mu_P(const Matrix& p, const Vector& x0, const DisturbanceSpec& dist,
            const std::vector<MarkovPath>& paths, const PlantModel& pm,
            const MeasurementModel& mm, const ChannelModel& cm,
            const SwitchingNetwork& net, double horizon, double step) {
  if (!positive_definite(p))
    throw std::domain_error("mu_P: P must be positive definite");
  const int nn = net.node_count();

  double out = x0.dot(p * x0);
  out += pm.disturbance_dim() * signal_energy(dist.xi, 0, horizon, step);

  double per_node = 0;
  for (int i = 1; i <= nn; ++i) {
    if (i - 1 < static_cast<int>(dist.xi_nodes.size()))
      per_node += mm.at(i, 1).Dbar.cols() *
                  signal_energy(dist.xi_nodes[i - 1], 0, horizon, step);
  }

  // E int a_ij^{eta} ||w_ij||^2, averaged over the supplied paths
  double gated_mean = 0;
  if (!paths.empty()) {
    double gated_total = 0;
    for (const auto& path : paths) {
      for (const auto& [i, j] : net.edge_union()) {
        const DisturbanceSignal* s = edge_signal(dist, i, j);
        if (!s || s->is_zero()) continue;
        const int dim = static_cast<int>(cm.G(i, j).cols());
        for (const auto& seg : path) {
          if (!net.graph(seg.state).has_edge(i, j)) continue;
          gated_total += dim * signal_energy(*s, seg.t_begin,
                                             std::min(seg.t_end, horizon), step);
        }
      }
    }
    gated_mean = gated_total / static_cast<double>(paths.size());
  }

  out += (per_node + gated_mean) / nn;
  return out;
}

SimulationResult simulate(const PlantModel& pm, const MeasurementModel& mm,
                          const ChannelModel& cm, const SwitchingNetwork& net,
                          const GainSet& gains, const DisturbanceSpec& dist_in,
                          const SimOptions& opt) {
  if (opt.horizon <= 0) throw std::invalid_argument("simulate: horizon must be > 0");
  if (opt.step <= 0) throw std::invalid_argument("simulate: step must be > 0");
  const int n = pm.state_dim();
  const int nn = net.node_count();
  const int m = net.global_count();
  if (opt.x0.size() != n)
    throw std::invalid_argument("simulate: x0 dimension mismatch");
  if (opt.mode == GainMode::LocalGains && !gains.has_local())
    throw std::invalid_argument("simulate: local mode needs localized gains");

  // realize random signals once (shared with the mu_P caller)
  DisturbanceSpec dist = realize_disturbances(dist_in, opt.horizon, opt.seed);

  MarkovPath path = opt.forced_path
                        ? *opt.forced_path
                        : sample_ctmc_path(net.generator(), opt.m0, opt.horizon,
                                           opt.seed);

  // per-state joint systems
  const int nz = n * (nn + 1);
  std::vector<StateSystem> sys(m);
  const auto edges = net.edge_union();
  for (int k = 1; k <= m; ++k) {
    StateSystem& s = sys[k - 1];
    s.a = Matrix::Zero(nz, nz);
    s.a.topLeftCorner(n, n) = pm.A;
    const Vector ones_l = Vector::Ones(pm.disturbance_dim());
    s.b_xi = Vector::Zero(nz);
    s.b_xi.head(n) = pm.B2 * ones_l;
    s.b_xii.assign(nn, Vector::Zero(nz));
    for (int i = 1; i <= nn; ++i) {
      const int r0 = n * i;
      const auto& trip = mm.at(i, k);
      const int ki = net.mapping().local_state(i, k);
      const Matrix& li = opt.mode == GainMode::LocalGains
                             ? gains.L_local.at({i, ki})
                             : gains.L.at({i, k});
      Matrix diag = pm.A - li * trip.C;
      s.a.block(r0, 0, n, n) += li * trip.C;
      s.b_xi.segment(r0, n) = li * trip.D * ones_l;
      s.b_xii[i - 1].segment(r0, n) =
          li * trip.Dbar * Vector::Ones(trip.Dbar.cols());
      for (int j : net.in_neighbours(i, k)) {
        const Matrix& kij = opt.mode == GainMode::LocalGains
                                ? gains.K_local.at({i, j, ki})
                                : gains.K.at({i, j, k});
        Matrix kh = kij * cm.H(i, j);
        diag -= kh;
        s.a.block(r0, n * j, n, n) += kh;
        Vector bw = Vector::Zero(nz);
        bw.segment(r0, n) = kij * cm.G(i, j) * Vector::Ones(cm.G(i, j).cols());
        s.b_w[{i, j}] = bw;
      }
      s.a.block(r0, r0, n, n) += diag;
    }
  }

  // quadrature layout: [psi, err_1..N, exi, exii_1..N, ew_edge...]
  const int nq = 1 + nn + 1 + nn + static_cast<int>(edges.size());
  auto edge_index = [&](int i, int j) {
    for (size_t e = 0; e < edges.size(); ++e)
      if (edges[e].first == i && edges[e].second == j) return static_cast<int>(e);
    return -1;
  };

  Vector z = Vector::Zero(nz);
  z.head(n) = opt.x0;
  if (opt.xhat0) {
    if (opt.xhat0->size() != n)
      throw std::invalid_argument("simulate: xhat0 dimension mismatch");
    for (int i = 1; i <= nn; ++i) z.segment(n * i, n) = *opt.xhat0;
  }
  Vector q = Vector::Zero(nq);

  SimulationResult result;
  result.path = path;
  result.err_integrals.assign(nn, 0.0);
  result.energy_xi_nodes.assign(nn, 0.0);

  const int l_dim = pm.disturbance_dim();

  auto deriv = [&](double t, const Vector& zz, int k, Vector& dz, Vector& dq) {
    const StateSystem& s = sys[k - 1];
    const double sxi = eval_signal(dist.xi, t);
    dz = s.a * zz + s.b_xi * sxi;
    dq.setZero();
    for (int i = 1; i <= nn; ++i) {
      double sv = (i - 1) < static_cast<int>(dist.xi_nodes.size())
                      ? eval_signal(dist.xi_nodes[i - 1], t)
                      : 0.0;
      if (sv != 0.0) dz += s.b_xii[i - 1] * sv;
      dq(1 + nn + 1 + (i - 1)) =
          sv * sv * static_cast<double>(mm.at(i, k).Dbar.cols());
    }
    for (const auto& [edge, bw] : s.b_w) {
      const DisturbanceSignal* sig = edge_signal(dist, edge.first, edge.second);
      if (!sig || sig->is_zero()) continue;
      double sv = eval_signal(*sig, t);
      dz += bw * sv;
      int ei = edge_index(edge.first, edge.second);
      dq(1 + nn + 1 + nn + ei) =
          sv * sv * static_cast<double>(cm.G(edge.first, edge.second).cols());
    }
    // psi and error-norm integrands
    double psi = 0;
    for (int i = 1; i <= nn; ++i) {
      for (int j : net.in_neighbours(i, k))
        psi += (zz.segment(n * j, n) - zz.segment(n * i, n)).squaredNorm();
      dq(1 + (i - 1)) = (zz.head(n) - zz.segment(n * i, n)).squaredNorm();
    }
    dq(0) = psi / nn;
    dq(1 + nn) = sxi * sxi * l_dim;
  };

  auto record_row = [&](double t, int k) {
    TrajectoryRow row;
    row.t = t;
    row.state = k;
    row.x = z.head(n);
    row.xhat.resize(nn);
    row.err_norms.resize(nn);
    std::vector<Vector> xh(nn);
    for (int i = 1; i <= nn; ++i) {
      row.xhat[i - 1] = z.segment(n * i, n);
      xh[i - 1] = row.xhat[i - 1];
      row.err_norms[i - 1] = (row.x - row.xhat[i - 1]).norm();
    }
    row.psi = disagreement(net, k, xh);
    result.trajectory.push_back(std::move(row));
  };

  record_row(0.0, path.front().state);

  Vector k1z(nz), k2z(nz), k3z(nz), k4z(nz);
  Vector k1q(nq), k2q(nq), k3q(nq), k4q(nq);
  Vector ztmp(nz);
  long step_counter = 0;
  for (const auto& seg : path) {
    const double t_end = std::min(seg.t_end, opt.horizon);
    double t = seg.t_begin;
    if (t >= opt.horizon) break;
    while (t < t_end - 1e-15) {
      const double h = std::min(opt.step, t_end - t);
      deriv(t, z, seg.state, k1z, k1q);
      ztmp = z + 0.5 * h * k1z;
      deriv(t + 0.5 * h, ztmp, seg.state, k2z, k2q);
      ztmp = z + 0.5 * h * k2z;
      deriv(t + 0.5 * h, ztmp, seg.state, k3z, k3q);
      ztmp = z + h * k3z;
      deriv(t + h, ztmp, seg.state, k4z, k4q);
      z += (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
      q += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
      t += h;
      if (!z.allFinite()) throw SimulationError(t);
      ++step_counter;
      if (opt.output_stride > 0 && step_counter % opt.output_stride == 0)
        record_row(t, seg.state);
    }
  }
  // final row if the stride missed it
  if (result.trajectory.empty() ||
      result.trajectory.back().t < opt.horizon - 1e-12)
    record_row(opt.horizon, path.back().state);

  result.psi_integral = q(0);
  for (int i = 0; i < nn; ++i) result.err_integrals[i] = q(1 + i);
  result.energy_xi = q(1 + nn);
  for (int i = 0; i < nn; ++i) result.energy_xi_nodes[i] = q(1 + nn + 1 + i);
  for (size_t e = 0; e < edges.size(); ++e)
    result.energy_w_gated[edges[e]] = q(1 + nn + 1 + nn + static_cast<int>(e));
  result.terminal_errors.resize(nn);
  for (int i = 1; i <= nn; ++i)
    result.terminal_errors[i - 1] = (z.head(n) - z.segment(n * i, n)).norm();

  // decay slope of log total error over recorded rows
  {
    std::vector<double> ts, ys;
    double s0 = 0;
    for (double e : result.trajectory.front().err_norms) s0 += e;
    for (const auto& row : result.trajectory) {
      double s = 0;
      for (double e : row.err_norms) s += e;
      if (s > 1e-10 * std::max(s0, 1e-300)) {
        ts.push_back(row.t);
        ys.push_back(std::log(s));
      }
    }
    if (ts.size() >= 2) {
      double tm = 0, ym = 0;
      for (size_t i = 0; i < ts.size(); ++i) {
        tm += ts[i];
        ym += ys[i];
      }
      tm /= ts.size();
      ym /= ts.size();
      double num = 0, den = 0;
      for (size_t i = 0; i < ts.size(); ++i) {
        num += (ts[i] - tm) * (ys[i] - ym);
        den += (ts[i] - tm) * (ts[i] - tm);
      }
      result.decay_rate = den > 0 ? num / den : 0.0;
    }
  }
  return result;
}

RatioReport estimate_hinf_ratio(const PlantModel& pm, const MeasurementModel& mm,
                                const ChannelModel& cm,
                                const SwitchingNetwork& net,
                                const GainSet& gains,
                                const std::vector<RatioCase>& battery,
                                int runs_per_case, double horizon, double step,
                                std::uint64_t seed, GainMode mode) {
  bool any_nonzero = false;
  for (const auto& c : battery)
    if (!c.dist.all_zero() || c.x0.norm() > 0) any_nonzero = true;
  if (battery.empty() || !any_nonzero)
    throw std::invalid_argument(
        "estimate_hinf_ratio: battery has no case with nonzero inputs");

  RatioReport rep;
  rep.runs_per_case = runs_per_case;
  double min_rate = std::numeric_limits<double>::infinity();
  for (size_t ci = 0; ci < battery.size(); ++ci) {
    const auto& c = battery[ci];
    for (const auto& s : {c.dist.xi}) {
      double r = envelope_rate(s);
      if (!s.is_zero() && r > 0) min_rate = std::min(min_rate, r);
    }
    for (const auto& s : c.dist.xi_nodes) {
      double r = envelope_rate(s);
      if (!s.is_zero() && r > 0) min_rate = std::min(min_rate, r);
    }
    for (const auto& [e, s] : c.dist.w) {
      double r = envelope_rate(s);
      if (!s.is_zero() && r > 0) min_rate = std::min(min_rate, r);
    }

    double psi_sum = 0;
    double mu_sum = 0;
    SimOptions opt;
    opt.horizon = horizon;
    opt.step = step;
    opt.m0 = gains.m0;
    opt.x0 = c.x0;
    opt.mode = mode;
    opt.output_stride = 0;  // metrics only
    for (int r = 0; r < runs_per_case; ++r) {
      opt.seed = seed + 1000003ull * (ci + 1) + static_cast<std::uint64_t>(r);
      // common random numbers: numerator and denominator share realizations
      DisturbanceSpec dist_run = realize_disturbances(c.dist, horizon, opt.seed);
      SimulationResult res = simulate(pm, mm, cm, net, gains, dist_run, opt);
      psi_sum += res.psi_integral;
      mu_sum += mu_P(gains.P(), c.x0, dist_run, {res.path}, pm, mm, cm, net,
                     horizon, step);
    }
    RatioCaseResult rc;
    rc.name = c.name;
    rc.mean_psi_integral = psi_sum / runs_per_case;
    rc.mu_p = mu_sum / runs_per_case;
    if (rc.mu_p <= 1e-14) {
      rc.skipped = true;
      rc.ratio = 0;
    } else {
      rc.ratio = rc.mean_psi_integral / rc.mu_p;
      rep.worst_ratio = std::max(rep.worst_ratio, rc.ratio);
    }
    rep.cases.push_back(rc);
  }
  rep.tail_bound =
      std::isfinite(min_rate) ? std::exp(-2.0 * min_rate * horizon) : 0.0;
  return rep;
}

std::string trajectory_csv(const SimulationResult& result) {
  std::ostringstream os;
  os.precision(17);
  if (result.trajectory.empty()) return "";
  const int n = static_cast<int>(result.trajectory.front().x.size());
  const int nn = static_cast<int>(result.trajectory.front().xhat.size());
  os << "t,eta";
  for (int d = 0; d < n; ++d) os << ",x" << d + 1;
  for (int i = 1; i <= nn; ++i)
    for (int d = 0; d < n; ++d) os << ",xhat" << i << "_" << d + 1;
  for (int i = 1; i <= nn; ++i) os << ",err" << i;
  os << ",psi\n";
  for (const auto& row : result.trajectory) {
    os << row.t << "," << row.state;
    for (int d = 0; d < n; ++d) os << "," << row.x(d);
    for (int i = 0; i < nn; ++i)
      for (int d = 0; d < n; ++d) os << "," << row.xhat[i](d);
    for (int i = 0; i < nn; ++i) os << "," << row.err_norms[i];
    os << "," << row.psi << "\n";
  }
  return os.str();
}

}  // namespace hinfcon
