#include "hinfcon/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace hinfcon {

using nlohmann::json;

namespace {

const json& require(const json& j, const std::string& key,
                    const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key, "missing field");
  return *it;
}

Matrix parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError(path, "expected a nested array (matrix)");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw ConfigError(path, "ragged matrix rows");
    for (int c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw ConfigError(path, "matrix entries must be numbers");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

Vector parse_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(path, "entries must be numbers");
    v(static_cast<int>(i)) = j[i].get<double>();
  }
  return v;
}

DisturbanceSignal parse_signal(const json& j, const std::string& path) {
  if (j.is_null()) return DisturbanceSignal::zero();
  const std::string kind = require(j, "kind", path).get<std::string>();
  if (kind == "zero") return DisturbanceSignal::zero();
  if (kind == "damped_sine") {
    double a = require(j, "a", path).get<double>();
    double phase = j.value("phase", 0.0);
    double b = require(j, "b", path).get<double>();
    if (b <= 0) throw ConfigError(path + ".b", "damped_sine needs b > 0");
    return DisturbanceSignal::damped_sine(a, phase, b);
  }
  if (kind == "samples") {
    DisturbanceSignal s;
    s.kind = DisturbanceSignal::Kind::Samples;
    Vector t = parse_vector(require(j, "times", path), path + ".times");
    Vector v = parse_vector(require(j, "values", path), path + ".values");
    if (t.size() != v.size())
      throw ConfigError(path, "times and values must have equal length");
    s.times.assign(t.data(), t.data() + t.size());
    s.values.assign(v.data(), v.data() + v.size());
    return s;
  }
  if (kind == "piecewise_random") {
    DisturbanceSignal s;
    s.kind = DisturbanceSignal::Kind::PiecewiseRandom;
    s.sigma = require(j, "sigma", path).get<double>();
    s.b = require(j, "b", path).get<double>();
    s.dt = j.value("dt", 0.1);
    if (s.b <= 0)
      throw ConfigError(path + ".b", "piecewise_random needs b > 0 (mean-square L2)");
    return s;
  }
  throw ConfigError(path + ".kind", "unknown signal kind '" + kind + "'");
}

std::pair<int, int> parse_edge(const json& j, const std::string& path) {
  int to = require(j, "to", path).get<int>();
  int from = require(j, "from", path).get<int>();
  return {to, from};
}

}  // namespace

ProblemConfig ProblemConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("(json)", e.what());
  }
  ProblemConfig cfg;

  // plant
  const json& plant = require(j, "plant", "");
  cfg.plant.A = parse_matrix(require(plant, "A", "plant"), "plant.A");
  cfg.plant.B2 = parse_matrix(require(plant, "B2", "plant"), "plant.B2");
  const int n = cfg.plant.state_dim();

  // network
  const json& net = require(j, "network", "");
  const int nn = require(net, "N", "network").get<int>();
  const int m = require(net, "M", "network").get<int>();
  if (nn <= 0 || m <= 0)
    throw ConfigError("network", "N and M must be positive");
  const json& adj = require(net, "adjacency", "network");
  if (static_cast<int>(adj.size()) != m)
    throw ConfigError("network.adjacency", "need one entry per global state");
  std::vector<Digraph> graphs;
  for (int k = 0; k < m; ++k) {
    std::ostringstream p;
    p << "network.adjacency[" << k << "]";
    const json& per_state = adj[k];
    if (!per_state.is_array() || static_cast<int>(per_state.size()) != nn)
      throw ConfigError(p.str(), "need one in-neighbour list per node");
    std::vector<std::vector<int>> vin(nn);
    for (int i = 0; i < nn; ++i) {
      for (const auto& e : per_state[i]) {
        int v = e.get<int>();
        if (v < 1 || v > nn)
          throw ConfigError(p.str(), "in-neighbour index out of range");
        vin[i].push_back(v);
      }
    }
    graphs.push_back(Digraph::from_in_neighbours(nn, vin));
  }
  const json& lambda = require(net, "Lambda", "network");
  Matrix lam;
  if (lambda.is_array() && !lambda.empty() && lambda[0].is_array()) {
    lam = parse_matrix(lambda, "network.Lambda");
  } else {
    Vector flat = parse_vector(lambda, "network.Lambda");
    if (flat.size() != m * m)
      throw ConfigError("network.Lambda", "flat array must have M*M entries");
    lam = Matrix(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) lam(r, c) = flat(r * m + c);
  }
  if (lam.rows() != m || lam.cols() != m)
    throw ConfigError("network.Lambda", "must be M x M");
  const json& phi_j = require(net, "phi", "network");
  if (static_cast<int>(phi_j.size()) != m)
    throw ConfigError("network.phi", "need one tuple per global state");
  std::vector<std::vector<int>> phi;
  std::vector<int> local_counts(nn, 1);
  for (int k = 0; k < m; ++k) {
    if (static_cast<int>(phi_j[k].size()) != nn)
      throw ConfigError("network.phi", "each tuple needs N entries");
    std::vector<int> tup;
    for (int i = 0; i < nn; ++i) {
      int v = phi_j[k][i].get<int>();
      if (v < 1) throw ConfigError("network.phi", "local states are 1-based");
      tup.push_back(v);
      local_counts[i] = std::max(local_counts[i], v);
    }
    phi.push_back(tup);
  }
  if (net.contains("local_counts")) {
    Vector lc = parse_vector(net["local_counts"], "network.local_counts");
    if (lc.size() != nn)
      throw ConfigError("network.local_counts", "need one entry per node");
    for (int i = 0; i < nn; ++i)
      local_counts[i] = static_cast<int>(lc(i));
  }
  cfg.network = SwitchingNetwork(std::move(graphs), MarkovGenerator(lam),
                                 StateMapping(nn, local_counts, phi));

  // measurements
  const json& meas = require(j, "measurements", "");
  if (static_cast<int>(meas.size()) != nn)
    throw ConfigError("measurements", "need one entry per node");
  std::vector<std::vector<MeasurementTriplet>> triplets(nn);
  for (int i = 0; i < nn; ++i) {
    std::ostringstream p;
    p << "measurements[" << i << "]";
    if (static_cast<int>(meas[i].size()) != m)
      throw ConfigError(p.str(), "need one triplet per global state");
    for (int k = 0; k < m; ++k) {
      std::ostringstream pk;
      pk << p.str() << "[" << k << "]";
      const json& t = meas[i][k];
      MeasurementTriplet trip;
      trip.C = parse_matrix(require(t, "C", pk.str()), pk.str() + ".C");
      trip.D = parse_matrix(require(t, "D", pk.str()), pk.str() + ".D");
      trip.Dbar = parse_matrix(require(t, "Dbar", pk.str()), pk.str() + ".Dbar");
      triplets[i].push_back(std::move(trip));
    }
  }
  cfg.measurements = MeasurementModel(std::move(triplets));

  // channels
  const json& chan = require(j, "channels", "");
  std::optional<std::pair<Matrix, Matrix>> def;
  if (chan.contains("default")) {
    def = std::make_pair(
        parse_matrix(require(chan["default"], "H", "channels.default"),
                     "channels.default.H"),
        parse_matrix(require(chan["default"], "G", "channels.default"),
                     "channels.default.G"));
  }
  if (def) {
    for (const auto& [i, jn] : cfg.network.edge_union())
      cfg.channels.set(i, jn, def->first, def->second);
  }
  if (chan.contains("edges")) {
    int idx = 0;
    for (const auto& e : chan["edges"]) {
      std::ostringstream p;
      p << "channels.edges[" << idx++ << "]";
      auto [to, from] = parse_edge(e, p.str());
      cfg.channels.set(to, from,
                       parse_matrix(require(e, "H", p.str()), p.str() + ".H"),
                       parse_matrix(require(e, "G", p.str()), p.str() + ".G"));
    }
  }

  // budget
  const json& budget = require(j, "budget", "");
  cfg.budget.gamma2 = require(budget, "gamma2", "budget").get<double>();
  Vector a2 = parse_vector(require(budget, "alpha2", "budget"), "budget.alpha2");
  if (a2.size() != nn)
    throw ConfigError("budget.alpha2", "need one entry per node");
  cfg.budget.alpha2.assign(a2.data(), a2.data() + a2.size());
  if (budget.contains("beta2")) {
    int idx = 0;
    for (const auto& e : budget["beta2"]) {
      std::ostringstream p;
      p << "budget.beta2[" << idx++ << "]";
      auto edge = parse_edge(e, p.str());
      cfg.budget.beta2[edge] = require(e, "value", p.str()).get<double>();
    }
  }
  Vector d = parse_vector(require(budget, "delta", "budget"), "budget.delta");
  if (d.size() != nn) throw ConfigError("budget.delta", "need one entry per node");
  cfg.budget.delta.assign(d.data(), d.data() + d.size());

  // solver (optional)
  if (j.contains("solver")) {
    const json& s = j["solver"];
    cfg.solver.eps_feas = s.value("eps_feas", 0.0);
    cfg.solver.eps_rank = s.value("eps_rank", 1e-6);
    cfg.solver.max_newton = s.value("max_newton", 6000);
    cfg.solver.max_outer = s.value("max_outer", 50);
    cfg.solver.polish = s.value("polish", false);
    cfg.solver.polish_factor = s.value("polish_factor", 50.0);
    cfg.solver.mu_shrink = s.value("mu_shrink", 0.05);
    cfg.solver.verbose = s.value("verbose", false);
  }

  // simulation (optional)
  if (j.contains("simulation")) {
    const json& s = j["simulation"];
    auto& sim = cfg.simulation;
    sim.horizon = s.value("horizon", 10.0);
    sim.step = s.value("step", 1e-3);
    sim.seed = s.value("seed", 1ull);
    sim.m0 = s.value("m0", 1);
    sim.runs = s.value("runs", 50);
    sim.output_stride = s.value("output_stride", 10);
    sim.symmetric_w = s.value("symmetric_w", false);
    std::string mode = s.value("mode", "local");
    if (mode == "local") sim.mode = GainMode::LocalGains;
    else if (mode == "global") sim.mode = GainMode::GlobalGains;
    else throw ConfigError("simulation.mode", "expected 'local' or 'global'");
    if (s.contains("x0")) sim.x0 = parse_vector(s["x0"], "simulation.x0");
    else sim.x0 = Vector::Zero(n);
    if (sim.x0.size() != n)
      throw ConfigError("simulation.x0", "dimension must match the plant state");
    if (s.contains("battery")) {
      int ci = 0;
      for (const auto& c : s["battery"]) {
        std::ostringstream p;
        p << "simulation.battery[" << ci++ << "]";
        RatioCase rc;
        rc.name = c.value("name", p.str());
        rc.x0 = c.contains("x0") ? parse_vector(c["x0"], p.str() + ".x0")
                                 : Vector::Zero(n);
        if (rc.x0.size() != n)
          throw ConfigError(p.str() + ".x0", "dimension mismatch");
        rc.dist.symmetric_w = sim.symmetric_w;
        if (c.contains("xi")) rc.dist.xi = parse_signal(c["xi"], p.str() + ".xi");
        if (rc.dist.xi.kind == DisturbanceSignal::Kind::PiecewiseRandom)
          throw ConfigError(p.str() + ".xi",
                            "xi is a deterministic L2 disturbance");
        if (c.contains("xi_nodes")) {
          int ni = 0;
          for (const auto& sj : c["xi_nodes"]) {
            std::ostringstream pp;
            pp << p.str() << ".xi_nodes[" << ni++ << "]";
            auto sig = parse_signal(sj, pp.str());
            if (sig.kind == DisturbanceSignal::Kind::PiecewiseRandom)
              throw ConfigError(pp.str(), "xi_i is a deterministic L2 disturbance");
            rc.dist.xi_nodes.push_back(sig);
          }
        }
        rc.dist.xi_nodes.resize(nn, DisturbanceSignal::zero());
        if (c.contains("w_default")) {
          auto sig = parse_signal(c["w_default"], p.str() + ".w_default");
          for (const auto& edge : cfg.network.edge_union())
            rc.dist.w[edge] = sig;
        }
        if (c.contains("w")) {
          int wi = 0;
          for (const auto& we : c["w"]) {
            std::ostringstream pp;
            pp << p.str() << ".w[" << wi++ << "]";
            auto edge = parse_edge(we, pp.str());
            rc.dist.w[edge] =
                parse_signal(require(we, "signal", pp.str()), pp.str() + ".signal");
          }
        }
        sim.battery.push_back(std::move(rc));
      }
    }
  } else {
    cfg.simulation.x0 = Vector::Zero(n);
  }
  return cfg;
}

ProblemConfig ProblemConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::vector<Violation> ProblemConfig::validate() const {
  std::vector<Violation> out = validate_network(network);
  auto mv = validate_model(plant, measurements, channels, network);
  out.insert(out.end(), mv.begin(), mv.end());
  auto bv = validate_budget(budget, network);
  out.insert(out.end(), bv.begin(), bv.end());
  if (simulation.horizon <= 0)
    out.push_back({"simulation.horizon", "must be positive"});
  if (simulation.step <= 0)
    out.push_back({"simulation.step", "must be positive"});
  if (simulation.m0 < 1 || simulation.m0 > network.global_count())
    out.push_back({"simulation.m0", "initial state out of range"});
  return out;
}

std::string violations_to_json(const std::vector<Violation>& violations) {
  json arr = json::array();
  for (const auto& v : violations)
    arr.push_back({{"path", v.path}, {"message", v.message}});
  json out;
  out["violations"] = arr;
  out["valid"] = violations.empty();
  return out.dump(2);
}

}  // namespace hinfcon
