#include <doctest.h>

#include "hinfcon/lmi.hpp"
#include "hinfcon/sdp.hpp"
#include "test_util.hpp"

using namespace hinfcon;
using hinfcon_test::load_chua5;

namespace {

/// assembler over the shipped example in the requested mode
struct Chua {
  ProblemConfig cfg;
  LmiAssembler assembler;
  explicit Chua(SynthesisMode mode)
      : cfg(load_chua5()),
        assembler(cfg.plant, cfg.measurements, cfg.channels, cfg.network,
                  cfg.budget, mode) {}
};

Vector random_assignment(const LmiProblem& p, std::uint64_t seed) {
  SplitUniform rng(seed);
  Vector v(p.total_size());
  for (int i = 0; i < v.size(); ++i) v(i) = 2.0 * rng.next() - 1.0;
  return v;
}

}  // namespace

TEST_CASE("scalar LMIs bound the multipliers from above") {
  Chua chua(SynthesisMode::LocalTheorem2);
  auto scalars = chua.assembler.assemble_scalar_lmis();
  // node 1 carries tau and the (1,3) edge theta, in both states
  REQUIRE(scalars.size() == 4);
  const auto& p = chua.assembler.problem();
  Vector v = p.initial_point();

  // gamma^2 - tau alpha^2 E > 0  <=>  tau < 0.7407 / 0.0625 = 11.8512
  int tau = chua.assembler.tau_var(1, 1);
  for (const auto& c : scalars) {
    if (c.name != "scalar_tau_1^1") continue;
    p.set_scalar(v, tau, 11.84);
    CHECK(c.slack(v) < 0);
    p.set_scalar(v, tau, 11.86);
    CHECK(c.slack(v) > 0);
  }
  // gamma^2 I - theta beta^2 F > 0  <=>  theta < 0.7407 / 100 = 0.007407
  int theta = chua.assembler.theta_var(1, 3, 1);
  for (const auto& c : scalars) {
    if (c.name != "scalar_theta_1,3^1") continue;
    p.set_scalar(v, theta, 0.00740);
    CHECK(c.slack(v) < 0);
    p.set_scalar(v, theta, 0.00742);
    CHECK(c.slack(v) > 0);
  }
}

TEST_CASE("zero uncertainty budget emits no scalar machinery") {
  auto cfg = load_chua5();
  cfg.budget.alpha2.assign(5, 0.0);
  cfg.budget.beta2.clear();
  LmiAssembler assembler(cfg.plant, cfg.measurements, cfg.channels, cfg.network,
                         cfg.budget, SynthesisMode::LocalTheorem2);
  CHECK(assembler.assemble_scalar_lmis().empty());
  CHECK(assembler.tau_var(1, 1) == -1);
  CHECK(assembler.theta_var(1, 3, 1) == -1);
}

TEST_CASE("assembled constraints are symmetric to machine precision") {
  Chua chua(SynthesisMode::LocalTheorem2);
  auto problem = chua.assembler.build();
  Vector v = random_assignment(problem, 11);
  for (const auto& c : problem.constraints()) {
    Matrix m = c.evaluate(v);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * (1 + m.norm()));
  }
}

TEST_CASE("constraint evaluation is affine in the variables") {
  Chua chua(SynthesisMode::LocalTheorem2);
  auto problem = chua.assembler.build();
  Vector v1 = random_assignment(problem, 21);
  Vector v2 = random_assignment(problem, 22);
  for (const auto& c : problem.constraints()) {
    Matrix lhs = c.evaluate(v1 + v2);
    Matrix rhs = c.evaluate(v1) + c.evaluate(v2) - c.constant;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10 * (1 + rhs.norm()));
  }
}

TEST_CASE("main LMI block layout follows the budget and the edges") {
  Chua chua(SynthesisMode::LocalTheorem2);
  // node 1 in state 1: n + l + l_1 + 3n (tau, theta, vartheta) + n (one edge)
  auto c1 = chua.assembler.assemble_main_lmi(1, 1);
  CHECK(c1.dim == 3 + 1 + 1 + 9 + 3);
  // node 4 in state 1 has two neighbours and no scalar machinery
  auto c4 = chua.assembler.assemble_main_lmi(4, 1);
  CHECK(c4.dim == 3 + 1 + 1 + 6);
}

TEST_CASE("isolated node with zero budget reduces to the three head blocks") {
  PlantModel pm{Matrix::Constant(1, 1, -1.0), Matrix::Zero(1, 1)};
  MeasurementTriplet t;
  t.C = Matrix::Constant(1, 1, 1.0);
  t.D = Matrix::Zero(1, 1);
  t.Dbar = Matrix::Constant(1, 1, 1.0);
  MeasurementModel mm({{t}});
  ChannelModel cm;
  std::vector<Digraph> graphs = {Digraph::from_in_neighbours(1, {{}})};
  Matrix lam = Matrix::Zero(1, 1);
  SwitchingNetwork net(graphs, MarkovGenerator(lam), StateMapping(1, {1}, {{1}}));
  UncertaintyBudget budget{1.0, {0.0}, {}, {0.5}};
  LmiAssembler assembler(pm, mm, cm, net, budget, SynthesisMode::LocalTheorem2);
  auto c = assembler.assemble_main_lmi(1, 1);
  CHECK(c.dim == 3);  // n + l + l_1, no T rows, no edge rows

  // scalar surrogate reduction: Q = 2 X (a + delta) - gamma^2 c^2 / e
  const auto& p = assembler.problem();
  Vector v = p.initial_point();
  p.set_matrix(v, assembler.x_var(1, 1), Matrix::Constant(1, 1, 0.5));
  Matrix m = c.evaluate(v);
  CHECK(m(0, 0) == doctest::Approx(2 * 0.5 * (-1 + 0.5) - 1.0));
  CHECK(m(1, 1) == doctest::Approx(-1.0));  // -gamma^2
  CHECK(m(2, 2) == doctest::Approx(-1.0));
  CHECK(m(0, 1) == doctest::Approx(0.0));  // B2 = 0 kills the N row
  // margin at X = 0.9 stays feasible (any positive X does here)
  p.set_matrix(v, assembler.x_var(1, 1), Matrix::Constant(1, 1, 0.9));
  CHECK(c.slack(v) < 0);
}

TEST_CASE("corollary LMI equals the main LMI when the budget vanishes") {
  auto cfg = load_chua5();
  cfg.budget.alpha2.assign(5, 0.0);
  cfg.budget.beta2.clear();
  LmiAssembler assembler(cfg.plant, cfg.measurements, cfg.channels, cfg.network,
                         cfg.budget, SynthesisMode::LocalTheorem2);
  for (int i = 1; i <= 5; ++i) {
    for (int k = 1; k <= 2; ++k) {
      auto main = assembler.assemble_main_lmi(i, k);
      auto coro = assembler.assemble_corollary_lmi(i, k);
      REQUIRE(main.dim == coro.dim);
      Vector v = random_assignment(assembler.problem(), 31 + i + 10 * k);
      Matrix diff = main.evaluate(v) - coro.evaluate(v);
      CHECK(diff.cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("delta LMIs vanish for singleton conditioning sets") {
  Chua chua(SynthesisMode::LocalTheorem2);
  for (int i = 2; i <= 5; ++i) {
    CHECK(chua.assembler.assemble_delta_lmis(i, 1).empty());
    CHECK(chua.assembler.assemble_delta_lmis(i, 2).empty());
  }
  CHECK(chua.assembler.assemble_delta_lmis(1, 1).size() == 2);  // L and K(1,3)
}

TEST_CASE("equal per-state Y blocks zero the deviation blocks") {
  Chua chua(SynthesisMode::LocalTheorem2);
  auto cs = chua.assembler.assemble_delta_lmis(1, 1);
  const auto& p = chua.assembler.problem();
  Vector v = p.initial_point();
  Matrix y = hinfcon_test::random_spd(3, 5);
  p.set_matrix(v, chua.assembler.y_var(1, 1), y);
  p.set_matrix(v, chua.assembler.y_var(1, 2), y);
  for (const auto& c : cs) {
    Matrix m = c.evaluate(v);
    // negated [[alpha^2 I, 0], [0, I]]: strictly negative diagonal
    Matrix offdiag = m;
    offdiag.topLeftCorner(3, 3).setZero();
    offdiag.bottomRightCorner(m.rows() - 3, m.cols() - 3).setZero();
    CHECK(offdiag.cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(c.slack(v) < 0);
  }
}

TEST_CASE("deviation block matches the conditional-average formula") {
  Chua chua(SynthesisMode::LocalTheorem2);
  auto cs = chua.assembler.assemble_delta_lmis(1, 1);
  const auto& p = chua.assembler.problem();
  Vector v = p.initial_point();
  Matrix y1 = hinfcon_test::random_spd(3, 15);
  Matrix y2 = hinfcon_test::random_spd(3, 16);
  p.set_matrix(v, chua.assembler.y_var(1, 1), y1);
  p.set_matrix(v, chua.assembler.y_var(1, 2), y2);
  const double g2 = chua.cfg.budget.gamma2;
  Matrix ce = chua.cfg.measurements.at(1, 1).C.transpose() *
              chua.assembler.Einv(1, 1);
  Matrix expected_l = 0.5 * g2 * (y1 - y2) * ce;  // lambda-bar = (1/2, 1/2)
  Matrix hf = chua.cfg.channels.H(1, 3).transpose() * chua.assembler.Finv(1, 3);
  Matrix expected_k = 0.5 * g2 * (y1 - y2) * hf;
  for (const auto& c : cs) {
    Matrix m = c.evaluate(v);
    Matrix delta = -m.topRightCorner(3, m.cols() - 3);  // negated storage
    if (c.name.rfind("deltaL", 0) == 0) {
      CHECK((delta - expected_l).cwiseAbs().maxCoeff() <= 1e-12);
    } else {
      CHECK((delta - expected_k).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("rank blocks encode the inverse pairing") {
  Chua chua(SynthesisMode::LocalTheorem2);
  auto problem = chua.assembler.build();
  REQUIRE(problem.rank_constraints().size() == 10);
  const auto& rc = problem.rank_constraints().front();
  Vector v = problem.initial_point();

  // n = 1 case by analogy: on the 3x3 blocks use X = 2I, Y = 0.5I
  problem.set_matrix(v, rc.x_var, 2.0 * Matrix::Identity(3, 3));
  problem.set_matrix(v, rc.y_var, 0.5 * Matrix::Identity(3, 3));
  CHECK(rank_residual(problem, rc, v) <= 1e-12);

  // generic inverse pair has exactly n vanishing singular values
  Matrix x = hinfcon_test::random_spd(3, 77);
  problem.set_matrix(v, rc.x_var, x);
  problem.set_matrix(v, rc.y_var, x.inverse());
  CHECK(rank_residual(problem, rc, v) <= 1e-8);

  // a perturbed inverse is full rank
  problem.set_matrix(v, rc.y_var, x.inverse() + 0.1 * Matrix::Identity(3, 3));
  CHECK(rank_residual(problem, rc, v) > 1e-3);
}

TEST_CASE("debug dump lists variables and constraints") {
  Chua chua(SynthesisMode::LocalTheorem2);
  auto problem = chua.assembler.build();
  std::string dump = problem.debug_dump_json();
  CHECK(dump.find("X_1^1") != std::string::npos);
  CHECK(dump.find("main_3^2") != std::string::npos);
  CHECK(dump.find("rank_5^2") != std::string::npos);
}
