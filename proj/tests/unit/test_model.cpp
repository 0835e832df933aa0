#include <doctest.h>

#include "hinfcon/model.hpp"
#include "test_util.hpp"

using namespace hinfcon;
using hinfcon_test::load_chua5;

TEST_CASE("noise shape E from the example sensors") {
  MeasurementTriplet t;
  t.C = Matrix::Zero(1, 3);
  t.D = Matrix::Zero(1, 1);
  t.Dbar = Matrix::Constant(1, 1, 0.025);
  MeasurementModel mm({{t}});
  Matrix e = noise_shape_E(mm, 1, 1);
  CHECK(e(0, 0) == doctest::Approx(6.25e-4).epsilon(1e-14));
}

TEST_CASE("noise shape E identity and degenerate cases") {
  MeasurementTriplet id;
  id.C = Matrix::Zero(2, 2);
  id.D = Matrix::Identity(2, 2);
  id.Dbar = Matrix::Zero(2, 1);
  MeasurementModel mm_id({{id}});
  CHECK(noise_shape_E(mm_id, 1, 1).isApprox(Matrix::Identity(2, 2)));

  MeasurementTriplet zero;
  zero.C = Matrix::Zero(2, 2);
  zero.D = Matrix::Zero(2, 2);
  zero.Dbar = Matrix::Zero(2, 1);
  MeasurementModel mm_zero({{zero}});
  CHECK_THROWS_AS(noise_shape_E(mm_zero, 1, 1), std::domain_error);
}

TEST_CASE("noise shape F from the example channels") {
  ChannelModel cm;
  cm.set(1, 2, Matrix::Identity(3, 3), 0.5 * Matrix::Identity(3, 3));
  CHECK(noise_shape_F(cm, 1, 2).isApprox(0.25 * Matrix::Identity(3, 3)));
  cm.set(2, 1, Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  CHECK(noise_shape_F(cm, 2, 1).isApprox(Matrix::Identity(3, 3)));
  cm.set(1, 3, Matrix::Identity(3, 3), Matrix::Zero(3, 3));
  CHECK_THROWS_AS(noise_shape_F(cm, 1, 3), std::domain_error);
}

TEST_CASE("noise shapes are symmetric with positive spectra") {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    MeasurementTriplet t;
    t.C = hinfcon_test::random_matrix(2, 3, s);
    t.D = hinfcon_test::random_matrix(2, 2, s + 100);
    t.Dbar = hinfcon_test::random_matrix(2, 2, s + 200) +
             2.0 * Matrix::Identity(2, 2);
    MeasurementModel mm({{t}});
    Matrix e = noise_shape_E(mm, 1, 1);
    CHECK((e - e.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(e);
    CHECK(es.eigenvalues().minCoeff() > 0);
  }
}

TEST_CASE("the shipped example model validates cleanly") {
  auto cfg = load_chua5();
  CHECK(validate_model(cfg.plant, cfg.measurements, cfg.channels, cfg.network)
            .empty());
  CHECK(validate_budget(cfg.budget, cfg.network).empty());
}

TEST_CASE("local-state constancy of triplets is enforced") {
  auto cfg = load_chua5();
  // node 1 keeps local state 1 in both globals; a differing C must be caught
  MeasurementTriplet a = cfg.measurements.at(1, 1);
  MeasurementTriplet b = a;
  b.C(0, 0) += 0.5;
  std::vector<std::vector<MeasurementTriplet>> table;
  for (int i = 1; i <= 5; ++i) {
    table.push_back({cfg.measurements.at(i, 1), cfg.measurements.at(i, 2)});
  }
  table[0][1] = b;
  MeasurementModel broken(table);
  auto v = validate_model(cfg.plant, broken, cfg.channels, cfg.network);
  bool found = false;
  for (const auto& viol : v)
    if (viol.message.find("sharing local state") != std::string::npos)
      found = true;
  CHECK(found);
}

TEST_CASE("dimension violations are reported with paths") {
  auto cfg = load_chua5();
  PlantModel broken = cfg.plant;
  broken.B2 = Matrix::Zero(2, 1);  // wrong row count
  auto v = validate_model(broken, cfg.measurements, cfg.channels, cfg.network);
  bool found = false;
  for (const auto& viol : v)
    if (viol.path == "plant.B2") found = true;
  CHECK(found);
}
