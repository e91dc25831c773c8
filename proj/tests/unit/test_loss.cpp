#include <doctest.h>

#include <cmath>

#include "cpd/error.hpp"
#include "cpd/loss.hpp"
#include "fixtures.hpp"

using namespace cpd;

TEST_CASE("loss_general") {
  RandomSource rng(1, 0);
  const CpModel truth = cpd::testing::random_model({5, 4, 6}, 3, rng);
  CHECK(loss_general(truth, truth) == 0.0);

  SUBCASE("sign flips of estimated columns") {
    CpModel est = truth;
    est.factors[0].col(1) *= -1;
    est.factors[2] *= -1;
    CHECK(loss_general(est, truth) == 0.0);
  }
  SUBCASE("simultaneous flips of true weight and column") {
    CpModel flipped = truth;
    flipped.lambdas(2) *= -1;
    flipped.factors[1].col(2) *= -1;
    CHECK(frobenius_norm(cp_reconstruct(flipped) - cp_reconstruct(truth)) < 1e-13);
    CHECK(loss_general(truth, flipped) == 0.0);
  }
  SUBCASE("one column rotated in a plane") {
    const double theta = 0.3;
    CpModel est = truth;
    const Vector a = truth.factors[1].col(0);
    Vector b = rng.normal_vector(a.size());
    b -= b.dot(a) * a;
    b.normalize();
    est.factors[1].col(0) = std::cos(theta) * a + std::sin(theta) * b;
    CHECK(loss_general(est, truth) == doctest::Approx(std::sqrt(2 - 2 * std::cos(theta))).epsilon(1e-12));
  }
  CpModel wrong = truth;
  wrong.factors.pop_back();
  CHECK_THROWS_AS(loss_general(wrong, truth), InvalidArgument);
}

TEST_CASE("loss_unmatched") {
  RandomSource rng(2, 0);
  const Matrix a = cpd::testing::unit_columns(6, 3, rng);
  CHECK(loss_unmatched(a, a).maxCoeff() == 0.0);
  Matrix perm(6, 3);
  perm << a.col(2), -a.col(0), a.col(1);
  CHECK(loss_unmatched(perm, a).maxCoeff() == 0.0);

  Matrix est = a;
  const Vector delta = 0.01 * rng.normal_vector(6);
  est.col(1) += delta;
  const Vector l = loss_unmatched(est, a);
  CHECK(l(0) == 0.0);
  CHECK(l(2) == 0.0);
  double direct = 1e300;
  for (Eigen::Index r = 0; r < 3; ++r) {
    direct = std::min({direct, (est.col(1) - a.col(r)).norm(), (est.col(1) + a.col(r)).norm()});
  }
  CHECK(l(1) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(l(1) == doctest::Approx(delta.norm()).epsilon(1e-14));
  CHECK_THROWS_AS(loss_unmatched(a, Matrix::Zero(5, 3)), InvalidArgument);
}

TEST_CASE("loss_matched is invariant under a shared column permutation") {
  RandomSource rng(3, 0);
  const CpModel truth = cpd::testing::random_model({5, 4, 6}, 3, rng);
  CpModel est = truth;
  for (auto& f : est.factors) {
    Matrix g(f.rows(), 3);
    g << f.col(1), -f.col(2), f.col(0);
    f = g;
  }
  est.lambdas << truth.lambdas(1), truth.lambdas(2), truth.lambdas(0);
  CHECK(loss_general(est, truth) > 0.1);
  CHECK(loss_matched(est, truth) == 0.0);

  // a single-component estimate is scored against its best partner
  CpModel one;
  one.lambdas = truth.lambdas.head(1);
  for (const auto& f : truth.factors) one.factors.push_back(f.col(2));
  CHECK(loss_matched(one, truth) == 0.0);
}

TEST_CASE("sign_distance") {
  Vector a(2), b(2);
  a << 1, 0;
  b << -1, 0;
  CHECK(sign_distance(a, b) == 0.0);
  b << 0, 1;
  CHECK(sign_distance(a, b) == doctest::Approx(std::sqrt(2.0)));
}
