#include <doctest.h>

#include "cpd/error.hpp"
#include "cpd/tucker.hpp"
#include "fixtures.hpp"

using namespace cpd;
using cpd::testing::random_tensor;

namespace {

Matrix orthonormal(Eigen::Index p, Eigen::Index r, RandomSource& rng) {
  Eigen::HouseholderQR<Matrix> qr(rng.normal_matrix(p, r));
  return qr.householderQ() * Matrix::Identity(p, r);
}

double projector_gap(const Matrix& a, const Matrix& b) {
  return (a * a.transpose() - b * b.transpose()).norm();
}

}  // namespace

TEST_CASE("hosvd of a rank-one tensor spans the loadings") {
  RandomSource rng(1, 0);
  std::vector<Vector> v{rng.normal_vector(4), rng.normal_vector(3), rng.normal_vector(5)};
  const auto u = hosvd(outer(v), {1, 1, 1});
  for (std::size_t k = 0; k < 3; ++k) {
    const Vector a = v[k].normalized();
    CHECK(std::min((u[k].col(0) - a).norm(), (u[k].col(0) + a).norm()) < 1e-12);
  }
}

TEST_CASE("hosvd and hooi on an exact Tucker tensor") {
  RandomSource rng(2, 0);
  const Dims dims{6, 5, 7};
  const std::vector<std::size_t> ranks{2, 3, 2};
  std::vector<Matrix> u;
  for (std::size_t k = 0; k < 3; ++k) {
    u.push_back(orthonormal(static_cast<Eigen::Index>(dims[k]), static_cast<Eigen::Index>(ranks[k]), rng));
  }
  const DenseTensor core = random_tensor({2, 3, 2}, rng);
  const DenseTensor y = tucker_reconstruct(core, u);
  const auto h = hosvd(y, ranks);
  for (std::size_t k = 0; k < 3; ++k) CHECK(projector_gap(h[k], u[k]) <= 1e-8);

  const TuckerModel m = hooi(y, {ranks, 50, 1e-10});
  CHECK(m.residual <= 1e-9 * frobenius_norm(y));
  CHECK(frobenius_norm(y - tucker_reconstruct(m.core, m.factors)) <= 1e-9 * frobenius_norm(y));
  CHECK(m.core.dims() == Dims{2, 3, 2});
}

TEST_CASE("hooi subspaces contain noiseless CP loadings") {
  RandomSource rng(3, 0);
  const CpModel cp = cpd::testing::random_model({8, 7, 6}, 3, rng);
  const TuckerModel m = hooi(cp_reconstruct(cp), {{3, 3, 3}, 50, 1e-10});
  for (std::size_t k = 0; k < 3; ++k) {
    const Matrix& uk = m.factors[k];
    const Matrix off = cp.factors[k] - uk * (uk.transpose() * cp.factors[k]);
    CHECK(off.operatorNorm() <= 1e-8);
  }
}

TEST_CASE("hooi fit is nondecreasing and factors are orthonormal") {
  RandomSource rng(4, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const DenseTensor y = random_tensor({6, 7, 5}, rng);
    const TuckerModel m = hooi(y, {{2, 3, 2}, 30, 0.0});
    REQUIRE(m.fit_trace.size() == static_cast<std::size_t>(m.iterations) + 1);
    for (std::size_t t = 1; t < m.fit_trace.size(); ++t) {
      CHECK(m.fit_trace[t] >= m.fit_trace[t - 1] * (1 - 1e-12));
    }
    for (const Matrix& u : m.factors) {
      CHECK((u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).norm() <= 1e-10);
    }
    CHECK(frobenius_norm(tucker_core(y, m.factors) - m.core) <= 1e-12 * frobenius_norm(y));
  }
}

TEST_CASE("tucker rank validation") {
  RandomSource rng(5, 0);
  const DenseTensor y = random_tensor({3, 4, 2}, rng);
  CHECK_THROWS_AS(hosvd(y, {4, 1, 1}), InvalidArgument);
  CHECK_THROWS_AS(hosvd(y, {1, 1}), InvalidArgument);
  CHECK_THROWS_AS(hooi(y, {{0, 1, 1}, 10, 1e-10}), InvalidArgument);
}
