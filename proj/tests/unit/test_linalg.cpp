#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpd/error.hpp"
#include "cpd/linalg.hpp"
#include "fixtures.hpp"

using namespace cpd;
using cpd::testing::max_abs;

namespace {

// Singular values and left vectors from the eigen-decomposition of m m^T,
// descending.
std::pair<Vector, Matrix> gram_svd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m * m.transpose());
  const Eigen::Index n = es.eigenvalues().size();
  Vector s(n);
  Matrix u(m.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s(i) = std::sqrt(std::max(0.0, es.eigenvalues()(n - 1 - i)));
    u.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return {s, u};
}

}  // namespace

TEST_CASE("svd_r") {
  SUBCASE("diagonal matrix") {
    Matrix d = Vector::LinSpaced(3, 3, 1).asDiagonal();
    const Matrix u = svd_r(d, 2);
    CHECK(max_abs(u - Matrix::Identity(3, 2)) < 1e-14);
  }
  SUBCASE("rank one") {
    RandomSource rng(1, 0);
    const Vector a = rng.normal_vector(5);
    const Vector b = rng.normal_vector(4);
    const Matrix u = svd_r(a * b.transpose(), 1);
    const Vector an = a.normalized();
    CHECK(std::min((u.col(0) - an).norm(), (u.col(0) + an).norm()) < 1e-12);
    Eigen::Index arg;
    u.col(0).cwiseAbs().maxCoeff(&arg);
    CHECK(u(arg, 0) > 0.0);
  }
  SUBCASE("random 6x8, r=3 against the Gram eigen oracle") {
    RandomSource rng(2, 0);
    const Matrix m = rng.normal_matrix(6, 8);
    const Matrix u = svd_r(m, 3);
    const auto [s, _] = gram_svd(m);
    CHECK((u.transpose() * u - Matrix::Identity(3, 3)).norm() <= 1e-10);
    const double resid = (m - u * u.transpose() * m).norm();
    // Frobenius residual of the best rank-3 projection.
    const double expected = s.tail(3).norm();
    CHECK(resid <= expected + 1e-10);
    CHECK(resid == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::abs((m - u * u.transpose() * m).operatorNorm() - s(3)) <= 1e-10);
  }
  CHECK_THROWS_AS(svd_r(Matrix::Identity(3, 3), 4), InvalidArgument);
  CHECK_THROWS_AS(svd_r(Matrix::Identity(3, 3), 0), InvalidArgument);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd_r(bad, 1), InvalidArgument);
}

TEST_CASE("pinv") {
  CHECK(max_abs(pinv(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)) < 1e-15);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2.0;
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 0.5;
  CHECK(max_abs(pinv(d) - expected) < 1e-15);

  RandomSource rng(3, 0);
  auto penrose = [](const Matrix& m) {
    const Matrix p = pinv(m);
    const double s = m.norm();
    CHECK((m * p * m - m).norm() <= 1e-8 * s);
    CHECK((p * m * p - p).norm() <= 1e-8 * p.norm());
    CHECK(((m * p).transpose() - m * p).norm() <= 1e-8);
    CHECK(((p * m).transpose() - p * m).norm() <= 1e-8);
  };
  penrose(rng.normal_matrix(4, 6));
  penrose(rng.normal_matrix(6, 4));
  penrose(rng.normal_matrix(5, 2) * rng.normal_matrix(2, 7));  // rank deficient
  CHECK(numerical_rank(rng.normal_matrix(5, 2) * rng.normal_matrix(2, 7)) == 2);
}

TEST_CASE("eig") {
  SUBCASE("diagonal") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 3.0;
    const EigenPairs e = eig(d);
    CHECK(e.values(0).real() == doctest::Approx(3.0));
    CHECK(e.values(1).real() == doctest::Approx(1.0));
    CHECK(std::abs(std::abs(e.vectors(1, 0)) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(e.vectors(0, 1)) - 1.0) < 1e-12);
  }
  SUBCASE("rotation by 90 degrees") {
    Matrix r(2, 2);
    r << 0, -1, 1, 0;
    const EigenPairs e = eig(r);
    CHECK(std::abs(e.values(0).real()) < 1e-14);
    CHECK(std::abs(std::abs(e.values(0).imag()) - 1.0) < 1e-14);
    CHECK(std::abs(e.values(0) + e.values(1)) < 1e-14);
  }
  SUBCASE("construct then recover") {
    RandomSource rng(4, 0);
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix v = rng.normal_matrix(6, 6);
      Vector dvals(6);
      dvals << 5.0, -4.0, 3.0, 2.0, -1.5, 0.5;
      const Matrix a = v * dvals.asDiagonal() * v.inverse();
      const EigenPairs e = eig(a);
      std::vector<double> want(dvals.data(), dvals.data() + 6);
      std::sort(want.begin(), want.end(), [](double x, double y) { return std::abs(x) > std::abs(y); });
      for (Eigen::Index i = 0; i < 6; ++i) {
        CHECK(std::abs(e.values(i).imag()) < 1e-8);
        CHECK(e.values(i).real() == doctest::Approx(want[static_cast<std::size_t>(i)]).epsilon(1e-8));
        const ComplexVector vi = e.vectors.col(i);
        CHECK(std::abs(vi.norm() - 1.0) < 1e-12);
        CHECK((a.cast<std::complex<double>>() * vi - e.values(i) * vi).norm() <= 1e-8 * a.norm());
      }
    }
  }
  SUBCASE("badly scaled matrix keeps the residual contract") {
    RandomSource rng(5, 0);
    Matrix a = rng.normal_matrix(5, 5);
    Vector scale(5);
    scale << 1e-6, 1e-3, 1.0, 1e3, 1e6;
    a = scale.asDiagonal() * a * scale.cwiseInverse().asDiagonal();
    const EigenPairs e = eig(a);
    for (Eigen::Index i = 0; i < 5; ++i) {
      const ComplexVector vi = e.vectors.col(i);
      CHECK((a.cast<std::complex<double>>() * vi - e.values(i) * vi).norm() <= 1e-8 * a.norm());
    }
    for (Eigen::Index i = 0; i + 1 < 5; ++i) CHECK(std::abs(e.values(i)) >= std::abs(e.values(i + 1)) - 1e-12);
  }
  CHECK_THROWS_AS(eig(Matrix::Zero(2, 3)), InvalidArgument);
}

TEST_CASE("lstsq") {
  RandomSource rng(6, 0);
  const Matrix b = rng.normal_matrix(4, 2);
  CHECK(max_abs(lstsq(Matrix::Identity(4, 4), b) - b) < 1e-14);
  const Matrix a = rng.normal_matrix(8, 3);
  const Matrix x = rng.normal_matrix(3, 2);
  CHECK(max_abs(lstsq(a, a * x) - x) < 1e-12);
  const Matrix a2 = rng.normal_matrix(7, 4);
  const Matrix b2 = rng.normal_matrix(7, 3);
  CHECK(max_abs(lstsq(a2, b2) - pinv(a2) * b2) < 1e-8);
  // minimum-norm solution on a rank-deficient system
  const Matrix a3 = rng.normal_matrix(6, 2) * rng.normal_matrix(2, 4);
  const Matrix b3 = rng.normal_matrix(6, 1);
  CHECK(max_abs(lstsq(a3, b3) - pinv(a3) * b3) < 1e-8);
  CHECK_THROWS_AS(lstsq(Matrix::Identity(3, 3), Matrix::Zero(2, 1)), InvalidArgument);
}

TEST_CASE("fix_column_signs makes the largest entry positive") {
  Matrix m(3, 2);
  m << 1, -5, -4, 2, 2, 1;
  fix_column_signs(m);
  CHECK(m(1, 0) == 4.0);
  CHECK(m(0, 1) == 5.0);
}
