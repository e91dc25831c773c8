#include <doctest.h>

#include <array>

#include "cpd/error.hpp"
#include "cpd/oracle.hpp"
#include "fixtures.hpp"

using namespace cpd;
using cpd::testing::max_abs;
using cpd::testing::max_abs_diff;
using cpd::testing::random_tensor;

TEST_CASE("unfold of an order-2 tensor along mode 0 is the matrix itself") {
  DenseTensor t({2, 2}, {1, 2, 3, 4});
  Matrix expected(2, 2);
  expected << 1, 2, 3, 4;
  CHECK(unfold(t, 0) == expected);
}

TEST_CASE("unfold of the 2x2x2 tensor 1..8 follows the index map") {
  DenseTensor t({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  // value(i0,i1,i2) = 1 + 4 i0 + 2 i1 + i2; mode-0 column = i1 + 2 i2
  Matrix m0(2, 4);
  m0 << 1, 3, 2, 4, 5, 7, 6, 8;
  CHECK(unfold(t, 0) == m0);
  // mode-1 column = i0 + 2 i2
  Matrix m1(2, 4);
  m1 << 1, 5, 2, 6, 3, 7, 4, 8;
  CHECK(unfold(t, 1) == m1);
  // mode-2 column = i0 + 2 i1
  Matrix m2(2, 4);
  m2 << 1, 5, 3, 7, 2, 6, 4, 8;
  CHECK(unfold(t, 2) == m2);
  CHECK(oracle::naive_unfold(t, 0) == m0);
}

TEST_CASE("unfold and fold are inverse") {
  RandomSource rng(1, 0);
  const DenseTensor t = random_tensor({3, 4, 5}, rng);
  for (std::size_t k = 0; k < 3; ++k) {
    const Matrix m = unfold(t, k);
    CHECK(m.rows() == static_cast<Eigen::Index>(t.dim(k)));
    CHECK(fold(m, k, t.dims()) == t);
    CHECK(unfold(fold(m, k, t.dims()), k) == m);
  }
}

TEST_CASE("fold edge cases") {
  CHECK(fold(Matrix::Zero(3, 20), 1, {4, 3, 5}) == DenseTensor({4, 3, 5}));
  Matrix row(1, 4);
  row << 1, 2, 3, 4;
  const DenseTensor v = fold(row.transpose(), 0, {4});
  CHECK(v.order() == 1);
  CHECK(v.dims() == Dims{4});
  CHECK(v[2] == 3.0);
  CHECK_THROWS_AS(fold(Matrix::Zero(2, 3), 0, {2, 2}), InvalidArgument);
  CHECK_THROWS_AS(unfold(DenseTensor({2, 2}), 2), InvalidArgument);
}

TEST_CASE("mode_product") {
  RandomSource rng(2, 0);
  SUBCASE("identity leaves the tensor unchanged") {
    const DenseTensor t = random_tensor({3, 4, 2}, rng);
    CHECK(mode_product(t, 1, Matrix::Identity(4, 4)) == t);
  }
  SUBCASE("row of ones sums over the mode") {
    DenseTensor ones({2, 2, 2}, std::vector<double>(8, 1.0));
    Matrix b(1, 2);
    b << 1, 1;
    const DenseTensor out = mode_product(ones, 0, b);
    CHECK(out.dims() == Dims{1, 2, 2});
    CHECK(out == DenseTensor({1, 2, 2}, std::vector<double>(4, 2.0)));
  }
  SUBCASE("agrees with direct summation and the unfold identity") {
    const DenseTensor t = random_tensor({3, 3, 3}, rng);
    const Matrix b = rng.normal_matrix(2, 3);
    for (std::size_t k = 0; k < 3; ++k) {
      const DenseTensor fast = mode_product(t, k, b);
      CHECK(max_abs_diff(fast, oracle::naive_mode_product(t, k, b)) < 1e-13);
      CHECK(max_abs(unfold(fast, k) - b * unfold(t, k)) < 1e-13);
    }
  }
  CHECK_THROWS_AS(mode_product(DenseTensor({2, 3}), 0, Matrix::Identity(3, 3)), InvalidArgument);
}

TEST_CASE("contract_vectors") {
  RandomSource rng(3, 0);
  SUBCASE("no modes returns the input") {
    const DenseTensor t = random_tensor({2, 3, 4}, rng);
    CHECK(contract_vectors(t, {}, {}) == t);
  }
  SUBCASE("rank-one tensor contracted on the last mode") {
    const std::array<Vector, 3> v{rng.normal_vector(2), rng.normal_vector(3), rng.normal_vector(4)};
    const Vector w = rng.normal_vector(4);
    const std::array<std::size_t, 1> modes{2};
    const std::array<Vector, 1> ws{w};
    DenseTensor expected = outer(std::span<const Vector>(v.data(), 2));
    expected *= v[2].dot(w);
    CHECK(max_abs_diff(contract_vectors(outer(v), modes, ws), expected) < 1e-13);
  }
  SUBCASE("matches a direct sum over the contracted index") {
    const DenseTensor t = random_tensor({2, 3, 4}, rng);
    const Vector w = rng.normal_vector(4);
    const std::array<std::size_t, 1> modes{2};
    const std::array<Vector, 1> ws{w};
    const DenseTensor got = contract_vectors(t, modes, ws);
    REQUIRE(got.dims() == Dims{2, 3});
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < 4; ++l) s += t.at({i, j, l}) * w(static_cast<Eigen::Index>(l));
        CHECK(got.at({i, j}) == doctest::Approx(s).epsilon(1e-13));
      }
    }
  }
  SUBCASE("two modes equal successive mode products") {
    const DenseTensor t = random_tensor({3, 2, 4}, rng);
    const Vector w0 = rng.normal_vector(3);
    const Vector w2 = rng.normal_vector(4);
    const std::array<std::size_t, 2> modes{2, 0};
    const std::array<Vector, 2> ws{w2, w0};
    const DenseTensor via_products = mode_product(mode_product(t, 0, w0.transpose()), 2, w2.transpose());
    const DenseTensor got = contract_vectors(t, modes, ws);
    REQUIRE(got.dims() == Dims{2});
    for (std::size_t j = 0; j < 2; ++j) CHECK(got[j] == doctest::Approx(via_products[j]).epsilon(1e-12));
  }
  SUBCASE("errors") {
    const DenseTensor t = random_tensor({2, 3}, rng);
    const std::array<std::size_t, 2> dup{1, 1};
    const std::array<Vector, 2> ws3{rng.normal_vector(3), rng.normal_vector(3)};
    CHECK_THROWS_AS(contract_vectors(t, dup, ws3), InvalidArgument);
    const std::array<std::size_t, 1> m1{1};
    const std::array<Vector, 1> bad{rng.normal_vector(2)};
    CHECK_THROWS_AS(contract_vectors(t, m1, bad), InvalidArgument);
  }
}

TEST_CASE("kronecker") {
  CHECK(kronecker(Matrix::Identity(2, 2), Matrix::Identity(2, 2)) == Matrix::Identity(4, 4));
  Vector a(2), b(2), expected(4);
  a << 1, 2;
  b << 1, 0;
  expected << 1, 0, 2, 0;
  CHECK(kronecker(a, b) == Matrix(expected));
  RandomSource rng(4, 0);
  Vector u = rng.normal_vector(3).normalized(), v = rng.normal_vector(4).normalized();
  Vector x = rng.normal_vector(3).normalized(), z = rng.normal_vector(4).normalized();
  const double lhs = (kronecker(u, v).transpose() * kronecker(x, z))(0, 0);
  CHECK(lhs == doctest::Approx(u.dot(x) * v.dot(z)).epsilon(1e-13));
}

TEST_CASE("khatri_rao") {
  RandomSource rng(5, 0);
  const Matrix a = rng.normal_matrix(4, 3);
  const Matrix b = rng.normal_matrix(5, 3);
  {
    const std::array<Matrix, 1> one{a};
    CHECK(khatri_rao(one) == a);
  }
  {
    const std::array<Matrix, 2> ids{Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
    Matrix expected = Matrix::Zero(4, 2);
    expected(0, 0) = 1;
    expected(3, 1) = 1;
    CHECK(khatri_rao(ids) == expected);
  }
  {
    const std::array<Matrix, 2> ab{a, b};
    const Matrix kr = khatri_rao(ab);
    for (Eigen::Index r = 0; r < 3; ++r) CHECK(kr.col(r) == kronecker(a.col(r), b.col(r)));
    const Matrix gram = kr.transpose() * kr;
    const Matrix had = (a.transpose() * a).cwiseProduct(b.transpose() * b);
    CHECK(max_abs(gram - had) <= 1e-12 * max_abs(had));
    const std::vector<Matrix> three{a, b, rng.normal_matrix(2, 3)};
    const Matrix full = khatri_rao_descending(three, 3);
    const Matrix g_full = full.transpose() * full;
    CHECK(max_abs(g_full - hadamard_gram(three, 3)) <= 1e-12 * max_abs(g_full));
  }
  const std::array<Matrix, 2> bad{a, rng.normal_matrix(2, 2)};
  CHECK_THROWS_AS(khatri_rao(bad), InvalidArgument);
}

TEST_CASE("cp_reconstruct") {
  SUBCASE("unit basis vectors give a single one") {
    CpModel m;
    m.lambdas = Vector::Ones(1);
    for (std::size_t p : {2, 3, 2}) {
      Matrix e = Matrix::Zero(static_cast<Eigen::Index>(p), 1);
      e(1, 0) = 1.0;
      m.factors.push_back(e);
    }
    const DenseTensor x = cp_reconstruct(m);
    CHECK(frobenius_norm(x) == 1.0);
    CHECK(x.at({1, 1, 1}) == 1.0);
  }
  SUBCASE("opposite weights on equal factors cancel") {
    RandomSource rng(6, 0);
    CpModel m;
    m.lambdas = Vector(2);
    m.lambdas << 1, -1;
    for (std::size_t p : {3, 4, 2}) {
      const Vector c = rng.normal_vector(static_cast<Eigen::Index>(p)).normalized();
      Matrix f(static_cast<Eigen::Index>(p), 2);
      f << c, c;
      m.factors.push_back(f);
    }
    CHECK(frobenius_norm(cp_reconstruct(m)) < 1e-15);
  }
  SUBCASE("matches the naive sum and the unfolding identity") {
    RandomSource rng(7, 0);
    const CpModel m = cpd::testing::random_model({4, 3, 5}, 3, rng);
    const DenseTensor x = cp_reconstruct(m);
    CHECK(max_abs_diff(x, oracle::naive_reconstruct(m)) < 1e-13);
    for (std::size_t k = 0; k < 3; ++k) {
      const Matrix rhs = m.factors[k] * m.lambdas.asDiagonal() * khatri_rao_descending(m.factors, k).transpose();
      CHECK(max_abs(unfold(x, k) - rhs) <= 1e-12 * max_abs(rhs));
    }
  }
}

TEST_CASE("frobenius_norm") {
  CHECK(frobenius_norm(DenseTensor({3, 2})) == 0.0);
  CHECK(frobenius_norm(DenseTensor({1, 1}, {3.0})) == 3.0);
  CHECK(frobenius_norm(DenseTensor({1}, {-3.0})) == 3.0);
  RandomSource rng(8, 0);
  const DenseTensor t = random_tensor({3, 4, 5}, rng);
  CHECK(frobenius_norm(t) == doctest::Approx(cpd::testing::naive_norm(t)).epsilon(1e-14));
}

TEST_CASE("DenseTensor construction and access") {
  CHECK_THROWS_AS(DenseTensor({2, 2}, {1.0, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(DenseTensor({2, 0}), InvalidArgument);
  DenseTensor t({2, 3, 4});
  t.at({1, 2, 3}) = 5.0;
  CHECK(t[t.size() - 1] == 5.0);
  const std::array<std::size_t, 3> idx{1, 0, 2};
  CHECK(t.offset(idx) == 1 * 12 + 0 * 4 + 2);
  CHECK_THROWS_AS(t.at({2, 0, 0}), InvalidArgument);
  CHECK(DenseTensor().order() == 0);
  CHECK(DenseTensor().size() == 1);
}
