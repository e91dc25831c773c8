#include <doctest.h>

#include "cpd/error.hpp"
#include "cpd/oracle.hpp"
#include "cpd/tasd.hpp"
#include "fixtures.hpp"

using namespace cpd;
using cpd::testing::random_tensor;

TEST_CASE("naive_unfold") {
  DenseTensor v({5}, {1, 2, 3, 4, 5});
  const Matrix m = oracle::naive_unfold(v, 0);
  CHECK(m.rows() == 5);
  CHECK(m.cols() == 1);
  CHECK(m(3, 0) == 4.0);
  RandomSource rng(1, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + rng.next_u64() % 3;
    Dims dims;
    for (std::size_t k = 0; k < d; ++k) dims.push_back(1 + rng.next_u64() % 4);
    const DenseTensor t = random_tensor(dims, rng);
    for (std::size_t k = 0; k < d; ++k) CHECK(unfold(t, k) == oracle::naive_unfold(t, k));
  }
}

TEST_CASE("naive_mode_ls") {
  RandomSource rng(2, 0);
  SUBCASE("noiseless exact case") {
    const CpModel m = cpd::testing::random_model({4, 3, 5}, 2, rng);
    const Matrix b = oracle::naive_mode_ls(cp_reconstruct(m), m.factors, 1);
    CHECK(cpd::testing::max_abs(b - m.factors[1] * m.lambdas.asDiagonal()) < 1e-10);
  }
  SUBCASE("rank one equals the contraction with the other vectors") {
    const DenseTensor y = random_tensor({3, 4, 5}, rng);
    std::vector<Matrix> f{cpd::testing::unit_columns(3, 1, rng), cpd::testing::unit_columns(4, 1, rng),
                          cpd::testing::unit_columns(5, 1, rng)};
    const std::array<std::size_t, 2> modes{0, 2};
    const std::array<Vector, 2> ws{f[0].col(0), f[2].col(0)};
    const DenseTensor c = contract_vectors(y, modes, ws);
    const Matrix b = oracle::naive_mode_ls(y, f, 1);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(b(i, 0) == doctest::Approx(c[static_cast<std::size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("enumerate_permutations_loss") {
  RandomSource rng(3, 0);
  SUBCASE("rank one is the identity") {
    const CpModel m = cpd::testing::random_model({3, 4, 2}, 1, rng);
    const auto fit = oracle::enumerate_permutations_loss(cp_reconstruct(m), m.factors);
    for (const auto& p : fit.perms) CHECK(p == std::vector<std::size_t>{0});
    CHECK(fit.residual < 1e-12);
  }
  SUBCASE("permuted noiseless factors") {
    const CpModel m = cpd::testing::random_model({4, 3, 5}, 2, rng);
    std::vector<Matrix> f = m.factors;
    f[2].col(0).swap(f[2].col(1));
    const auto fit = oracle::enumerate_permutations_loss(cp_reconstruct(m), f);
    CHECK(fit.perms[1] == std::vector<std::size_t>{0, 1});
    CHECK(fit.perms[2] == std::vector<std::size_t>{1, 0});
    CHECK(fit.residual < 1e-10);
  }
  SUBCASE("agrees with align_exhaustive for R = 2, d = 3") {
    for (int trial = 0; trial < 10; ++trial) {
      const DenseTensor y = random_tensor({3, 4, 3}, rng);
      std::vector<Matrix> f;
      for (auto p : y.dims()) f.push_back(cpd::testing::unit_columns(static_cast<Eigen::Index>(p), 2, rng));
      CHECK(align_exhaustive(y, f).perms == oracle::enumerate_permutations_loss(y, f).perms);
    }
  }
  const CpModel m = cpd::testing::random_model({3, 3, 3}, 3, rng);
  CHECK_THROWS_AS(oracle::enumerate_permutations_loss(cp_reconstruct(m), m.factors, 35), InvalidArgument);
}
