#pragma once

#include <vector>

#include "cpd/tensor.hpp"

namespace cpd {

struct TuckerOptions {
  std::vector<std::size_t> ranks;
  int max_iters = 50;
  /// Stop once the relative change of ||y x_k U_k^T|| between sweeps is below this.
  double tol = 1e-10;
};

/// y ~ core x_1 U_1 x_2 ... x_d U_d with column-orthonormal U_k.
struct TuckerModel {
  DenseTensor core;
  std::vector<Matrix> factors;
  /// ||y x_k U_k^T||_F after HOSVD (index 0) and after every HOOI sweep.
  std::vector<double> fit_trace;
  /// ||y - core x U||_F at return.
  double residual = 0.0;
  int iterations = 0;
};

/// U_k = svd_r(unfold(y, k), r_k) for every mode.
std::vector<Matrix> hosvd(const DenseTensor& y, const std::vector<std::size_t>& ranks);

/// Higher-order orthogonal iteration started from HOSVD. Modes are updated
/// in ascending order, each against the latest factors of the other modes.
TuckerModel hooi(const DenseTensor& y, const TuckerOptions& opts);

/// y x_1 U_1^T x_2 ... x_d U_d^T.
DenseTensor tucker_core(const DenseTensor& y, const std::vector<Matrix>& factors);

/// core x_1 U_1 ... x_d U_d.
DenseTensor tucker_reconstruct(const DenseTensor& core, const std::vector<Matrix>& factors);

}  // namespace cpd
