#pragma once

#include <filesystem>
#include <iosfwd>

#include "cpd/tensor.hpp"

namespace cpd {

/// CPDT binary tensor file, all fields little-endian:
///   "CPDT" | u32 version (=1) | u32 order d | d x u64 dims | prod(dims) x f64
/// Values follow the DenseTensor layout (last index fastest).
inline constexpr std::uint32_t kCpdtVersion = 1;

void write_cpdt(std::ostream& os, const DenseTensor& t);
DenseTensor read_cpdt(std::istream& is);

void write_cpdt(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor read_cpdt(const std::filesystem::path& path);

/// Order-2 tensor with the matrix entries in row-major order.
DenseTensor matrix_to_tensor(const Matrix& m);
Matrix tensor_to_matrix(const DenseTensor& t);

}  // namespace cpd
