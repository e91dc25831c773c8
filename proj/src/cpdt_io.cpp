#include "cpd/cpdt_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "cpd/error.hpp"

namespace cpd {

namespace {

static_assert(std::numeric_limits<double>::is_iec559, "IEEE doubles required");

template <typename U>
void put_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> buf{};
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(buf.data(), buf.size());
}

template <typename U>
U get_le(std::istream& is, const char* what) {
  std::array<unsigned char, sizeof(U)> buf{};
  if (!is.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    throw IoError(std::string("cpdt: truncated ") + what);
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_cpdt(std::ostream& os, const DenseTensor& t) {
  os.write("CPDT", 4);
  put_le<std::uint32_t>(os, kCpdtVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.order()));
  for (std::size_t d : t.dims()) put_le<std::uint64_t>(os, d);
  for (std::size_t i = 0; i < t.size(); ++i) put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(t.data()[i]));
  if (!os) throw IoError("cpdt: write failed");
}

DenseTensor read_cpdt(std::istream& is) {
  char magic[4] = {};
  if (!is.read(magic, 4)) throw IoError("cpdt: truncated header");
  if (std::memcmp(magic, "CPDT", 4) != 0) throw IoError("cpdt: bad magic");
  const auto version = get_le<std::uint32_t>(is, "version");
  if (version != kCpdtVersion) throw IoError("cpdt: unsupported version " + std::to_string(version));
  const auto order = get_le<std::uint32_t>(is, "order");
  if (order > 64) throw IoError("cpdt: implausible order " + std::to_string(order));
  Dims dims(order);
  std::uint64_t total = 1;
  for (auto& d : dims) {
    const auto v = get_le<std::uint64_t>(is, "dims");
    if (v == 0) throw IoError("cpdt: zero dimension");
    if (total > (std::uint64_t{1} << 40) / v) throw IoError("cpdt: tensor too large");
    total *= v;
    d = static_cast<std::size_t>(v);
  }
  DenseTensor t(dims);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = std::bit_cast<double>(get_le<std::uint64_t>(is, "values"));
  if (is.peek() != std::char_traits<char>::eof()) throw IoError("cpdt: trailing bytes");
  return t;
}

void write_cpdt(const std::filesystem::path& path, const DenseTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_cpdt(os, t);
}

DenseTensor read_cpdt(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_cpdt(is);
}

DenseTensor matrix_to_tensor(const Matrix& m) {
  DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) t.data()[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  return t;
}

Matrix tensor_to_matrix(const DenseTensor& t) {
  if (t.order() != 2) throw InvalidArgument("tensor_to_matrix: order-2 tensor required");
  Matrix m(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = t.data()[static_cast<std::size_t>(i * m.cols() + j)];
  return m;
}

}  // namespace cpd
