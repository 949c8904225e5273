#include "fastla/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace fastla {

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (56 - 8 * i);
    return r;
  }
  return v;
}

}  // namespace

Matrix read_matrix(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("matrix file: missing header");
  std::istringstream hs(header);
  long long rows = -1, cols = -1;
  std::string extra;
  if (!(hs >> rows >> cols) || (hs >> extra)) throw ParseError("matrix file: malformed header '" + header + "'");
  if (rows <= 0 || cols <= 0) throw ParseError("matrix file: dimensions must be positive");

  const auto r = static_cast<Index>(rows), c = static_cast<Index>(cols);
  std::vector<double> data(r * c);
  for (Index k = 0; k < data.size(); ++k) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) {
      throw ParseError("matrix file: expected " + std::to_string(data.size()) + " values, found " + std::to_string(k));
    }
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    const double v = std::bit_cast<double>(to_le(bits));
    if (!std::isfinite(v)) throw ParseError("matrix file: non-finite value at index " + std::to_string(k));
    data[k] = v;
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("matrix file: trailing data after values");
  return Matrix(r, c, std::move(data));
}

void write_matrix(std::ostream& out, const ConstMatrixRef& a) {
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) {
      const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(a(i, j)));
      char buf[8];
      std::memcpy(buf, &bits, 8);
      out.write(buf, 8);
    }
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_matrix(in);
}

void write_matrix(const std::string& path, const ConstMatrixRef& a) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_matrix(out, a);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace fastla
