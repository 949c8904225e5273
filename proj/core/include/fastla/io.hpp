#pragma once

#include <iosfwd>
#include <string>

#include "fastla/matrix.hpp"

namespace fastla {

// File layout: an ASCII line "rows cols\n" followed by rows*cols binary64
// values in row-major order, little-endian.

Matrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const ConstMatrixRef& a);

Matrix read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const ConstMatrixRef& a);

}  // namespace fastla
