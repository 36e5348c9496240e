#pragma once

#include <filesystem>
#include <iosfwd>

#include "derham/sparse.hpp"

namespace derham {

/// Reads a real coordinate Matrix Market file (general or symmetric).
CsrMatrix read_matrix_market(std::istream& in);
CsrMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes `coordinate real general` with 17 significant digits, so a
/// write/read cycle reproduces every stored value bit for bit.
void write_matrix_market(std::ostream& out, const CsrMatrix& a);
void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& a);

}  // namespace derham
