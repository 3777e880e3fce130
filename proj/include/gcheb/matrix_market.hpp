#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "gcheb/linalg.hpp"

namespace gcheb::mm {

/// Reads a coordinate Matrix Market file. Accepts `complex`, `real` and
/// `integer` fields with `general`, `symmetric`, `hermitian` or
/// `skew-symmetric` symmetry; the result is always fully expanded.
/// Throws UnreadableMatrix on any malformed input.
SparseMatrix read(std::istream& in);
SparseMatrix read(const std::filesystem::path& path);

/// Writes `%%MatrixMarket matrix coordinate complex general` with 1-based
/// indices and `row col real imag` entries at round-trip precision.
void write(std::ostream& out, const SparseMatrix& a, const std::string& comment = {});
void write(const std::filesystem::path& path, const SparseMatrix& a,
           const std::string& comment = {});

/// Dense complex vector as an `array complex general` n x 1 file.
void write_vector(const std::filesystem::path& path, const ComplexVector& v);
ComplexVector read_vector(const std::filesystem::path& path);

/// Plain key=value sidecar, one pair per line, keys sorted.
void write_metadata(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& entries);
std::map<std::string, std::string> read_metadata(const std::filesystem::path& path);

}  // namespace gcheb::mm
