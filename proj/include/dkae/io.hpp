#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dkae/matrix.hpp"

namespace dkae {

// 17 significant digits, '.' decimal point regardless of locale; parses back
// to the same double.
std::string format_double(double value);

// Writes the full contents then renames into place, so readers never observe
// a partially written file.
void write_file_atomic(const std::string& path, const std::string& contents);

// Flat binary matrix: 8-byte little-endian row and column counts followed by
// row-major little-endian 64-bit floats.
void save_matrix(const Matrix& m, const std::string& path);
Matrix load_matrix(const std::string& path);

// Comma-separated values, one record per row, 17-significant-digit floats.
void save_matrix_csv(const Matrix& m, const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Binary 8-bit PGM (P5); values are round(255 * pixel) after clamping to
// [0, 1].
void write_pgm(const std::string& path, const double* pixels, std::size_t rows,
               std::size_t cols);

// Grayscale heatmap of a matrix with per-matrix min-max scaling.
void write_matrix_pgm(const std::string& path, const Matrix& m);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace dkae
