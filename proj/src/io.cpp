#include "dkae/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include "dkae/errors.hpp"

namespace dkae {

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value,
                                    std::chars_format::general, 17);
  return std::string(buf, result.ptr);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(contents.data(), std::streamsize(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("rename failed for " + path + ": " + ec.message());
}

namespace {

void append_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char(static_cast<unsigned char>(v >> (8 * i))));
}

std::uint64_t read_u64_le(const std::string& bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= std::uint64_t(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

}  // namespace

void save_matrix(const Matrix& m, const std::string& path) {
  std::string bytes;
  bytes.reserve(16 + 8 * m.size());
  append_u64_le(bytes, m.rows());
  append_u64_le(bytes, m.cols());
  for (double v : m.data()) append_u64_le(bytes, std::bit_cast<std::uint64_t>(v));
  write_file_atomic(path, bytes);
}

Matrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open matrix file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw FormatError("matrix file: truncated header in " + path);
  const std::uint64_t rows = read_u64_le(bytes, 0);
  const std::uint64_t cols = read_u64_le(bytes, 8);
  if (bytes.size() != 16 + 8 * rows * cols) {
    throw FormatError("matrix file: payload size mismatch in " + path);
  }
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.data()[i] = std::bit_cast<double>(read_u64_le(bytes, 16 + 8 * i));
  }
  return m;
}

void save_matrix_csv(const Matrix& m, const std::string& path) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out.push_back(',');
      out += format_double(m(i, j));
    }
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j > 0) out.push_back(',');
    out += header[j];
  }
  out.push_back('\n');
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw std::invalid_argument("write_csv: record width does not match header");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out.push_back(',');
      out += format_double(row[j]);
    }
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

void write_pgm(const std::string& path, const double* pixels, std::size_t rows,
               std::size_t cols) {
  std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  out.reserve(out.size() + rows * cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    const double v = std::clamp(pixels[i], 0.0, 1.0);
    out.push_back(char(static_cast<unsigned char>(std::llround(v * 255.0))));
  }
  write_file_atomic(path, out);
}

void write_matrix_pgm(const std::string& path, const Matrix& m) {
  double lo = m.data().empty() ? 0.0 : m.data()[0];
  double hi = lo;
  for (double v : m.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range = hi - lo;
  std::vector<double> scaled(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    scaled[i] = range < 1e-300 ? 0.0 : (m.data()[i] - lo) / range;
  }
  write_pgm(path, scaled.data(), m.rows(), m.cols());
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

}  // namespace dkae
