#include "dkae/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dkae/errors.hpp"

namespace dkae {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

std::uint32_t read_u32_be(const std::vector<unsigned char>& bytes, std::size_t offset,
                          const std::string& field) {
  if (offset + 4 > bytes.size()) throw FormatError("truncated header while reading " + field);
  return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
         (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

void append_u32_be(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.samples = data.samples.select_rows(indices);
  if (data.has_labels()) {
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) out.labels.push_back(data.labels[i]);
  }
  out.image_rows = data.image_rows;
  out.image_cols = data.image_cols;
  return out;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto img = read_file(images_path);
  const auto lbl = read_file(labels_path);

  const std::uint32_t img_magic = read_u32_be(img, 0, "images magic");
  if (img_magic != kImagesMagic) {
    throw FormatError("images magic: expected 0x00000803, got 0x" + [&] {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%08x", img_magic);
      return std::string(buf);
    }());
  }
  const std::uint32_t count = read_u32_be(img, 4, "image count");
  const std::uint32_t rows = read_u32_be(img, 8, "image rows");
  const std::uint32_t cols = read_u32_be(img, 12, "image cols");
  const std::size_t expected_img = 16 + std::size_t(count) * rows * cols;
  if (img.size() != expected_img) {
    throw FormatError("images payload: file has " + std::to_string(img.size()) +
                      " bytes, header implies " + std::to_string(expected_img));
  }

  const std::uint32_t lbl_magic = read_u32_be(lbl, 0, "labels magic");
  if (lbl_magic != kLabelsMagic) {
    throw FormatError("labels magic: expected 0x00000801, got 0x" + [&] {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%08x", lbl_magic);
      return std::string(buf);
    }());
  }
  const std::uint32_t lbl_count = read_u32_be(lbl, 4, "label count");
  if (lbl.size() != 8 + std::size_t(lbl_count)) {
    throw FormatError("labels payload: file has " + std::to_string(lbl.size()) +
                      " bytes, header implies " + std::to_string(8 + std::size_t(lbl_count)));
  }
  if (count != lbl_count) {
    throw FormatError("image/label count mismatch: " + std::to_string(count) + " images vs " +
                      std::to_string(lbl_count) + " labels");
  }

  Dataset data;
  data.image_rows = rows;
  data.image_cols = cols;
  data.samples = Matrix(count, std::size_t(rows) * cols);
  for (std::size_t i = 0; i < count; ++i) {
    double* dst = data.samples.row(i);
    const unsigned char* src = img.data() + 16 + i * std::size_t(rows) * cols;
    for (std::size_t j = 0; j < std::size_t(rows) * cols; ++j) dst[j] = src[j] / 255.0;
  }
  data.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) data.labels.push_back(int(lbl[8 + i]));
  return data;
}

void save_idx(const Dataset& data, const std::string& images_path,
              const std::string& labels_path) {
  if (!data.has_labels()) throw std::invalid_argument("save_idx: dataset has no labels");
  std::size_t rows = data.image_rows;
  std::size_t cols = data.image_cols;
  if (rows * cols != data.feature_dim()) {
    rows = 1;
    cols = data.feature_dim();
  }

  std::vector<unsigned char> img;
  img.reserve(16 + data.size() * data.feature_dim());
  append_u32_be(img, kImagesMagic);
  append_u32_be(img, static_cast<std::uint32_t>(data.size()));
  append_u32_be(img, static_cast<std::uint32_t>(rows));
  append_u32_be(img, static_cast<std::uint32_t>(cols));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double* src = data.samples.row(i);
    for (std::size_t j = 0; j < data.feature_dim(); ++j) {
      const double v = std::clamp(src[j], 0.0, 1.0);
      img.push_back(static_cast<unsigned char>(std::llround(v * 255.0)));
    }
  }

  std::vector<unsigned char> lbl;
  lbl.reserve(8 + data.size());
  append_u32_be(lbl, kLabelsMagic);
  append_u32_be(lbl, static_cast<std::uint32_t>(data.size()));
  for (int label : data.labels) {
    if (label < 0 || label > 255) throw std::invalid_argument("save_idx: label out of byte range");
    lbl.push_back(static_cast<unsigned char>(label));
  }

  std::ofstream img_out(images_path, std::ios::binary);
  img_out.write(reinterpret_cast<const char*>(img.data()), std::streamsize(img.size()));
  std::ofstream lbl_out(labels_path, std::ios::binary);
  lbl_out.write(reinterpret_cast<const char*>(lbl.data()), std::streamsize(lbl.size()));
  if (!img_out || !lbl_out) throw std::runtime_error("save_idx: write failed");
}

SplitResult split(const Dataset& data, SplitFractions fractions, Rng& rng) {
  if (data.size() == 0) throw std::invalid_argument("split: empty dataset");
  if (fractions.train <= 0.0 || fractions.val <= 0.0 || fractions.test <= 0.0) {
    throw std::invalid_argument("split: fractions must be positive");
  }
  const double sum = fractions.train + fractions.val + fractions.test;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split: fractions must sum to 1");
  }

  const std::size_t n = data.size();
  const auto sized = [n](double f) {
    return static_cast<std::size_t>(std::floor(double(n) * f + 1e-9));
  };
  const std::size_t n_val = sized(fractions.val);
  const std::size_t n_test = sized(fractions.test);
  const std::size_t n_train = n - n_val - n_test;

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(perm);

  SplitResult out;
  out.train = take_rows(data, {perm.begin(), perm.begin() + std::ptrdiff_t(n_train)});
  out.val = take_rows(data, {perm.begin() + std::ptrdiff_t(n_train),
                             perm.begin() + std::ptrdiff_t(n_train + n_val)});
  out.test = take_rows(data, {perm.begin() + std::ptrdiff_t(n_train + n_val), perm.end()});
  return out;
}

Dataset add_gaussian_noise(const Dataset& data, double stddev, Rng& rng) {
  if (stddev < 0.0) throw std::invalid_argument("add_gaussian_noise: negative std");
  Dataset out = data;
  for (double& v : out.samples.data()) {
    v = std::clamp(v + stddev * rng.normal(), 0.0, 1.0);
  }
  return out;
}

Dataset make_blobs(std::size_t n, std::size_t dim, std::size_t num_classes, double separation,
                   Rng& rng) {
  if (num_classes < 1 || n < num_classes || dim < 1) {
    throw std::invalid_argument("make_blobs: need n >= num_classes >= 1 and dim >= 1");
  }
  if (!(separation > 0.0)) throw std::invalid_argument("make_blobs: separation must be positive");

  // Cluster centers drawn uniformly in a box sized so that rejection for the
  // minimum pairwise distance terminates quickly; deterministic fallback on
  // a line if it does not.
  const double side =
      1.5 * separation * std::ceil(std::pow(double(num_classes), 1.0 / double(dim)));
  Matrix means(num_classes, dim);
  for (std::size_t c = 0; c < num_classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      for (std::size_t j = 0; j < dim; ++j) means(c, j) = rng.uniform(0.0, side);
      placed = true;
      for (std::size_t prev = 0; prev < c && placed; ++prev) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
          const double diff = means(c, j) - means(prev, j);
          d2 += diff * diff;
        }
        if (d2 < separation * separation) placed = false;
      }
    }
    if (!placed) {
      for (std::size_t j = 0; j < dim; ++j) means(c, j) = 0.0;
      means(c, 0) = 1.5 * separation * double(c);
    }
  }

  const double stddev = separation / 4.0;
  const std::size_t base = n / num_classes;
  const std::size_t remainder = n % num_classes;

  Dataset data;
  data.samples = Matrix(n, dim);
  data.labels.reserve(n);
  std::size_t row = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const std::size_t count = base + (c < remainder ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i, ++row) {
      double* dst = data.samples.row(row);
      for (std::size_t j = 0; j < dim; ++j) dst[j] = means(c, j) + stddev * rng.normal();
      data.labels.push_back(int(c));
    }
  }

  // Per-dimension min-max rescale into [0, 1].
  for (std::size_t j = 0; j < dim; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, data.samples(i, j));
      hi = std::max(hi, data.samples(i, j));
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
      data.samples(i, j) = range < 1e-12 ? 0.5 : (data.samples(i, j) - lo) / range;
    }
  }
  return data;
}

Dataset select_classes(const Dataset& data, int a, int b) {
  if (!data.has_labels()) throw std::invalid_argument("select_classes: dataset has no labels");
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.labels[i] == a || data.labels[i] == b) indices.push_back(i);
  }
  if (indices.empty()) throw std::invalid_argument("select_classes: no samples with given labels");
  return take_rows(data, indices);
}

}  // namespace dkae
