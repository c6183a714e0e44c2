#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dkae/matrix.hpp"
#include "dkae/rng.hpp"

namespace dkae {

// Samples are rows with entries in [0, 1]; labels, when present, are class
// ids with one entry per row. image_rows/image_cols remember the original
// raster shape for files loaded from disk (0 when not applicable).
struct Dataset {
  Matrix samples;
  std::vector<int> labels;
  std::size_t image_rows = 0;
  std::size_t image_cols = 0;

  bool has_labels() const noexcept { return !labels.empty(); }
  std::size_t size() const noexcept { return samples.rows(); }
  std::size_t feature_dim() const noexcept { return samples.cols(); }
};

// Reads a big-endian IDX image/label file pair. Pixels are scaled by 1/255
// into [0, 1]; rows are flattened rasters.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Debug helper: writes the dataset back out in the same binary layout.
// Inverse of load_idx for valid files.
void save_idx(const Dataset& data, const std::string& images_path,
              const std::string& labels_path);

struct SplitFractions {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

struct SplitResult {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Shuffled disjoint partition. Validation and test sizes are floor(n * f);
// the remainder goes to the training split.
SplitResult split(const Dataset& data, SplitFractions fractions, Rng& rng);

// Adds i.i.d. normal(0, stddev^2) noise per entry, then clamps to [0, 1].
Dataset add_gaussian_noise(const Dataset& data, double stddev, Rng& rng);

// Balanced isotropic Gaussian clusters (per-cluster std = separation / 4)
// with labels from the generating cluster, min-max rescaled into [0, 1]
// per dimension.
Dataset make_blobs(std::size_t n, std::size_t dim, std::size_t num_classes, double separation,
                   Rng& rng);

// Rows whose label is a or b, in the original order.
Dataset select_classes(const Dataset& data, int a, int b);

}  // namespace dkae
