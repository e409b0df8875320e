#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sdafc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A row-major feature matrix with optional ground-truth labels.
struct LabeledDataset {
  Matrix features;                          // n x d
  std::optional<std::vector<int>> labels;   // contiguous in [0, k_true)
  std::string name;
  int k_true = 0;

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  bool has_labels() const { return labels.has_value(); }
};

struct GmComponent {
  Vector mean;
  Vector stddev;   // per-dimension, all > 0
  double weight = 1.0;
};

struct GaussianMixtureSpec {
  std::vector<GmComponent> components;
  // Either fixed per-component counts, or total_n with weighted draws.
  std::vector<int> counts;
  int total_n = 0;
  std::uint64_t seed = 0;
};

/// Per-column affine map onto [0, 1]; constant columns map to 0.
struct MinMaxScale {
  Vector lo;
  Vector range;  // 1 where the column is constant

  Matrix transform(const Matrix& x) const;
  Matrix inverse(const Matrix& x) const;
};

MinMaxScale fit_minmax(const Matrix& x);

/// Load a CSV file. A non-numeric first row is treated as a header.
/// label_column selects the ground-truth column; labels are remapped to
/// contiguous ids in order of first appearance.
LabeledDataset load_csv(const std::string& path,
                        std::optional<int> label_column = std::nullopt);

/// Write features (and the label column last, when present) back to CSV
/// with full double precision.
void write_csv(const LabeledDataset& ds, const std::string& path);

LabeledDataset generate_gaussian_mixture(const GaussianMixtureSpec& spec);

LabeledDataset normalize_minmax(const LabeledDataset& ds);

}  // namespace sdafc
