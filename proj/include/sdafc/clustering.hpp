#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdafc/dataset.hpp"

namespace sdafc {

using HardAssignment = std::vector<int>;

struct CentroidModel {
  Matrix centroids;  // k x d
  std::string fit_metric = "euclidean";

  int k() const { return static_cast<int>(centroids.rows()); }
  int dim() const { return static_cast<int>(centroids.cols()); }
};

struct FuzzyMembership {
  Matrix weights;  // n x k, rows sum to 1
  double fuzzy_degree = 1.1;
};

struct KMeansResult {
  CentroidModel model;
  HardAssignment assignment;
  double inertia = 0.0;
  std::vector<double> inertia_history;  // one entry per Lloyd iteration
  int iterations = 0;
};

struct FcmResult {
  CentroidModel model;
  FuzzyMembership membership;
  double objective = 0.0;
  int iterations = 0;
};

/// D^2-weighted k-means++ seeding.
CentroidModel kmeanspp_init(const Matrix& x, int k, std::uint64_t seed);

/// Lloyd iterations with Euclidean distance. Optional per-row weights.
/// Empty clusters are reseeded at the point farthest from its centroid.
KMeansResult kmeans_fit(const Matrix& x, int k, std::uint64_t seed,
                        int max_iter = 300, double tol = 1e-6,
                        const std::vector<double>* weights = nullptr);

/// Best of `restarts` seeded runs by inertia.
KMeansResult kmeans_fit_best(const Matrix& x, int k, std::uint64_t seed,
                             int restarts = 10, int max_iter = 300,
                             double tol = 1e-6,
                             const std::vector<double>* weights = nullptr);

/// Standard fuzzy c-means. Rows coincident with a centroid get a one-hot
/// membership on the lowest such centroid index.
FcmResult fcm_fit(const Matrix& x, int k, double fuzzy_degree,
                  std::uint64_t seed, int max_iter = 300, double tol = 1e-6);

/// Nearest centroid by cosine distance 1 - x.c/((|x|+eps)(|c|+eps)),
/// eps = 1e-12; ties break to the lowest centroid index.
HardAssignment assign_cosine(const Matrix& x, const CentroidModel& model);

/// Nearest centroid by squared Euclidean distance; same tie-break.
HardAssignment assign_euclidean(const Matrix& x, const CentroidModel& model);

/// Argmax membership, ties to the lowest index.
HardAssignment fcm_hard_labels(const FuzzyMembership& membership);

std::string centroids_to_json(const CentroidModel& model);
CentroidModel centroids_from_json(const std::string& text);

}  // namespace sdafc
