#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdafc/clustering.hpp"
#include "sdafc/dataset.hpp"
#include "sdafc/partition.hpp"
#include "sdafc/synthesis.hpp"

namespace sdafc {

enum class ClusterVariant { Km, Fcm };
enum class SynthesizerKind { Gan, Gmm };

/// What one client sends to the server: a generator plus its local data
/// size (SDA-FC), or its local centroids with cluster sizes (k-FED/FFCM).
struct ClientUpload {
  int client_id = -1;
  int local_size = 0;
  std::optional<GeneratorNet> generator;
  std::optional<CentroidModel> centroids;
  std::vector<long> cluster_sizes;
};

struct ProtocolTrace {
  int uploads_count = 0;
  int broadcasts_count = 0;
  std::vector<bool> participated;      // indexed by client id
  std::vector<int> local_k;            // per connected upload, 0 for SDA-FC
};

struct MethodResult {
  std::vector<int> rows;               // global row ids, client-id order
  HardAssignment assignment;           // parallel to rows
  CentroidModel centroids;             // raw (un-normalized) space
  std::optional<Matrix> synthetic;     // raw space, when a synthesizer ran
  ProtocolTrace trace;
};

struct SdaFcOptions {
  GanConfig gan;
  SynthesizerKind synthesizer = SynthesizerKind::Gan;
  double fuzzy_degree = 1.1;
  int server_restarts = 10;
  // 0 or 1 runs clients sequentially; higher values use that many threads.
  int parallel_clients = 1;
};

struct BaselineOptions {
  int k_local = 0;                     // 0 means "use k"
  double fuzzy_degree = 1.1;
  int restarts = 10;
  bool weighted_server = false;        // weight pooled centroids by size
};

/// One-round SDA-FC: connected clients train generators on min-max
/// normalized local rows; the server samples a same-sized synthetic set per
/// client, clusters the merged set, maps centroids back to raw space and
/// broadcasts; each client labels its own raw rows by cosine distance.
MethodResult run_sda_fc(const LabeledDataset& ds,
                        const FederatedPartition& partition,
                        const ConnectionMask& mask, ClusterVariant variant,
                        const SdaFcOptions& opts, int k, std::uint64_t seed);

/// k-FED: local k-means, server k-means on the pooled centroid set.
MethodResult run_kfed(const LabeledDataset& ds,
                      const FederatedPartition& partition,
                      const ConnectionMask& mask, int k,
                      const BaselineOptions& opts, std::uint64_t seed);

/// FFCM: local fuzzy c-means (hard centroids uploaded), server k-means.
MethodResult run_ffcm(const LabeledDataset& ds,
                      const FederatedPartition& partition,
                      const ConnectionMask& mask, int k,
                      const BaselineOptions& opts, std::uint64_t seed);

/// Centralized KM / FCM on the full dataset, native Euclidean labels.
MethodResult run_centralized(const LabeledDataset& ds, ClusterVariant variant,
                             int k, double fuzzy_degree, std::uint64_t seed);

/// Ground-truth-centroid oracle: class means, cosine assignment.
MethodResult run_oracle(const LabeledDataset& ds, int k, std::uint64_t seed);

/// True labels for result.rows, for metric evaluation.
std::vector<int> true_labels_for(const LabeledDataset& ds,
                                 const MethodResult& result);

std::string method_result_to_json(const MethodResult& result);

}  // namespace sdafc
