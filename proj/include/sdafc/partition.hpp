#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdafc/dataset.hpp"

namespace sdafc {

/// Assignment of dataset rows to clients. client_rows are pairwise disjoint;
/// for a fresh partition their union is {0..n-1}.
struct FederatedPartition {
  std::vector<std::vector<int>> client_rows;
  double p = 0.0;
  int m = 0;
  std::uint64_t seed = 0;
};

struct ConnectionMask {
  std::vector<bool> connected;
  double rate = 0.0;
  std::uint64_t seed = 0;

  int m() const { return static_cast<int>(connected.size()); }
  int connected_count() const;
};

/// Non-IID partition: client i receives floor(n/m) rows (+1 for the first
/// n mod m clients); ceil(p * s_i) of them come from ground-truth class
/// (i mod k_true), the rest are drawn uniformly from the residual pool.
FederatedPartition partition_noniid(const LabeledDataset& ds, double p, int m,
                                    std::uint64_t seed);

/// Exactly round(rate * m) clients (ties to even) marked disconnected,
/// chosen uniformly without replacement.
ConnectionMask sample_connection_mask(int m, double rate, std::uint64_t seed);

/// Sub-partition over connected clients only.
FederatedPartition restrict_partition(const FederatedPartition& partition,
                                      const ConnectionMask& mask);

ConnectionMask all_connected(int m);

std::string partition_to_json(const FederatedPartition& p);
FederatedPartition partition_from_json(const std::string& text);

}  // namespace sdafc
