#pragma once

#include <vector>

#include "sdafc/dataset.hpp"

namespace sdafc {

struct ContingencyTable {
  // counts[i][j] = rows with true class i and predicted cluster j.
  std::vector<std::vector<long>> counts;
  long n = 0;

  int rows() const { return static_cast<int>(counts.size()); }
  int cols() const {
    return counts.empty() ? 0 : static_cast<int>(counts[0].size());
  }
};

ContingencyTable contingency(const std::vector<int>& true_labels,
                             const std::vector<int>& pred_labels);

/// Normalized mutual information with geometric-mean normalization
/// I(U;V)/sqrt(H(U)H(V)). Both partitions trivial -> 1; exactly one
/// zero-entropy partition -> 0. Clamped to [0,1].
double nmi(const ContingencyTable& table);

struct KappaResult {
  double kappa = 0.0;
  // mapping[j] = true class matched to predicted cluster j, -1 if unmatched.
  std::vector<int> mapping;
  double p_observed = 0.0;
  double p_expected = 0.0;
};

/// Cohen's kappa after the agreement-maximizing injective mapping of
/// predicted clusters to true classes; unmatched predicted clusters count
/// as disagreement.
KappaResult kappa(const ContingencyTable& table);

/// Minimum-cost injective assignment of rows to columns (min(r,c) pairs).
/// Returns, per row, the assigned column or -1.
std::vector<int> hungarian(const Matrix& cost);

struct MetricReport {
  double nmi = 0.0;
  double kappa = 0.0;
  std::vector<int> mapping;
};

MetricReport evaluate(const std::vector<int>& true_labels,
                      const std::vector<int>& pred_labels);

}  // namespace sdafc
