#include "sdafc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdafc/errors.hpp"

namespace sdafc {

ContingencyTable contingency(const std::vector<int>& true_labels,
                             const std::vector<int>& pred_labels) {
  if (true_labels.size() != pred_labels.size())
    throw ContractError("label vectors differ in length");
  if (true_labels.empty()) throw PreconditionError("empty label vectors");

  int r = 0, c = 0;
  for (int v : true_labels) r = std::max(r, v + 1);
  for (int v : pred_labels) c = std::max(c, v + 1);

  ContingencyTable t;
  t.n = static_cast<long>(true_labels.size());
  t.counts.assign(static_cast<std::size_t>(r),
                  std::vector<long>(static_cast<std::size_t>(c), 0));
  for (std::size_t i = 0; i < true_labels.size(); ++i)
    ++t.counts[static_cast<std::size_t>(true_labels[i])]
              [static_cast<std::size_t>(pred_labels[i])];
  return t;
}

double nmi(const ContingencyTable& table) {
  if (table.n < 1) throw PreconditionError("empty contingency table");
  const int r = table.rows();
  const int c = table.cols();
  const double n = static_cast<double>(table.n);

  std::vector<double> row_sum(static_cast<std::size_t>(r), 0.0);
  std::vector<double> col_sum(static_cast<std::size_t>(c), 0.0);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      const double v = static_cast<double>(
          table.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      row_sum[static_cast<std::size_t>(i)] += v;
      col_sum[static_cast<std::size_t>(j)] += v;
    }

  auto entropy = [&](const std::vector<double>& sums) {
    double h = 0.0;
    for (double s : sums)
      if (s > 0.0) h -= (s / n) * std::log(s / n);
    return h;
  };
  const double hu = entropy(row_sum);
  const double hv = entropy(col_sum);

  if (hu == 0.0 && hv == 0.0) return 1.0;  // both single-cluster
  if (hu == 0.0 || hv == 0.0) return 0.0;

  double mi = 0.0;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      const double v = static_cast<double>(
          table.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      if (v > 0.0)
        mi += (v / n) * std::log((v * n) / (row_sum[static_cast<std::size_t>(i)] *
                                            col_sum[static_cast<std::size_t>(j)]));
    }
  return std::clamp(mi / std::sqrt(hu * hv), 0.0, 1.0);
}

std::vector<int> hungarian(const Matrix& cost) {
  for (Eigen::Index i = 0; i < cost.rows(); ++i)
    for (Eigen::Index j = 0; j < cost.cols(); ++j)
      if (!std::isfinite(cost(i, j)))
        throw ContractError("non-finite cost in hungarian");

  const bool transposed = cost.rows() > cost.cols();
  const Matrix a = transposed ? Matrix(cost.transpose()) : cost;
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());

  // Potentials algorithm, 1-based with a virtual zeroth column.
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(m) + 1, 0);  // col -> row
  std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m) + 1,
                             std::numeric_limits<double>::infinity());
    std::vector<bool> used(static_cast<std::size_t>(m) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = std::numeric_limits<double>::infinity();
      int j1 = -1;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = a(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] +=
              delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= m; ++j)
    if (match[static_cast<std::size_t>(j)] > 0)
      row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] =
          j - 1;

  if (!transposed) return row_to_col;
  std::vector<int> col_to_row(static_cast<std::size_t>(cost.rows()), -1);
  for (int i = 0; i < n; ++i)
    if (row_to_col[static_cast<std::size_t>(i)] >= 0)
      col_to_row[static_cast<std::size_t>(row_to_col[static_cast<std::size_t>(i)])] =
          i;
  return col_to_row;
}

KappaResult kappa(const ContingencyTable& table) {
  if (table.n < 1) throw PreconditionError("empty contingency table");
  const int r = table.rows();
  const int c = table.cols();
  const double n = static_cast<double>(table.n);

  // Maximize mapped agreement: minimize negated counts over injective
  // mappings of predicted clusters (rows of the cost) to true classes.
  Matrix cost(c, r);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i)
      cost(j, i) = -static_cast<double>(
          table.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  KappaResult res;
  res.mapping = hungarian(cost);  // mapping[j] = true class for cluster j

  std::vector<double> row_sum(static_cast<std::size_t>(r), 0.0);
  std::vector<double> mapped_col(static_cast<std::size_t>(r), 0.0);
  double agree = 0.0;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      row_sum[static_cast<std::size_t>(i)] += static_cast<double>(
          table.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  for (int j = 0; j < c; ++j) {
    const int t = res.mapping[static_cast<std::size_t>(j)];
    if (t < 0) continue;  // unmatched cluster: pure disagreement
    agree += static_cast<double>(
        table.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)]);
    for (int i = 0; i < r; ++i)
      mapped_col[static_cast<std::size_t>(t)] += static_cast<double>(
          table.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  }

  res.p_observed = agree / n;
  double pe = 0.0;
  for (int i = 0; i < r; ++i)
    pe += (row_sum[static_cast<std::size_t>(i)] / n) *
          (mapped_col[static_cast<std::size_t>(i)] / n);
  res.p_expected = pe;

  if (pe >= 1.0)
    res.kappa = res.p_observed >= 1.0 ? 1.0 : 0.0;
  else
    res.kappa = (res.p_observed - pe) / (1.0 - pe);
  return res;
}

MetricReport evaluate(const std::vector<int>& true_labels,
                      const std::vector<int>& pred_labels) {
  const auto table = contingency(true_labels, pred_labels);
  MetricReport rep;
  rep.nmi = nmi(table);
  auto kp = kappa(table);
  rep.kappa = kp.kappa;
  rep.mapping = std::move(kp.mapping);
  return rep;
}

}  // namespace sdafc
