#include "sdafc/partition.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>

#include <json.hpp>

#include "sdafc/errors.hpp"
#include "sdafc/rng.hpp"

namespace sdafc {

int ConnectionMask::connected_count() const {
  return static_cast<int>(
      std::count(connected.begin(), connected.end(), true));
}

FederatedPartition partition_noniid(const LabeledDataset& ds, double p, int m,
                                    std::uint64_t seed) {
  if (p < 0.0 || p > 1.0)
    throw DomainError("non-IID level p must lie in [0,1]");
  if (!ds.has_labels())
    throw PreconditionError("partition_noniid requires ground-truth labels");
  const int n = static_cast<int>(ds.n());
  if (m < 1 || m > n)
    throw PreconditionError("client count must satisfy 1 <= m <= n");

  const auto& labels = *ds.labels;
  const int k_true = ds.k_true;
  Rng rng(seed);

  // Per-class pools, shuffled once.
  std::vector<std::vector<int>> class_pool(static_cast<std::size_t>(k_true));
  for (int i = 0; i < n; ++i)
    class_pool[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]
        .push_back(i);
  for (auto& pool : class_pool) rng.shuffle(pool);

  // Client sizes: floor(n/m), +1 for the first n mod m clients.
  std::vector<int> sizes(static_cast<std::size_t>(m), n / m);
  for (int i = 0; i < n % m; ++i) ++sizes[static_cast<std::size_t>(i)];

  FederatedPartition part;
  part.p = p;
  part.m = m;
  part.seed = seed;
  part.client_rows.resize(static_cast<std::size_t>(m));

  // Pure quotas first, for every client, so shortfalls are detected
  // independently of the random fill.
  std::vector<int> quota(static_cast<std::size_t>(m));
  std::vector<long> class_demand(static_cast<std::size_t>(k_true), 0);
  std::vector<long> class_total(static_cast<std::size_t>(k_true), 0);
  for (int c = 0; c < k_true; ++c)
    class_total[static_cast<std::size_t>(c)] =
        static_cast<long>(class_pool[static_cast<std::size_t>(c)].size());
  for (int i = 0; i < m; ++i) {
    const int s_i = sizes[static_cast<std::size_t>(i)];
    quota[static_cast<std::size_t>(i)] =
        static_cast<int>(std::ceil(p * static_cast<double>(s_i)));
    class_demand[static_cast<std::size_t>(i % k_true)] +=
        quota[static_cast<std::size_t>(i)];
  }
  for (int c = 0; c < k_true; ++c) {
    if (class_demand[static_cast<std::size_t>(c)] >
        class_total[static_cast<std::size_t>(c)]) {
      // Largest p for which every per-class demand would fit: demand scales
      // linearly with p, so the bound is total/(demand at p=1).
      double achievable = 1.0;
      for (int cc = 0; cc < k_true; ++cc) {
        long demand_full = 0;
        for (int i = 0; i < m; ++i)
          if (i % k_true == cc) demand_full += sizes[static_cast<std::size_t>(i)];
        if (demand_full > 0)
          achievable = std::min(
              achievable,
              static_cast<double>(class_total[static_cast<std::size_t>(cc)]) /
                  static_cast<double>(demand_full));
      }
      throw QuotaShortfallError(
          "class " + std::to_string(c) + " has " +
              std::to_string(class_total[static_cast<std::size_t>(c)]) +
              " rows but the pure quota at p=" + std::to_string(p) +
              " needs " + std::to_string(class_demand[static_cast<std::size_t>(c)]) +
              "; achievable p is about " + std::to_string(achievable),
          achievable);
    }
  }
  for (int i = 0; i < m; ++i) {
    const int cls = i % k_true;
    auto& pool = class_pool[static_cast<std::size_t>(cls)];
    auto& rows = part.client_rows[static_cast<std::size_t>(i)];
    rows.insert(rows.end(), pool.end() - quota[static_cast<std::size_t>(i)],
                pool.end());
    pool.resize(pool.size() -
                static_cast<std::size_t>(quota[static_cast<std::size_t>(i)]));
  }

  // Residual pool: everything not consumed by the pure quotas.
  std::vector<int> residual;
  for (const auto& pool : class_pool)
    residual.insert(residual.end(), pool.begin(), pool.end());
  std::sort(residual.begin(), residual.end());
  rng.shuffle(residual);

  std::size_t cursor = 0;
  for (int i = 0; i < m; ++i) {
    auto& rows = part.client_rows[static_cast<std::size_t>(i)];
    const int fill = sizes[static_cast<std::size_t>(i)] -
                     quota[static_cast<std::size_t>(i)];
    for (int f = 0; f < fill; ++f) rows.push_back(residual[cursor++]);
    std::sort(rows.begin(), rows.end());
  }
  return part;
}

ConnectionMask sample_connection_mask(int m, double rate, std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0)
    throw DomainError("disconnection rate must lie in [0,1]");
  // Ties-to-even so a scaled rate axis stays deterministic.
  const int drop = static_cast<int>(
      std::nearbyint(rate * static_cast<double>(m)));
  if (drop >= m)
    throw PreconditionError("disconnection rate would drop every client");

  ConnectionMask mask;
  mask.rate = rate;
  mask.seed = seed;
  mask.connected.assign(static_cast<std::size_t>(m), true);
  std::vector<int> ids(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) ids[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(ids);
  for (int i = 0; i < drop; ++i)
    mask.connected[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])] =
        false;
  return mask;
}

FederatedPartition restrict_partition(const FederatedPartition& partition,
                                      const ConnectionMask& mask) {
  if (mask.m() != partition.m)
    throw PreconditionError("mask and partition disagree on client count");
  FederatedPartition out;
  out.p = partition.p;
  out.seed = partition.seed;
  for (int i = 0; i < partition.m; ++i)
    if (mask.connected[static_cast<std::size_t>(i)])
      out.client_rows.push_back(
          partition.client_rows[static_cast<std::size_t>(i)]);
  out.m = static_cast<int>(out.client_rows.size());
  return out;
}

ConnectionMask all_connected(int m) {
  ConnectionMask mask;
  mask.connected.assign(static_cast<std::size_t>(m), true);
  return mask;
}

std::string partition_to_json(const FederatedPartition& p) {
  nlohmann::json j;
  j["p"] = p.p;
  j["m"] = p.m;
  j["seed"] = p.seed;
  j["client_rows"] = p.client_rows;
  return j.dump();
}

FederatedPartition partition_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  FederatedPartition p;
  p.p = j.at("p").get<double>();
  p.m = j.at("m").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.client_rows = j.at("client_rows").get<std::vector<std::vector<int>>>();
  return p;
}

}  // namespace sdafc
