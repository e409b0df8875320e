#include "sdafc/federation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>

#include <json.hpp>

#include "sdafc/errors.hpp"
#include "sdafc/rng.hpp"

namespace sdafc {

namespace {

std::vector<int> connected_ids(const FederatedPartition& partition,
                               const ConnectionMask& mask) {
  if (mask.m() != partition.m)
    throw ContractError("mask size does not match partition");
  std::vector<int> ids;
  for (int i = 0; i < partition.m; ++i)
    if (mask.connected[static_cast<std::size_t>(i)]) {
      if (partition.client_rows[static_cast<std::size_t>(i)].empty())
        throw PreconditionError("connected client " + std::to_string(i) +
                                " holds no rows");
      ids.push_back(i);
    }
  if (ids.empty()) throw PreconditionError("no connected clients");
  return ids;
}

Matrix rows_matrix(const Matrix& x, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

/// Global row ids over the connected clients, in client-id order — the
/// canonical layout every protocol reports against.
std::vector<int> canonical_rows(const FederatedPartition& partition,
                                const std::vector<int>& ids) {
  std::vector<int> rows;
  for (int i : ids) {
    const auto& r = partition.client_rows[static_cast<std::size_t>(i)];
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return rows;
}

ProtocolTrace make_trace(const ConnectionMask& mask, int uploads) {
  ProtocolTrace t;
  t.uploads_count = uploads;
  t.broadcasts_count = 1;
  t.participated.assign(mask.connected.begin(), mask.connected.end());
  return t;
}

/// Run fn(i) for i in [0, n) on up to `threads` workers. Any thrown
/// exception is rethrown at the lowest index, so failures are
/// order-independent too.
void for_each_client(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nt = std::min(threads, n);
  pool.reserve(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

MethodResult run_pooled_centroids(const LabeledDataset& ds,
                                  const FederatedPartition& partition,
                                  const ConnectionMask& mask, int k,
                                  const BaselineOptions& opts,
                                  std::uint64_t seed, bool fuzzy_local) {
  const auto ids = connected_ids(partition, mask);
  const int requested_local = opts.k_local > 0 ? opts.k_local : k;

  MethodResult res;
  res.trace = make_trace(mask, static_cast<int>(ids.size()));

  std::vector<ClientUpload> uploads;
  for (int i : ids) {
    const auto& client = partition.client_rows[static_cast<std::size_t>(i)];
    const Matrix x = rows_matrix(ds.features, client);
    // A client smaller than k_local degrades to clustering its own rows.
    const int k_local =
        std::min<int>(requested_local, static_cast<int>(x.rows()));
    const std::uint64_t local_seed =
        derive_seed(seed, {0x6c6f63ULL, static_cast<std::uint64_t>(i)});

    ClientUpload up;
    up.client_id = i;
    up.local_size = static_cast<int>(x.rows());
    if (fuzzy_local && k_local > 1) {
      auto fcm = fcm_fit(x, k_local, opts.fuzzy_degree, local_seed);
      up.centroids = std::move(fcm.model);
      const auto hard = fcm_hard_labels(fcm.membership);
      up.cluster_sizes.assign(static_cast<std::size_t>(k_local), 0);
      for (int lbl : hard) ++up.cluster_sizes[static_cast<std::size_t>(lbl)];
    } else {
      auto km = kmeans_fit_best(x, k_local, local_seed, opts.restarts);
      up.centroids = std::move(km.model);
      up.cluster_sizes.assign(static_cast<std::size_t>(k_local), 0);
      for (int lbl : km.assignment)
        ++up.cluster_sizes[static_cast<std::size_t>(lbl)];
    }
    res.trace.local_k.push_back(k_local);
    uploads.push_back(std::move(up));
  }

  Eigen::Index pooled_n = 0;
  for (const auto& up : uploads) pooled_n += up.centroids->centroids.rows();
  if (pooled_n < k)
    throw PreconditionError("fewer pooled centroids than k");
  Matrix pooled(pooled_n, ds.dim());
  std::vector<double> weights;
  Eigen::Index r = 0;
  for (const auto& up : uploads)
    for (Eigen::Index j = 0; j < up.centroids->centroids.rows(); ++j) {
      pooled.row(r++) = up.centroids->centroids.row(j);
      weights.push_back(
          static_cast<double>(up.cluster_sizes[static_cast<std::size_t>(j)]));
    }

  auto server = kmeans_fit_best(pooled, k, derive_seed(seed, {0x737276ULL}),
                                opts.restarts, 300, 1e-6,
                                opts.weighted_server ? &weights : nullptr);
  res.centroids = std::move(server.model);
  res.centroids.fit_metric = "euclidean";

  res.rows = canonical_rows(partition, ids);
  res.assignment = assign_cosine(rows_matrix(ds.features, res.rows),
                                 res.centroids);
  return res;
}

}  // namespace

MethodResult run_sda_fc(const LabeledDataset& ds,
                        const FederatedPartition& partition,
                        const ConnectionMask& mask, ClusterVariant variant,
                        const SdaFcOptions& opts, int k, std::uint64_t seed) {
  if (k < 1) throw PreconditionError("k must be >= 1");
  const auto ids = connected_ids(partition, mask);
  const int nc = static_cast<int>(ids.size());

  // Generators see [0,1]-scaled features; the scale travels with the run so
  // broadcast centroids can be mapped back before raw-space assignment.
  const MinMaxScale scale = fit_minmax(ds.features);

  // Per-client synthetic blocks, sized like the client's real data. Every
  // per-client seed derives from (run seed, client id) only, so execution
  // order and parallelism cannot change the merged dataset.
  std::vector<Matrix> synth(static_cast<std::size_t>(nc));
  for_each_client(nc, opts.parallel_clients, [&](int slot) {
    const int i = ids[static_cast<std::size_t>(slot)];
    const auto& client = partition.client_rows[static_cast<std::size_t>(i)];
    const Matrix x_norm =
        scale.transform(rows_matrix(ds.features, client));
    const int n_i = static_cast<int>(x_norm.rows());
    const std::uint64_t train_seed =
        derive_seed(seed, {0x67616eULL, static_cast<std::uint64_t>(i)});
    const std::uint64_t sample_seed =
        derive_seed(seed, {0x73616dULL, static_cast<std::uint64_t>(i)});

    if (opts.synthesizer == SynthesizerKind::Gan) {
      GanConfig cfg = opts.gan;
      cfg.latent.k_categories = k;
      cfg.seed = train_seed;
      const GeneratorNet gen = train_local_gan(x_norm, cfg);
      synth[static_cast<std::size_t>(slot)] =
          sample_generator(gen, n_i, sample_seed);
    } else {
      const auto gmm =
          fit_gmm_synthesizer(x_norm, std::min(k, n_i), train_seed);
      synth[static_cast<std::size_t>(slot)] = gmm.sample(n_i, sample_seed);
    }
  });

  Eigen::Index total = 0;
  for (const auto& s : synth) total += s.rows();
  Matrix merged(total, ds.dim());
  Eigen::Index at = 0;
  for (const auto& s : synth) {
    merged.middleRows(at, s.rows()) = s;
    at += s.rows();
  }

  MethodResult res;
  res.trace = make_trace(mask, nc);
  const std::uint64_t server_seed = derive_seed(seed, {0x737276ULL});
  if (variant == ClusterVariant::Km) {
    auto km = kmeans_fit_best(merged, k, server_seed, opts.server_restarts);
    res.centroids = std::move(km.model);
  } else {
    auto fcm = fcm_fit(merged, k, opts.fuzzy_degree, server_seed);
    res.centroids = std::move(fcm.model);
  }
  res.centroids.centroids = scale.inverse(res.centroids.centroids);
  res.synthetic = scale.inverse(merged);

  res.rows = canonical_rows(partition, ids);
  res.assignment = assign_cosine(rows_matrix(ds.features, res.rows),
                                 res.centroids);
  return res;
}

MethodResult run_kfed(const LabeledDataset& ds,
                      const FederatedPartition& partition,
                      const ConnectionMask& mask, int k,
                      const BaselineOptions& opts, std::uint64_t seed) {
  return run_pooled_centroids(ds, partition, mask, k, opts, seed, false);
}

MethodResult run_ffcm(const LabeledDataset& ds,
                      const FederatedPartition& partition,
                      const ConnectionMask& mask, int k,
                      const BaselineOptions& opts, std::uint64_t seed) {
  return run_pooled_centroids(ds, partition, mask, k, opts, seed, true);
}

MethodResult run_centralized(const LabeledDataset& ds, ClusterVariant variant,
                             int k, double fuzzy_degree, std::uint64_t seed) {
  if (k < 1) throw PreconditionError("k must be >= 1");
  MethodResult res;
  res.rows.resize(static_cast<std::size_t>(ds.n()));
  for (std::size_t i = 0; i < res.rows.size(); ++i)
    res.rows[i] = static_cast<int>(i);

  if (variant == ClusterVariant::Km) {
    auto km = kmeans_fit_best(ds.features, k, seed);
    res.centroids = std::move(km.model);
    res.assignment = std::move(km.assignment);
  } else {
    auto fcm = fcm_fit(ds.features, k, fuzzy_degree, seed);
    res.centroids = std::move(fcm.model);
    res.assignment = fcm_hard_labels(fcm.membership);
  }
  res.trace.uploads_count = 0;
  res.trace.broadcasts_count = 1;
  return res;
}

MethodResult run_oracle(const LabeledDataset& ds, int k, std::uint64_t) {
  if (!ds.has_labels())
    throw PreconditionError("oracle baseline needs ground-truth labels");
  if (k != ds.k_true)
    throw PreconditionError("oracle k must equal the number of classes");

  Matrix means = Matrix::Zero(k, ds.dim());
  std::vector<long> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const int c = (*ds.labels)[static_cast<std::size_t>(i)];
    means.row(c) += ds.features.row(i);
    ++counts[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw PreconditionError("empty ground-truth class " + std::to_string(c));
    means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }

  MethodResult res;
  res.centroids.centroids = std::move(means);
  res.centroids.fit_metric = "cosine";
  res.rows.resize(static_cast<std::size_t>(ds.n()));
  for (std::size_t i = 0; i < res.rows.size(); ++i)
    res.rows[i] = static_cast<int>(i);
  res.assignment = assign_cosine(ds.features, res.centroids);
  res.trace.uploads_count = 0;
  res.trace.broadcasts_count = 1;
  return res;
}

std::vector<int> true_labels_for(const LabeledDataset& ds,
                                 const MethodResult& result) {
  if (!ds.has_labels()) throw PreconditionError("dataset has no labels");
  std::vector<int> out;
  out.reserve(result.rows.size());
  for (int r : result.rows)
    out.push_back((*ds.labels)[static_cast<std::size_t>(r)]);
  return out;
}

std::string method_result_to_json(const MethodResult& result) {
  nlohmann::json j;
  j["rows"] = result.rows;
  j["assignment"] = result.assignment;
  j["centroids"] = nlohmann::json::parse(centroids_to_json(result.centroids));
  j["trace"] = {{"uploads", result.trace.uploads_count},
                {"broadcasts", result.trace.broadcasts_count},
                {"participated", result.trace.participated},
                {"local_k", result.trace.local_k}};
  return j.dump();
}

}  // namespace sdafc
