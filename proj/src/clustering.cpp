#include "sdafc/clustering.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "sdafc/errors.hpp"
#include "sdafc/rng.hpp"

namespace sdafc {

namespace {

constexpr double kCosineEps = 1e-12;

double sq_dist(const Matrix& x, Eigen::Index i, const Matrix& c,
               Eigen::Index j) {
  return (x.row(i) - c.row(j)).squaredNorm();
}

}  // namespace

CentroidModel kmeanspp_init(const Matrix& x, int k, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  if (n < k) throw PreconditionError("k-means++ needs n >= k");
  Rng rng(seed);

  Matrix centroids(k, x.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);

  const Eigen::Index first = static_cast<Eigen::Index>(
      rng.uniform_int(static_cast<std::uint64_t>(n)));
  centroids.row(0) = x.row(first);
  chosen[static_cast<std::size_t>(first)] = true;

  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = sq_dist(x, i, centroids, 0);

  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc >= target && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // numeric edge: take the last positive-mass point
        for (Eigen::Index i = n - 1; i >= 0; --i)
          if (d2(i) > 0.0) {
            pick = i;
            break;
          }
      }
    }
    if (pick < 0) {
      // All remaining points coincide with existing centroids (duplicates
      // with k greater than the number of distinct rows): fall back to the
      // first unchosen row.
      for (Eigen::Index i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
    }
    centroids.row(c) = x.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
    for (Eigen::Index i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), sq_dist(x, i, centroids, c));
  }

  CentroidModel model;
  model.centroids = std::move(centroids);
  return model;
}

KMeansResult kmeans_fit(const Matrix& x, int k, std::uint64_t seed,
                        int max_iter, double tol,
                        const std::vector<double>* weights) {
  const Eigen::Index n = x.rows();
  if (n < k) throw PreconditionError("k-means needs n >= k");

  KMeansResult res;
  res.model = kmeanspp_init(x, k, seed);
  Matrix& c = res.model.centroids;
  res.assignment.assign(static_cast<std::size_t>(n), 0);

  auto weight_of = [&](Eigen::Index i) {
    return weights ? (*weights)[static_cast<std::size_t>(i)] : 1.0;
  };

  for (int it = 0; it < max_iter; ++it) {
    // Assignment step.
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int j = 0; j < k; ++j) {
        const double d = sq_dist(x, i, c, j);
        if (d < best) {
          best = d;
          arg = j;
        }
      }
      res.assignment[static_cast<std::size_t>(i)] = arg;
      inertia += weight_of(i) * best;
    }
    res.inertia_history.push_back(inertia);

    // Update step.
    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int j = res.assignment[static_cast<std::size_t>(i)];
      sums.row(j) += weight_of(i) * x.row(i);
      mass[static_cast<std::size_t>(j)] += weight_of(i);
    }

    Matrix next = c;
    for (int j = 0; j < k; ++j) {
      if (mass[static_cast<std::size_t>(j)] > 0.0) {
        next.row(j) = sums.row(j) / mass[static_cast<std::size_t>(j)];
      } else {
        // Empty-cluster repair: reseed at the point farthest from its
        // assigned centroid.
        double worst = -1.0;
        Eigen::Index far = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d =
              sq_dist(x, i, c, res.assignment[static_cast<std::size_t>(i)]);
          if (d > worst) {
            worst = d;
            far = i;
          }
        }
        next.row(j) = x.row(far);
        res.assignment[static_cast<std::size_t>(far)] = j;
      }
    }

    const double shift = (next - c).cwiseAbs().maxCoeff();
    c = next;
    res.iterations = it + 1;
    if (shift < tol) break;
  }

  // Final assignment and inertia against the converged centroids.
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int j = 0; j < k; ++j) {
      const double d = sq_dist(x, i, c, j);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    res.assignment[static_cast<std::size_t>(i)] = arg;
    inertia += weight_of(i) * best;
  }
  res.inertia = inertia;
  res.inertia_history.push_back(inertia);
  return res;
}

KMeansResult kmeans_fit_best(const Matrix& x, int k, std::uint64_t seed,
                             int restarts, int max_iter, double tol,
                             const std::vector<double>* weights) {
  if (restarts < 1) throw PreconditionError("restarts must be >= 1");
  std::optional<KMeansResult> best;
  for (int r = 0; r < restarts; ++r) {
    auto run = kmeans_fit(
        x, k, derive_seed(seed, {0x6b6dULL, static_cast<std::uint64_t>(r)}),
        max_iter, tol, weights);
    if (!best || run.inertia < best->inertia) best = std::move(run);
  }
  return *best;
}

FcmResult fcm_fit(const Matrix& x, int k, double fuzzy_degree,
                  std::uint64_t seed, int max_iter, double tol) {
  const Eigen::Index n = x.rows();
  if (n < k) throw PreconditionError("fcm needs n >= k");
  if (fuzzy_degree <= 1.0)
    throw PreconditionError("fuzzy degree must be > 1");

  FcmResult res;
  res.model = kmeanspp_init(x, k, seed);
  Matrix& c = res.model.centroids;
  Matrix u(n, k);
  const double expo = 1.0 / (fuzzy_degree - 1.0);

  auto update_membership = [&]() {
    for (Eigen::Index i = 0; i < n; ++i) {
      int coincident = -1;
      for (int j = 0; j < k; ++j) {
        if (sq_dist(x, i, c, j) == 0.0) {
          coincident = j;
          break;
        }
      }
      if (coincident >= 0) {
        u.row(i).setZero();
        u(i, coincident) = 1.0;
        continue;
      }
      // Ratio form u_ij = 1 / sum_k (d_ij^2 / d_ik^2)^expo stays finite for
      // fuzzy degrees arbitrarily close to 1, where (1/d^2)^expo overflows.
      for (int j = 0; j < k; ++j) {
        const double dj = sq_dist(x, i, c, j);
        double denom = 0.0;
        for (int l = 0; l < k; ++l)
          denom += std::pow(dj / sq_dist(x, i, c, l), expo);
        u(i, j) = std::isfinite(denom) ? 1.0 / denom : 0.0;
      }
      u.row(i) /= u.row(i).sum();
    }
  };

  for (int it = 0; it < max_iter; ++it) {
    update_membership();

    Matrix next = Matrix::Zero(k, x.cols());
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) {
        const double w = std::pow(u(i, j), fuzzy_degree);
        next.row(j) += w * x.row(i);
        mass(j) += w;
      }
    }
    for (int j = 0; j < k; ++j) {
      if (mass(j) > 0.0)
        next.row(j) /= mass(j);
      else
        next.row(j) = c.row(j);
    }

    const double shift = (next - c).cwiseAbs().maxCoeff();
    c = next;
    res.iterations = it + 1;
    if (shift < tol) break;
  }
  update_membership();

  double objective = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j)
      objective += std::pow(u(i, j), fuzzy_degree) * sq_dist(x, i, c, j);
  res.objective = objective;
  res.membership.weights = std::move(u);
  res.membership.fuzzy_degree = fuzzy_degree;
  return res;
}

HardAssignment assign_cosine(const Matrix& x, const CentroidModel& model) {
  if (x.cols() != model.centroids.cols())
    throw ContractError("dimension mismatch in assign_cosine");
  const Eigen::Index n = x.rows();
  const int k = model.k();
  HardAssignment labels(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd cnorm(k);
  for (int j = 0; j < k; ++j)
    cnorm(j) = model.centroids.row(j).norm() + kCosineEps;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xnorm = x.row(i).norm() + kCosineEps;
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int j = 0; j < k; ++j) {
      const double dist =
          1.0 - x.row(i).dot(model.centroids.row(j)) / (xnorm * cnorm(j));
      if (dist < best) {
        best = dist;
        arg = j;
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
  }
  return labels;
}

HardAssignment assign_euclidean(const Matrix& x, const CentroidModel& model) {
  if (x.cols() != model.centroids.cols())
    throw ContractError("dimension mismatch in assign_euclidean");
  const Eigen::Index n = x.rows();
  const int k = model.k();
  HardAssignment labels(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int j = 0; j < k; ++j) {
      const double d = sq_dist(x, i, model.centroids, j);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
  }
  return labels;
}

HardAssignment fcm_hard_labels(const FuzzyMembership& membership) {
  const Eigen::Index n = membership.weights.rows();
  const Eigen::Index k = membership.weights.cols();
  HardAssignment labels(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = -1.0;
    int arg = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (membership.weights(i, j) > best) {
        best = membership.weights(i, j);
        arg = static_cast<int>(j);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
  }
  return labels;
}

std::string centroids_to_json(const CentroidModel& model) {
  nlohmann::json j;
  j["k"] = model.k();
  j["d"] = model.dim();
  j["fit_metric"] = model.fit_metric;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < model.k(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(model.dim()));
    for (int c = 0; c < model.dim(); ++c)
      row[static_cast<std::size_t>(c)] = model.centroids(i, c);
    rows.push_back(std::move(row));
  }
  j["centroids"] = rows;
  return j.dump();
}

CentroidModel centroids_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  CentroidModel model;
  model.fit_metric = j.at("fit_metric").get<std::string>();
  const auto rows = j.at("centroids").get<std::vector<std::vector<double>>>();
  const int k = j.at("k").get<int>();
  const int d = j.at("d").get<int>();
  model.centroids.resize(k, d);
  for (int i = 0; i < k; ++i)
    for (int c = 0; c < d; ++c)
      model.centroids(i, c) = rows[static_cast<std::size_t>(i)]
                                  [static_cast<std::size_t>(c)];
  return model;
}

}  // namespace sdafc
