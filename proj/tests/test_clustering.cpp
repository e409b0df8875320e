#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "sdafc/clustering.hpp"
#include "sdafc/errors.hpp"
#include "sdafc/rng.hpp"

using namespace sdafc;

namespace {

Matrix random_matrix(int n, int d, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Matrix x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = scale * rng.normal();
  return x;
}

// Optimal 2-means inertia by brute force over all 2-partitions.
double brute_force_2means(const Matrix& x) {
  const int n = static_cast<int>(x.rows());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    Matrix c = Matrix::Zero(2, x.cols());
    int n0 = 0, n1 = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        c.row(0) += x.row(i);
        ++n0;
      } else {
        c.row(1) += x.row(i);
        ++n1;
      }
    }
    c.row(0) /= n0;
    c.row(1) /= n1;
    double inertia = 0.0;
    for (int i = 0; i < n; ++i)
      inertia += (x.row(i) - c.row((mask & (1u << i)) ? 0 : 1)).squaredNorm();
    best = std::min(best, inertia);
  }
  return best;
}

}  // namespace

TEST_SUITE("clustering") {

TEST_CASE("kmeans++ with k=1 picks a data row") {
  const Matrix x = random_matrix(20, 3, 1);
  const auto model = kmeanspp_init(x, 1, 5);
  bool is_row = false;
  for (int i = 0; i < 20; ++i)
    if ((x.row(i) - model.centroids.row(0)).norm() == 0.0) is_row = true;
  CHECK(is_row);
}

TEST_CASE("kmeans++ with k=n selects every row once") {
  const Matrix x = random_matrix(6, 2, 2);
  const auto model = kmeanspp_init(x, 6, 3);
  std::set<int> matched;
  for (int c = 0; c < 6; ++c)
    for (int i = 0; i < 6; ++i)
      if ((x.row(i) - model.centroids.row(c)).norm() == 0.0) matched.insert(i);
  CHECK(matched.size() == 6);
}

TEST_CASE("kmeans++ never re-picks duplicate rows") {
  // 10 rows, only 3 distinct points.
  Matrix x(10, 2);
  for (int i = 0; i < 10; ++i) {
    const int which = i % 3;
    x(i, 0) = which;
    x(i, 1) = -which;
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto model = kmeanspp_init(x, 3, seed);
    std::set<std::pair<double, double>> picked;
    for (int c = 0; c < 3; ++c)
      picked.insert({model.centroids(c, 0), model.centroids(c, 1)});
    CHECK(picked.size() == 3);
  }
}

TEST_CASE("kmeans with k=1 returns the column mean") {
  const Matrix x = random_matrix(30, 2, 4);
  const auto res = kmeans_fit(x, 1, 1);
  const Vector mean = x.colwise().mean().transpose();
  CHECK((res.model.centroids.row(0).transpose() - mean).norm() < 1e-9);
  double expect = 0.0;
  for (int i = 0; i < 30; ++i)
    expect += (x.row(i).transpose() - mean).squaredNorm();
  CHECK(res.inertia == doctest::Approx(expect));
}

TEST_CASE("square corners with k=4 reach zero inertia") {
  Matrix x(4, 2);
  x << 0, 0, 0, 1, 1, 0, 1, 1;
  const auto res = kmeans_fit_best(x, 4, 1, 5);
  CHECK(res.inertia == doctest::Approx(0.0));
}

TEST_CASE("kmeans matches the brute-force 2-partition optimum") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix x = random_matrix(6, 2, 100 + seed, 2.0);
    const double best = brute_force_2means(x);
    const auto res = kmeans_fit_best(x, 2, seed, 10);
    CHECK(res.inertia == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("inertia history is non-increasing") {
  const Matrix x = random_matrix(200, 3, 8, 3.0);
  const auto res = kmeans_fit(x, 5, 3);
  for (std::size_t i = 1; i < res.inertia_history.size(); ++i)
    CHECK(res.inertia_history[i] <= res.inertia_history[i - 1] + 1e-9);
}

TEST_CASE("weighted kmeans follows the heavy rows") {
  Matrix x(3, 1);
  x << 0.0, 1.0, 10.0;
  std::vector<double> w{100.0, 1.0, 1.0};
  const auto res = kmeans_fit_best(x, 2, 1, 5, 300, 1e-9, &w);
  // The heavy point should get its own centroid at ~0.
  double nearest = std::numeric_limits<double>::infinity();
  for (int c = 0; c < 2; ++c)
    nearest = std::min(nearest, std::abs(res.model.centroids(c, 0)));
  CHECK(nearest < 0.05);
}

TEST_CASE("fcm equidistant point gets symmetric membership") {
  Matrix x(5, 1);
  x << -1, -1, 1, 1, 0;
  const auto res = fcm_fit(x, 2, 2.0, 1);
  // Row 4 sits midway between the two centroids.
  CHECK(res.membership.weights(4, 0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(res.membership.weights(4, 1) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("fcm membership rows sum to one") {
  const Matrix x = random_matrix(100, 2, 12, 2.0);
  const auto res = fcm_fit(x, 3, 1.1, 2);
  for (int i = 0; i < 100; ++i) {
    CHECK(res.membership.weights.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
    for (int j = 0; j < 3; ++j) {
      CHECK(res.membership.weights(i, j) >= 0.0);
      CHECK(res.membership.weights(i, j) <= 1.0);
    }
  }
}

TEST_CASE("fcm returns a fixed point of its update equations") {
  const Matrix x = random_matrix(6, 2, 21, 2.0);
  const double m = 1.1;
  const auto res = fcm_fit(x, 2, m, 3, 500, 1e-10);
  const Matrix& c = res.model.centroids;
  const Matrix& u = res.membership.weights;

  // Membership equation.
  for (int i = 0; i < 6; ++i) {
    double denom = 0.0;
    Vector expect(2);
    for (int j = 0; j < 2; ++j) {
      const double d2 = (x.row(i) - c.row(j)).squaredNorm();
      expect(j) = std::pow(1.0 / d2, 1.0 / (m - 1.0));
      denom += expect(j);
    }
    expect /= denom;
    for (int j = 0; j < 2; ++j)
      CHECK(u(i, j) == doctest::Approx(expect(j)).epsilon(1e-6));
  }

  // Centroid equation.
  for (int j = 0; j < 2; ++j) {
    Vector num = Vector::Zero(2);
    double den = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double w = std::pow(u(i, j), m);
      num += w * x.row(i).transpose();
      den += w;
    }
    CHECK((c.row(j).transpose() - num / den).norm() < 1e-6);
  }
}

TEST_CASE("point at a centroid gets a one-hot membership") {
  // Two tight blobs; blob members coincide with converged centroids rarely,
  // so check the stated convention directly through a crafted call: data
  // where a centroid lands exactly on a duplicated point.
  Matrix x(4, 1);
  x << 0, 0, 5, 7;
  const auto res = fcm_fit(x, 2, 1.5, 1);
  // The duplicated point 0 coincides with its centroid (mean of {0,0} pulls
  // the centroid onto it as fuzzification weight for far points vanishes).
  int at = -1;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j)
      if ((x.row(i) - res.model.centroids.row(j)).norm() == 0.0) at = i;
  if (at >= 0) {
    double mx = res.membership.weights.row(at).maxCoeff();
    CHECK(mx == 1.0);
  }
}

TEST_CASE("fcm near degree 1 approaches hard kmeans memberships") {
  Matrix x(8, 2);
  x << 0, 0, 0.1, 0, 0, 0.1, 0.1, 0.1, 10, 10, 10.1, 10, 10, 10.1, 10.1, 10.1;
  const auto res = fcm_fit(x, 2, 1.000001, 5);
  for (int i = 0; i < 8; ++i)
    CHECK(res.membership.weights.row(i).maxCoeff() > 1.0 - 1e-3);
}

TEST_CASE("assign_cosine follows direction not magnitude") {
  CentroidModel model;
  model.centroids = Matrix(2, 2);
  model.centroids << 1, 0, 0, 1;
  Matrix x(3, 2);
  x << 5, 0,       // parallel to c0
       0, 0.01,    // parallel to c1
       0, 1;       // equals c1 direction
  const auto labels = assign_cosine(x, model);
  CHECK(labels == HardAssignment{0, 1, 1});

  // Scale invariance.
  Matrix scaled = x * 1000.0;
  CHECK(assign_cosine(scaled, model) == labels);
}

TEST_CASE("zero vector ties break to centroid 0") {
  CentroidModel model;
  model.centroids = Matrix(2, 2);
  model.centroids << 1, 0, 0, 1;
  Matrix x = Matrix::Zero(1, 2);
  CHECK(assign_cosine(x, model)[0] == 0);
}

TEST_CASE("assign_euclidean nearest and tie-break") {
  CentroidModel model;
  model.centroids = Matrix(2, 1);
  model.centroids << 0, 2;
  Matrix x(3, 1);
  x << 2, 1, 0.4;  // exact hit, midpoint, nearer to c0
  const auto labels = assign_euclidean(x, model);
  CHECK(labels == HardAssignment{1, 0, 0});
}

TEST_CASE("assign_euclidean agrees with a brute-force scan") {
  const Matrix x = random_matrix(20, 2, 31);
  CentroidModel model;
  model.centroids = random_matrix(4, 2, 32);
  const auto labels = assign_euclidean(x, model);
  for (int i = 0; i < 20; ++i) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 4; ++j) {
      const double d = (x.row(i) - model.centroids.row(j)).squaredNorm();
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    CHECK(labels[static_cast<std::size_t>(i)] == best);
  }
}

TEST_CASE("fcm hard labels argmax with low-index ties") {
  FuzzyMembership mem;
  mem.weights = Matrix(2, 3);
  mem.weights << 0.2, 0.5, 0.3, 0.4, 0.4, 0.2;
  const auto labels = fcm_hard_labels(mem);
  CHECK(labels == HardAssignment{1, 0});
}

TEST_CASE("permuting rows permutes the assignment") {
  const Matrix x = random_matrix(40, 2, 77, 3.0);
  const auto res = kmeans_fit(x, 3, 9);
  // Reversed row order assigned against the same centroids.
  Matrix rev(40, 2);
  for (int i = 0; i < 40; ++i) rev.row(i) = x.row(39 - i);
  const auto labels = assign_euclidean(rev, res.model);
  for (int i = 0; i < 40; ++i)
    CHECK(labels[static_cast<std::size_t>(i)] ==
          res.assignment[static_cast<std::size_t>(39 - i)]);
}

TEST_CASE("n < k is rejected") {
  const Matrix x = random_matrix(2, 2, 1);
  CHECK_THROWS_AS(kmeans_fit(x, 3, 1), PreconditionError);
  CHECK_THROWS_AS(fcm_fit(x, 3, 1.1, 1), PreconditionError);
  CHECK_THROWS_AS(kmeanspp_init(x, 3, 1), PreconditionError);
}

TEST_CASE("centroid JSON round-trip") {
  CentroidModel model;
  model.centroids = random_matrix(3, 4, 55);
  model.fit_metric = "euclidean";
  const auto back = centroids_from_json(centroids_to_json(model));
  CHECK(back.fit_metric == model.fit_metric);
  CHECK((back.centroids - model.centroids).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE
