#include "nbrefine/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "nbrefine/error.hpp"
#include "nbrefine/parallel.hpp"

namespace nbr {
namespace {

void check_dims(const EmbeddingMatrix& features, const Matrix& centroids) {
  if (centroids.cols() != features.dim()) {
    throw ConfigError("centroid dimension " + std::to_string(centroids.cols()) +
                      " does not match feature dimension " + std::to_string(features.dim()));
  }
  if (centroids.rows() == 0) throw ConfigError("no centroids given");
}

// Index drawn with probability proportional to weight among untaken samples,
// uniform over untaken samples when every weight is zero.
std::size_t sample_d2(const std::vector<double>& weight, const std::vector<bool>& taken,
                      std::mt19937_64& rng) {
  const std::size_t n = weight.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += taken[i] ? 0.0 : weight[i];
  if (total > 0.0) {
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i] || weight[i] == 0.0) continue;
      pick = i;
      u -= weight[i];
      if (u < 0.0) break;
    }
    return pick;
  }
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < n; ++i) {
    if (!taken[i]) free.push_back(i);
  }
  return free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
}

// Greedy k-means++: each step draws 2 + floor(ln K) D^2-weighted candidates and
// keeps the one that lowers the seeding potential most.
Matrix kmeanspp_init(const EmbeddingMatrix& features, std::size_t num_clusters,
                     std::mt19937_64& rng) {
  const std::size_t n = features.rows();
  const auto trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(num_clusters)));
  Matrix centroids(num_clusters, features.dim());
  std::vector<bool> taken(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());

  auto distances_to = [&](std::size_t idx) {
    std::vector<double> d(n);
    parallel_for(n, [&](std::size_t i) {
      d[i] = std::min(best[i], squared_distance(features.row(i), features.row(idx)));
    });
    return d;
  };
  auto take = [&](std::size_t c, std::size_t idx, std::vector<double> dist) {
    taken[idx] = true;
    auto src = features.row(idx);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
    best = std::move(dist);
  };

  const std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  take(0, first, distances_to(first));
  for (std::size_t c = 1; c < num_clusters; ++c) {
    std::size_t pick = n;
    std::vector<double> pick_dist;
    double pick_potential = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t cand = sample_d2(best, taken, rng);
      auto dist = distances_to(cand);
      double potential = 0.0;
      for (double v : dist) potential += v;
      if (potential < pick_potential) {
        pick = cand;
        pick_potential = potential;
        pick_dist = std::move(dist);
      }
    }
    take(c, pick, std::move(pick_dist));
  }
  return centroids;
}

// Moves empty clusters onto the sample farthest from its centroid, taking that
// sample from a cluster with at least two members.
void repair_empty(const EmbeddingMatrix& features, Matrix& centroids,
                  std::vector<std::size_t>& labels) {
  const std::size_t num_clusters = centroids.rows();
  std::vector<std::size_t> counts(num_clusters, 0);
  for (std::size_t l : labels) ++counts[l];

  for (std::size_t c = 0; c < num_clusters; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = labels.size();
    double far_dist = -1.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (counts[labels[i]] < 2) continue;
      const double d = squared_distance(features.row(i), centroids.row(labels[i]));
      if (d > far_dist) {
        far_dist = d;
        far = i;
      }
    }
    // K <= n guarantees some cluster holds two samples while one is empty.
    --counts[labels[far]];
    labels[far] = c;
    counts[c] = 1;
    auto src = features.row(far);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
  }
}

Matrix cluster_means(const EmbeddingMatrix& features, const std::vector<std::size_t>& labels,
                     std::size_t num_clusters) {
  Matrix sums(num_clusters, features.dim());
  std::vector<std::size_t> counts(num_clusters, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto dst = sums.row(labels[i]);
    auto src = features.row(i);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    ++counts[labels[i]];
  }
  for (std::size_t k = 0; k < num_clusters; ++k) {
    for (double& v : sums.row(k)) v /= static_cast<double>(counts[k]);
  }
  return sums;
}

}  // namespace

std::vector<std::size_t> assign(const EmbeddingMatrix& features, const Matrix& centroids) {
  check_dims(features, centroids);
  std::vector<std::size_t> labels(features.rows());
  parallel_for(features.rows(), [&](std::size_t i) {
    std::size_t best = 0;
    double best_d = squared_distance(features.row(i), centroids.row(0));
    for (std::size_t c = 1; c < centroids.rows(); ++c) {
      const double d = squared_distance(features.row(i), centroids.row(c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    labels[i] = best;
  });
  return labels;
}

double inertia(const EmbeddingMatrix& features, const Matrix& centroids,
               const std::vector<std::size_t>& assignments) {
  check_dims(features, centroids);
  double total = 0.0;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    total += squared_distance(features.row(i), centroids.row(assignments[i]));
  }
  return total;
}

ClusterModel kmeans_fit(const EmbeddingMatrix& features, std::size_t num_clusters,
                        std::uint64_t seed, const KMeansOptions& options) {
  require_normalized(features, "kmeans_fit");
  const std::size_t n = features.rows();
  if (num_clusters < 2 || num_clusters > n) {
    throw ConfigError("cluster count K=" + std::to_string(num_clusters) + " outside [2, " +
                      std::to_string(n) + "]");
  }

  std::mt19937_64 rng(seed);
  ClusterModel model;
  model.centroids = kmeanspp_init(features, num_clusters, rng);

  for (std::size_t it = 0; it < options.max_iter; ++it) {
    model.assignments = assign(features, model.centroids);
    repair_empty(features, model.centroids, model.assignments);
    model.inertia_history.push_back(inertia(features, model.centroids, model.assignments));
    ++model.iterations;

    Matrix updated = cluster_means(features, model.assignments, num_clusters);
    double shift = 0.0;
    for (std::size_t c = 0; c < num_clusters; ++c) {
      shift = std::max(shift, std::sqrt(squared_distance(updated.row(c), model.centroids.row(c))));
    }
    model.centroids = std::move(updated);
    if (shift < options.tol) break;
  }

  model.assignments = assign(features, model.centroids);
  repair_empty(features, model.centroids, model.assignments);
  model.inertia = inertia(features, model.centroids, model.assignments);
  model.inertia_history.push_back(model.inertia);
  return model;
}

}  // namespace nbr
