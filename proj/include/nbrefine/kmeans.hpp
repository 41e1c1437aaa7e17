#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nbrefine/embedding.hpp"
#include "nbrefine/matrix.hpp"

namespace nbr {

struct KMeansOptions {
  std::size_t max_iter = 300;
  double tol = 1e-6;  // stop once the largest centroid shift drops below this
};

struct ClusterModel {
  Matrix centroids;                      // K x d
  std::vector<std::size_t> assignments;  // one cluster id per sample
  double inertia = 0.0;                  // sum of squared distances to assigned centroids
  std::size_t iterations = 0;
  // Inertia recorded after every assignment step, final state last.
  std::vector<double> inertia_history;

  std::size_t num_clusters() const noexcept { return centroids.rows(); }
};

// Lloyd iterations from a seeded greedy k-means++ start. Empty clusters are reseeded
// with the sample farthest from its own centroid.
ClusterModel kmeans_fit(const EmbeddingMatrix& features, std::size_t num_clusters,
                        std::uint64_t seed, const KMeansOptions& options = {});

// Nearest centroid by Euclidean distance, ties to the lowest cluster id.
std::vector<std::size_t> assign(const EmbeddingMatrix& features, const Matrix& centroids);

double inertia(const EmbeddingMatrix& features, const Matrix& centroids,
               const std::vector<std::size_t>& assignments);

}  // namespace nbr
