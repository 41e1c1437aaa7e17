#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "nbrefine/knn.hpp"

namespace nbr {

// Label arguments are arbitrary non-negative ids; only equality matters.

// Mutual information over the arithmetic mean of the two entropies. Two
// constant labelings score 1.
double nmi(std::span<const std::size_t> truth, std::span<const std::size_t> pred);

// Adjusted Rand index from the pair-counting contingency table. Degenerate
// tables where the expected index equals its maximum score 1.
double ari(std::span<const std::size_t> truth, std::span<const std::size_t> pred);

// Best matched fraction over one-to-one label mappings.
double accuracy(std::span<const std::size_t> truth, std::span<const std::size_t> pred);

// Minimum-cost perfect matching on a square cost matrix (row-major, size x size).
// Returns the column assigned to each row.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t size);

// Mean fraction of each query's first k non-self neighbors sharing its label.
// The query itself is skipped wherever it appears in its list.
double neighborhood_purity(const NeighborList& neighbors, std::span<const std::size_t> labels,
                           std::size_t k);

struct MetricsReport {
  double nmi = 0.0;
  double acc = 0.0;
  double ari = 0.0;
  std::vector<std::pair<std::size_t, double>> purity_curve;
};

MetricsReport evaluate_clustering(std::span<const std::size_t> truth,
                                  std::span<const std::size_t> pred);

}  // namespace nbr
