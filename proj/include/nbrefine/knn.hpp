#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nbrefine/embedding.hpp"
#include "nbrefine/matrix.hpp"

namespace nbr {

// Which space a neighbor list was ranked in.
enum class NeighborSpace { kFeature, kConAff };

// Per-query ranked neighbor indices with their similarity scores. Every query
// has exactly k entries; scores are non-increasing and indices distinct.
class NeighborList {
 public:
  NeighborList() = default;
  NeighborList(std::size_t queries, std::size_t k, std::vector<std::size_t> indices,
               std::vector<double> scores, bool include_self, NeighborSpace space);

  std::size_t queries() const noexcept { return queries_; }
  std::size_t k() const noexcept { return k_; }
  bool include_self() const noexcept { return include_self_; }
  NeighborSpace space() const noexcept { return space_; }

  std::span<const std::size_t> indices(std::size_t q) const {
    return {indices_.data() + q * k_, k_};
  }
  std::span<const double> scores(std::size_t q) const { return {scores_.data() + q * k_, k_}; }

  friend bool operator==(const NeighborList&, const NeighborList&) = default;

 private:
  std::size_t queries_ = 0;
  std::size_t k_ = 0;
  std::vector<std::size_t> indices_;
  std::vector<double> scores_;
  bool include_self_ = true;
  NeighborSpace space_ = NeighborSpace::kFeature;
};

// Jagged neighborhoods, one index set per anchor sample.
using Neighborhoods = std::vector<std::vector<std::size_t>>;

Neighborhoods to_neighborhoods(const NeighborList& list);

// Exact top-k by inner product over the rows of `points`, scores descending
// with ties broken by ascending index. With include_self the query competes
// as an ordinary candidate; without it the query is removed from its own
// candidate set. No normalization requirement.
NeighborList rank_by_inner_product(const Matrix& points, std::size_t k, bool include_self,
                                   NeighborSpace space);

// Cosine top-k over row-normalized features.
NeighborList topk(const EmbeddingMatrix& features, std::size_t k, bool include_self);

}  // namespace nbr
