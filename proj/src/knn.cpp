#include "nbrefine/knn.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "nbrefine/error.hpp"
#include "nbrefine/parallel.hpp"

namespace nbr {

NeighborList::NeighborList(std::size_t queries, std::size_t k, std::vector<std::size_t> indices,
                           std::vector<double> scores, bool include_self, NeighborSpace space)
    : queries_(queries),
      k_(k),
      indices_(std::move(indices)),
      scores_(std::move(scores)),
      include_self_(include_self),
      space_(space) {
  if (indices_.size() != queries_ * k_ || scores_.size() != queries_ * k_) {
    throw ConfigError("neighbor list storage does not match " + std::to_string(queries_) + "x" +
                      std::to_string(k_));
  }
}

Neighborhoods to_neighborhoods(const NeighborList& list) {
  Neighborhoods out(list.queries());
  for (std::size_t q = 0; q < list.queries(); ++q) {
    auto idx = list.indices(q);
    out[q].assign(idx.begin(), idx.end());
  }
  return out;
}

NeighborList rank_by_inner_product(const Matrix& points, std::size_t k, bool include_self,
                                   NeighborSpace space) {
  const std::size_t n = points.rows();
  const std::size_t limit = include_self ? n : (n == 0 ? 0 : n - 1);
  if (k < 1 || k > limit) {
    throw ConfigError("k=" + std::to_string(k) + " outside [1, " + std::to_string(limit) +
                      "] for " + std::to_string(n) + " rows" +
                      (include_self ? "" : " excluding self"));
  }

  std::vector<std::size_t> indices(n * k);
  std::vector<double> scores(n * k);
  parallel_for(n, [&](std::size_t q) {
    struct Candidate {
      double score;
      std::size_t index;
    };
    std::vector<Candidate> cand;
    cand.reserve(n);
    auto query = points.row(q);
    for (std::size_t j = 0; j < n; ++j) {
      if (!include_self && j == q) continue;
      cand.push_back({dot(query, points.row(j)), j});
    }
    const auto before = [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.index < b.index;
    };
    const auto top = cand.begin() + static_cast<std::ptrdiff_t>(k);
    std::partial_sort(cand.begin(), top, cand.end(), before);
    // A tied duplicate with a lower index can push the query out of its own
    // list; membership is guaranteed, order still follows (score, index).
    if (include_self &&
        std::none_of(cand.begin(), top, [q](const Candidate& c) { return c.index == q; })) {
      const auto self = std::find_if(top, cand.end(), [q](const Candidate& c) { return c.index == q; });
      std::iter_swap(top - 1, self);
      std::sort(cand.begin(), top, before);
    }
    for (std::size_t r = 0; r < k; ++r) {
      indices[q * k + r] = cand[r].index;
      scores[q * k + r] = cand[r].score;
    }
  });
  return NeighborList(n, k, std::move(indices), std::move(scores), include_self, space);
}

NeighborList topk(const EmbeddingMatrix& features, std::size_t k, bool include_self) {
  require_normalized(features, "topk");
  return rank_by_inner_product(features.data(), k, include_self, NeighborSpace::kFeature);
}

}  // namespace nbr
