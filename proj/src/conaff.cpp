#include "nbrefine/conaff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nbrefine/error.hpp"
#include "nbrefine/parallel.hpp"

namespace nbr {

ReciprocalAdjacency::ReciprocalAdjacency(Matrix encodings, std::size_t k1, bool include_self)
    : a_(std::move(encodings)), k1_(k1), include_self_(include_self) {
  if (a_.rows() != a_.cols()) throw ConfigError("reciprocal adjacency must be square");
}

void PropagationConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("alpha must be a finite non-negative value");
  }
}

ReciprocalAdjacency reciprocal_adjacency(const EmbeddingMatrix& features, std::size_t k1,
                                         bool include_self) {
  require_normalized(features, "reciprocal_adjacency");
  const std::size_t n = features.rows();
  const NeighborList nn = topk(features, k1, include_self);

  // member(i, j): j is among the k1 nearest neighbors of i.
  std::vector<unsigned char> member(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : nn.indices(i)) member[i * n + j] = 1;
  }

  Matrix a(n, n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = 0.5 * (member[i * n + j] + member[j * n + i]);
    }
  });
  return ReciprocalAdjacency(std::move(a), k1, include_self);
}

ContextGraph build_graph(const EmbeddingMatrix& features, const ReciprocalAdjacency& adjacency,
                         std::size_t k2) {
  require_normalized(features, "build_graph");
  if (adjacency.size() != features.rows()) {
    throw ConfigError("adjacency size " + std::to_string(adjacency.size()) +
                      " does not match batch size " + std::to_string(features.rows()));
  }
  if (k2 < 1 || k2 > adjacency.k1()) {
    throw ConfigError("k2=" + std::to_string(k2) + " must lie in [1, k1=" +
                      std::to_string(adjacency.k1()) + "]");
  }

  const NeighborList nn = topk(features, k2, adjacency.include_self());
  ContextGraph graph{adjacency.encodings(), std::vector<std::vector<Edge>>(features.rows())};
  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto idx = nn.indices(i);
    auto sc = nn.scores(i);
    graph.edges[i].reserve(k2);
    for (std::size_t r = 0; r < k2; ++r) {
      // Self-similarity of a unit row is exactly 1; the computed product can miss by an ulp.
      const double w = idx[r] == i ? 1.0 : std::clamp(sc[r], -1.0, 1.0);
      graph.edges[i].push_back({idx[r], w});
    }
  }
  return graph;
}

RefinedFeatures propagate(const ContextGraph& graph, const PropagationConfig& cfg) {
  cfg.validate();
  const std::size_t n = graph.nodes.rows();
  if (graph.edges.size() != n) {
    throw ConfigError("graph has " + std::to_string(graph.edges.size()) + " edge lists for " +
                      std::to_string(n) + " nodes");
  }
  for (const auto& out : graph.edges) {
    for (const Edge& e : out) {
      if (e.target >= n) throw ConfigError("edge target " + std::to_string(e.target) + " out of range");
    }
  }

  // Per-edge coefficients do not change across layers.
  std::vector<std::vector<double>> coeff(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const Edge& e : graph.edges[i]) {
      coeff[i].push_back(e.weight > 0.0 ? std::pow(e.weight, cfg.alpha) : 0.0);
    }
  }

  Matrix current = graph.nodes;
  for (std::size_t layer = 0; layer < cfg.layers; ++layer) {
    Matrix next = current;
    parallel_for(n, [&](std::size_t i) {
      auto dst = next.row(i);
      const auto& out = graph.edges[i];
      for (std::size_t e = 0; e < out.size(); ++e) {
        const double w = coeff[i][e];
        if (w == 0.0) continue;
        auto src = current.row(out[e].target);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
      }
    });
    current = std::move(next);
  }
  return RefinedFeatures{std::move(current)};
}

NeighborList conaff_neighbors(const RefinedFeatures& refined, std::size_t k, bool include_self,
                              bool normalize_refined) {
  if (!normalize_refined) {
    return rank_by_inner_product(refined.h, k, include_self, NeighborSpace::kConAff);
  }
  Matrix unit = refined.h;
  for (std::size_t r = 0; r < unit.rows(); ++r) {
    auto row = unit.row(r);
    const double norm = std::sqrt(dot(row, row));
    if (norm == 0.0) continue;
    for (double& v : row) v /= norm;
  }
  return rank_by_inner_product(unit, k, include_self, NeighborSpace::kConAff);
}

RefinedFeatures refine(const EmbeddingMatrix& features, const NeighborConfig& ncfg,
                       const PropagationConfig& pcfg) {
  ncfg.validate(features.rows());
  pcfg.validate();
  const ReciprocalAdjacency a = reciprocal_adjacency(features, ncfg.k1, ncfg.include_self);
  const ContextGraph g = build_graph(features, a, ncfg.k2);
  return propagate(g, pcfg);
}

NeighborList refine_and_retrieve(const EmbeddingMatrix& features, const NeighborConfig& ncfg,
                                 const PropagationConfig& pcfg) {
  const RefinedFeatures h = refine(features, ncfg, pcfg);
  return conaff_neighbors(h, ncfg.k, ncfg.include_self, pcfg.normalize_refined);
}

}  // namespace nbr
