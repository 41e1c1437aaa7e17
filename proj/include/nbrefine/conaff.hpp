#pragma once

// Contextually affinitive neighborhoods.
//
// A batch of unit features is re-encoded in three steps before retrieval:
//
//   1. reciprocal adjacency: A(i,j) is 1 when i and j are in each other's
//      top-k1 lists, 0.5 when only one direction holds and 0 otherwise. Row i
//      of A is the k-reciprocal encoding of sample i.
//   2. context graph: every node keeps directed edges to its top-k2 feature
//      neighbors, weighted by cosine similarity.
//   3. propagation: h(l+1)_i = h(l)_i + sum_j w(e_ij) * h(l)_j over outgoing
//      edges, with w(e) = e^alpha for e > 0 and 0 otherwise, starting from
//      h(0) = A and repeated for `layers` rounds.
//
// Neighbors are then ranked by the inner product of the refined rows.

#include <cstddef>
#include <vector>

#include "nbrefine/embedding.hpp"
#include "nbrefine/knn.hpp"
#include "nbrefine/matrix.hpp"

namespace nbr {

// Symmetric |B| x |B| matrix with entries in {0, 0.5, 1}.
class ReciprocalAdjacency {
 public:
  ReciprocalAdjacency(Matrix encodings, std::size_t k1, bool include_self);

  const Matrix& encodings() const noexcept { return a_; }
  std::size_t size() const noexcept { return a_.rows(); }
  std::size_t k1() const noexcept { return k1_; }
  bool include_self() const noexcept { return include_self_; }
  double operator()(std::size_t i, std::size_t j) const { return a_(i, j); }

 private:
  Matrix a_;
  std::size_t k1_;
  bool include_self_;
};

struct Edge {
  std::size_t target;
  double weight;  // cosine similarity, clamped to [-1, 1]

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Nodes carry the k-reciprocal encodings; each node has exactly k2 edges.
struct ContextGraph {
  Matrix nodes;
  std::vector<std::vector<Edge>> edges;
};

struct PropagationConfig {
  double alpha = 2.0;
  std::size_t layers = 1;
  // Scale refined rows to unit norm before ranking. Off by default so the
  // ranking uses the raw H H^T similarity.
  bool normalize_refined = false;

  void validate() const;
};

// Propagated encodings, one row per batch sample.
struct RefinedFeatures {
  Matrix h;
};

ReciprocalAdjacency reciprocal_adjacency(const EmbeddingMatrix& features, std::size_t k1,
                                         bool include_self);

ContextGraph build_graph(const EmbeddingMatrix& features, const ReciprocalAdjacency& adjacency,
                         std::size_t k2);

RefinedFeatures propagate(const ContextGraph& graph, const PropagationConfig& cfg);

NeighborList conaff_neighbors(const RefinedFeatures& refined, std::size_t k, bool include_self,
                              bool normalize_refined = false);

// reciprocal_adjacency -> build_graph -> propagate -> conaff_neighbors.
NeighborList refine_and_retrieve(const EmbeddingMatrix& features, const NeighborConfig& ncfg,
                                 const PropagationConfig& pcfg);

// Same composition, stopping after propagation.
RefinedFeatures refine(const EmbeddingMatrix& features, const NeighborConfig& ncfg,
                       const PropagationConfig& pcfg);

}  // namespace nbr
