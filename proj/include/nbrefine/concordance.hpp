#pragma once

// Value-only evaluation of the concordance objectives. Inputs are the
// already-computed outputs of the online predictor and target projector;
// nothing here produces gradients.

#include <cstddef>
#include <span>
#include <vector>

#include "nbrefine/embedding.hpp"
#include "nbrefine/knn.hpp"

namespace nbr {

// Online predictions and target projections for one batch, both row-normalized
// and of equal shape. Row i of each belongs to sample i.
class ViewPair {
 public:
  ViewPair(EmbeddingMatrix online_pred, EmbeddingMatrix target_proj);

  const EmbeddingMatrix& online_pred() const noexcept { return online_; }
  const EmbeddingMatrix& target_proj() const noexcept { return target_; }
  std::size_t size() const noexcept { return online_.rows(); }

 private:
  EmbeddingMatrix online_;
  EmbeddingMatrix target_;
};

// -mean_i cos(p_i, z_i)
double instance_loss(const ViewPair& pair);

// -mean_i mean_{j in N(i)} cos(p_i, z_j)
double group_loss(const ViewPair& pair, const Neighborhoods& neighborhoods);
double group_loss(const ViewPair& pair, const NeighborList& neighbors);

// group_loss restricted to anchors with candidate_mask[i] set. Neighbors are
// not masked: filtered samples still count when they appear in N(i).
double filtered_group_loss(const ViewPair& pair, const Neighborhoods& neighborhoods,
                           const std::vector<bool>& candidate_mask);
double filtered_group_loss(const ViewPair& pair, const NeighborList& neighbors,
                           const std::vector<bool>& candidate_mask);

// Instance term before t0, filtered group term from t0 on.
double total_loss(long t, long t0, double instance_value, double filtered_group_value);

// Symmetrized SimSiam-style objective with neighborhood targets:
//   1/2 mean_{i, j in n2(i)} D(p1_i, z2_j) + 1/2 mean_{i, j in n1(i)} D(p2_i, z1_j)
// with D(p, z) = -cos(p, z).
double simsiam_conaff_loss(const EmbeddingMatrix& p1, const EmbeddingMatrix& p2,
                           const EmbeddingMatrix& z1, const EmbeddingMatrix& z2,
                           const Neighborhoods& n1, const Neighborhoods& n2);

// InfoNCE averaged over a set of positives. By default each term's denominator
// holds the current positive plus all negatives:
//   -1/|P| sum_p log( exp(q.p/tau) / (exp(q.p/tau) + sum_k exp(q.k/tau)) )
// With other_positives_in_denominator every positive joins every denominator.
double infonce_conaff_loss(std::span<const double> query,
                           const std::vector<std::vector<double>>& positives,
                           const std::vector<std::vector<double>>& negatives, double tau,
                           bool other_positives_in_denominator = false);

}  // namespace nbr
