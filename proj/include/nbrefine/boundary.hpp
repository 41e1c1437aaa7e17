#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nbrefine/embedding.hpp"
#include "nbrefine/kmeans.hpp"

namespace nbr {

// Outcome of thresholding one batch. candidate_mask marks samples kept as
// loss anchors; filtered_mask is its complement.
struct BoundaryReport {
  std::vector<double> ratios;
  double sigma = 0.0;
  double fr = 1.0;
  std::vector<bool> candidate_mask;
  std::vector<bool> filtered_mask;

  std::size_t candidate_count() const;
};

// Online silhouette-style ratio per sample:
//   r = 1 - (d_N - d_I) / max(d_I, d_N)
// where d_I is the distance to the assigned centroid and d_N the distance to
// the nearest other centroid. r is 0 at the own centroid, 1 when equidistant
// and above 1 once another centroid is closer.
std::vector<double> boundary_ratios(const EmbeddingMatrix& features, const ClusterModel& model);

// Same, for a subset of samples whose model assignments are given explicitly.
std::vector<double> boundary_ratios(const EmbeddingMatrix& features, const Matrix& centroids,
                                    std::span<const std::size_t> assignments);

// Linear relaxation from fr0 at t0 to 1 at T, held at 1 afterwards.
double fraction_ratio(const ScheduleConfig& cfg, long t);

// Keeps the max(1, floor(|B| * fr)) smallest ratios; sigma is the largest of
// them and every sample with r <= sigma stays a candidate, so ties at sigma
// can admit more than that count.
BoundaryReport select_candidates(std::span<const double> ratios, double fr);

}  // namespace nbr
