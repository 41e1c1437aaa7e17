#include "nbrefine/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nbrefine/error.hpp"
#include "nbrefine/parallel.hpp"

namespace nbr {

std::size_t BoundaryReport::candidate_count() const {
  return static_cast<std::size_t>(std::count(candidate_mask.begin(), candidate_mask.end(), true));
}

std::vector<double> boundary_ratios(const EmbeddingMatrix& features, const ClusterModel& model) {
  if (model.assignments.size() != features.rows()) {
    throw ConfigError("model has " + std::to_string(model.assignments.size()) +
                      " assignments for " + std::to_string(features.rows()) + " samples");
  }
  return boundary_ratios(features, model.centroids, model.assignments);
}

std::vector<double> boundary_ratios(const EmbeddingMatrix& features, const Matrix& centroids,
                                    std::span<const std::size_t> assignments) {
  const std::size_t num_clusters = centroids.rows();
  if (num_clusters < 2) {
    throw ConfigError("boundary ratios need at least 2 centroids, got " +
                      std::to_string(num_clusters));
  }
  if (centroids.cols() != features.dim()) {
    throw ConfigError("centroid dimension does not match features");
  }
  if (assignments.size() != features.rows()) {
    throw ConfigError("assignment count does not match sample count");
  }

  std::vector<double> ratios(features.rows());
  parallel_for(features.rows(), [&](std::size_t i) {
    const std::size_t own = assignments[i];
    if (own >= num_clusters) {
      throw ConfigError("sample " + std::to_string(i) + " assigned to unknown cluster " +
                        std::to_string(own));
    }
    const double d_intra = std::sqrt(squared_distance(features.row(i), centroids.row(own)));
    double d_near = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < num_clusters; ++c) {
      if (c == own) continue;
      d_near = std::min(d_near, std::sqrt(squared_distance(features.row(i), centroids.row(c))));
    }
    const double denom = std::max(d_intra, d_near);
    if (denom == 0.0) {
      throw DataError("sample " + std::to_string(i) +
                      " coincides with two centroids; boundary ratio undefined");
    }
    ratios[i] = 1.0 - (d_near - d_intra) / denom;
  });
  return ratios;
}

double fraction_ratio(const ScheduleConfig& cfg, long t) {
  cfg.validate();
  if (t < cfg.t0) {
    throw ConfigError("epoch " + std::to_string(t) + " precedes clustering start t0=" +
                      std::to_string(cfg.t0));
  }
  if (t == cfg.t0) return cfg.fr0;
  if (t >= cfg.T) return 1.0;
  // Every step here is a monotone rounding, so the schedule never decreases.
  const double progress = static_cast<double>(t - cfg.t0) / static_cast<double>(cfg.T - cfg.t0);
  return cfg.fr0 + (1.0 - cfg.fr0) * progress;
}

BoundaryReport select_candidates(std::span<const double> ratios, double fr) {
  if (ratios.empty()) throw DataError("no boundary ratios to select from");
  if (!(fr > 0.0 && fr <= 1.0)) {
    throw ConfigError("fraction ratio must lie in (0, 1], got " + std::to_string(fr));
  }
  const std::size_t n = ratios.size();
  // The epsilon absorbs products like 100 * 0.29 landing just under 29.
  const auto keep = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fr + 1e-9));
  const std::size_t m = std::clamp<std::size_t>(keep, 1, n);

  std::vector<double> sorted(ratios.begin(), ratios.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(m - 1),
                   sorted.end());

  BoundaryReport report;
  report.ratios.assign(ratios.begin(), ratios.end());
  report.sigma = sorted[m - 1];
  report.fr = fr;
  report.candidate_mask.resize(n);
  report.filtered_mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.candidate_mask[i] = ratios[i] <= report.sigma;
    report.filtered_mask[i] = !report.candidate_mask[i];
  }
  return report;
}

}  // namespace nbr
