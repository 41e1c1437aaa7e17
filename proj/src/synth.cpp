#include "nbrefine/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "nbrefine/error.hpp"

namespace nbr {
namespace {

constexpr std::size_t kDirectionAttempts = 10000;
constexpr double kBoundaryFactor = 1.2;

std::vector<double> random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    for (double& x : v) x = gauss(rng);
    norm = std::sqrt(dot(v, v));
  }
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

void MixtureSpec::validate() const {
  if (clusters < 1) throw ConfigError("mixture needs at least one cluster");
  if (per_cluster < 1) throw ConfigError("mixture needs at least one sample per cluster");
  if (dim < 2) throw ConfigError("mixture dimension must be at least 2");
  if (!(spread > 0.0) || !std::isfinite(spread)) throw ConfigError("spread must be positive");
  if (!(separation >= 0.0) || separation > std::numbers::pi) {
    throw ConfigError("separation must lie in [0, pi]");
  }
}

SyntheticData generate(const MixtureSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);

  Matrix means(spec.clusters, spec.dim);
  const double max_cos = std::cos(spec.separation);
  for (std::size_t c = 0; c < spec.clusters; ++c) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < kDirectionAttempts && !placed; ++attempt) {
      auto cand = random_unit(spec.dim, rng);
      placed = true;
      for (std::size_t prev = 0; prev < c; ++prev) {
        if (dot(cand, means.row(prev)) > max_cos) {
          placed = false;
          break;
        }
      }
      if (placed) std::copy(cand.begin(), cand.end(), means.row(c).begin());
    }
    if (!placed) {
      throw ConfigError("could not place " + std::to_string(spec.clusters) +
                        " directions with separation " + std::to_string(spec.separation) +
                        " rad in dimension " + std::to_string(spec.dim) + " after " +
                        std::to_string(kDirectionAttempts) + " attempts");
    }
  }

  const std::size_t n = spec.clusters * spec.per_cluster;
  Matrix raw(n, spec.dim);
  std::vector<std::size_t> labels(n);
  std::normal_distribution<double> noise(0.0, spec.spread);
  for (std::size_t c = 0; c < spec.clusters; ++c) {
    for (std::size_t s = 0; s < spec.per_cluster; ++s) {
      const std::size_t i = c * spec.per_cluster + s;
      labels[i] = c;
      auto row = raw.row(i);
      double norm = 0.0;
      while (norm == 0.0) {
        for (std::size_t d = 0; d < spec.dim; ++d) row[d] = means(c, d) + noise(rng);
        norm = std::sqrt(dot(row, row));
      }
      for (double& v : row) v /= norm;
    }
  }

  std::vector<bool> boundary(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = labels[i];
    const double d_own = std::sqrt(squared_distance(raw.row(i), means.row(own)));
    double d_other = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < spec.clusters; ++c) {
      if (c != own) d_other = std::min(d_other, std::sqrt(squared_distance(raw.row(i), means.row(c))));
    }
    boundary[i] = d_other <= kBoundaryFactor * d_own;
  }

  return SyntheticData{EmbeddingMatrix(std::move(raw), true), LabelVector(std::move(labels)),
                       std::move(means), std::move(boundary)};
}

}  // namespace nbr
