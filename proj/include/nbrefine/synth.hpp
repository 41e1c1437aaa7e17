#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nbrefine/embedding.hpp"

namespace nbr {

struct MixtureSpec {
  std::size_t clusters = 10;
  std::size_t per_cluster = 100;
  std::size_t dim = 32;
  double spread = 0.25;      // per-coordinate noise standard deviation
  double separation = 0.5;   // minimum pairwise angle between cluster means, radians
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  EmbeddingMatrix features;
  LabelVector labels;
  Matrix means;  // clusters x dim, unit rows
  // Samples whose nearest other mean lies within 1.2x the distance to their own mean.
  std::vector<bool> boundary;
};

// Unit mean directions by rejection sampling, then mean + N(0, spread^2 I)
// per sample, row-normalized. Samples are emitted cluster by cluster.
SyntheticData generate(const MixtureSpec& spec);

}  // namespace nbr
