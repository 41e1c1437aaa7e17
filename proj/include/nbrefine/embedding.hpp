#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nbrefine/matrix.hpp"

namespace nbr {

// n x d matrix of sample features, rows are samples. Entries are always
// finite; when `normalized()` holds every row has unit L2 norm (within 1e-6).
class EmbeddingMatrix {
 public:
  static constexpr double kUnitTolerance = 1e-6;

  // Validates shape and finiteness. The matrix is not considered normalized
  // unless `normalized` is true, in which case the row norms are checked.
  explicit EmbeddingMatrix(Matrix data, bool normalized = false);

  const Matrix& data() const noexcept { return data_; }
  bool normalized() const noexcept { return normalized_; }
  std::size_t rows() const noexcept { return data_.rows(); }
  std::size_t dim() const noexcept { return data_.cols(); }
  std::span<const double> row(std::size_t i) const { return data_.row(i); }

  EmbeddingMatrix subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  Matrix data_;
  bool normalized_ = false;
};

// Scales every row to unit L2 norm. Throws DataError naming the first
// zero-norm row.
EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m);

// Throws ConfigError unless `m` is row-normalized; `what` names the caller.
void require_normalized(const EmbeddingMatrix& m, const char* what);

// Dense class identifiers 0..K-1.
class LabelVector {
 public:
  LabelVector() = default;
  // Labels must already be dense non-negative integers.
  explicit LabelVector(std::vector<std::size_t> labels);

  // Remaps an arbitrary alphabet onto 0..K-1 in ascending order of the raw value.
  static LabelVector from_raw(std::span<const std::int64_t> raw);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<std::size_t>& values() const noexcept { return labels_; }

  LabelVector subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<std::size_t> labels_;
  std::size_t num_classes_ = 0;
};

struct NeighborConfig {
  std::size_t k = 10;   // retrieval size
  std::size_t k1 = 10;  // reciprocal graph neighbors
  std::size_t k2 = 2;   // propagation edges per node
  bool include_self = true;

  // Checks 1 <= k2 <= k1 <= n and 1 <= k <= n, with n - 1 as the bound when
  // the query is excluded from its own list.
  void validate(std::size_t n) const;
};

struct ScheduleConfig {
  long t0 = 800;    // first clustering epoch
  long T = 1000;    // last epoch of the relaxation schedule
  double fr0 = 0.8;

  void validate() const;
};

}  // namespace nbr
