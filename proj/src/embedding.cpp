#include "nbrefine/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "nbrefine/error.hpp"

namespace nbr {

EmbeddingMatrix::EmbeddingMatrix(Matrix data, bool normalized)
    : data_(std::move(data)), normalized_(normalized) {
  if (data_.rows() == 0 || data_.cols() == 0) {
    throw DataError("embedding matrix must be at least 1x1, got " + std::to_string(data_.rows()) +
                    "x" + std::to_string(data_.cols()));
  }
  for (std::size_t r = 0; r < data_.rows(); ++r) {
    for (std::size_t c = 0; c < data_.cols(); ++c) {
      if (!std::isfinite(data_(r, c))) {
        throw DataError("non-finite value at row " + std::to_string(r) + ", column " +
                        std::to_string(c));
      }
    }
  }
  if (normalized_) {
    for (std::size_t r = 0; r < data_.rows(); ++r) {
      const double norm = std::sqrt(dot(data_.row(r), data_.row(r)));
      if (std::abs(norm - 1.0) > kUnitTolerance) {
        throw DataError("row " + std::to_string(r) + " has norm " + std::to_string(norm) +
                        ", expected unit norm");
      }
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::subset(std::span<const std::size_t> indices) const {
  return EmbeddingMatrix(data_.gather_rows(indices), normalized_);
}

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m) {
  Matrix out = m.data();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double norm = std::sqrt(dot(row, row));
    if (norm == 0.0) throw DataError("zero-norm row " + std::to_string(r));
    for (double& v : row) v /= norm;
  }
  return EmbeddingMatrix(std::move(out), true);
}

void require_normalized(const EmbeddingMatrix& m, const char* what) {
  if (!m.normalized()) {
    throw ConfigError(std::string(what) + " requires row-normalized features");
  }
}

LabelVector::LabelVector(std::vector<std::size_t> labels) : labels_(std::move(labels)) {
  std::vector<bool> seen;
  for (std::size_t l : labels_) {
    if (l >= seen.size()) seen.resize(l + 1, false);
    seen[l] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw DataError("labels are not dense: some class in 0.." + std::to_string(seen.size() - 1) +
                    " is unused");
  }
  num_classes_ = seen.size();
}

LabelVector LabelVector::from_raw(std::span<const std::int64_t> raw) {
  std::map<std::int64_t, std::size_t> remap;
  for (std::int64_t v : raw) remap.emplace(v, 0);
  std::size_t next = 0;
  for (auto& [value, id] : remap) id = next++;
  std::vector<std::size_t> dense;
  dense.reserve(raw.size());
  for (std::int64_t v : raw) dense.push_back(remap.at(v));
  return LabelVector(std::move(dense));
}

LabelVector LabelVector::subset(std::span<const std::size_t> indices) const {
  std::vector<std::int64_t> raw;
  raw.reserve(indices.size());
  for (std::size_t i : indices) raw.push_back(static_cast<std::int64_t>(labels_[i]));
  return from_raw(raw);
}

void NeighborConfig::validate(std::size_t n) const {
  const std::size_t limit = include_self ? n : n - 1;
  if (k2 < 1 || k2 > k1 || k1 > limit) {
    throw ConfigError("neighbor counts must satisfy 1 <= k2 <= k1 <= " + std::to_string(limit) +
                      " (k2=" + std::to_string(k2) + ", k1=" + std::to_string(k1) +
                      ", n=" + std::to_string(n) + ")");
  }
  if (k < 1 || k > limit) {
    throw ConfigError("retrieval size k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(limit) + "]");
  }
}

void ScheduleConfig::validate() const {
  if (t0 < 0 || t0 >= T) {
    throw ConfigError("schedule needs 0 <= t0 < T (t0=" + std::to_string(t0) +
                      ", T=" + std::to_string(T) + ")");
  }
  if (!(fr0 > 0.0 && fr0 <= 1.0)) {
    throw ConfigError("fr0 must lie in (0, 1], got " + std::to_string(fr0));
  }
}

}  // namespace nbr
