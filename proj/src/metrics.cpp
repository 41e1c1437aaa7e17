#include "nbrefine/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nbrefine/error.hpp"

namespace nbr {
namespace {

struct Contingency {
  std::size_t rows = 0;  // truth classes
  std::size_t cols = 0;  // predicted clusters
  std::vector<double> counts;
  std::vector<double> row_sums;
  std::vector<double> col_sums;
  double n = 0.0;
};

// Compacts both labelings to dense ids before tabulating.
Contingency tabulate(std::span<const std::size_t> truth, std::span<const std::size_t> pred) {
  if (truth.size() != pred.size()) {
    throw ConfigError("label length mismatch: " + std::to_string(truth.size()) + " vs " +
                      std::to_string(pred.size()));
  }
  auto dense = [](std::span<const std::size_t> raw, std::size_t& count) {
    std::vector<std::size_t> sorted(raw.begin(), raw.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    count = sorted.size();
    std::vector<std::size_t> out;
    out.reserve(raw.size());
    for (std::size_t v : raw) {
      out.push_back(static_cast<std::size_t>(
          std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin()));
    }
    return out;
  };

  Contingency t;
  const auto a = dense(truth, t.rows);
  const auto b = dense(pred, t.cols);
  t.counts.assign(t.rows * t.cols, 0.0);
  t.row_sums.assign(t.rows, 0.0);
  t.col_sums.assign(t.cols, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    t.counts[a[i] * t.cols + b[i]] += 1.0;
    t.row_sums[a[i]] += 1.0;
    t.col_sums[b[i]] += 1.0;
  }
  t.n = static_cast<double>(a.size());
  return t;
}

double entropy(const std::vector<double>& sums, double n) {
  double h = 0.0;
  for (double s : sums) {
    if (s > 0.0) h -= (s / n) * std::log(s / n);
  }
  return h;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double nmi(std::span<const std::size_t> truth, std::span<const std::size_t> pred) {
  if (truth.empty()) throw ConfigError("nmi needs at least one sample");
  const Contingency t = tabulate(truth, pred);
  const double h_true = entropy(t.row_sums, t.n);
  const double h_pred = entropy(t.col_sums, t.n);
  if (h_true == 0.0 && h_pred == 0.0) return 1.0;

  double mi = 0.0;
  for (std::size_t r = 0; r < t.rows; ++r) {
    for (std::size_t c = 0; c < t.cols; ++c) {
      const double nij = t.counts[r * t.cols + c];
      if (nij == 0.0) continue;
      mi += (nij / t.n) * std::log(nij * t.n / (t.row_sums[r] * t.col_sums[c]));
    }
  }
  const double denom = 0.5 * (h_true + h_pred);
  return std::clamp(mi / denom, 0.0, 1.0);
}

double ari(std::span<const std::size_t> truth, std::span<const std::size_t> pred) {
  if (truth.size() < 2) throw ConfigError("ari needs at least two samples");
  const Contingency t = tabulate(truth, pred);
  double index = 0.0;
  for (double nij : t.counts) index += choose2(nij);
  double sum_rows = 0.0;
  for (double a : t.row_sums) sum_rows += choose2(a);
  double sum_cols = 0.0;
  for (double b : t.col_sums) sum_cols += choose2(b);

  const double expected = sum_rows * sum_cols / choose2(t.n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t size) {
  if (cost.size() != size * size) throw ConfigError("assignment cost matrix is not square");
  // Shortest augmenting path with row/column potentials, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(size + 1, 0.0), v(size + 1, 0.0);
  std::vector<std::size_t> match(size + 1, 0), way(size + 1, 0);
  for (std::size_t row = 1; row <= size; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(size + 1, inf);
    std::vector<bool> used(size + 1, false);
    do {
      used[col0] = true;
      const std::size_t r0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= size; ++c) {
        if (used[c]) continue;
        const double cur = cost[(r0 - 1) * size + (c - 1)] - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= size; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<std::size_t> assignment(size);
  for (std::size_t c = 1; c <= size; ++c) assignment[match[c] - 1] = c - 1;
  return assignment;
}

double accuracy(std::span<const std::size_t> truth, std::span<const std::size_t> pred) {
  if (truth.empty()) throw ConfigError("accuracy needs at least one sample");
  const Contingency t = tabulate(truth, pred);
  const std::size_t size = std::max(t.rows, t.cols);
  // Maximize matches by minimizing (n - count); padding cells count zero.
  std::vector<double> cost(size * size, t.n);
  for (std::size_t r = 0; r < t.rows; ++r) {
    for (std::size_t c = 0; c < t.cols; ++c) cost[r * size + c] = t.n - t.counts[r * t.cols + c];
  }
  const auto match = solve_assignment(cost, size);
  double hits = 0.0;
  for (std::size_t r = 0; r < t.rows; ++r) {
    if (match[r] < t.cols) hits += t.counts[r * t.cols + match[r]];
  }
  return hits / t.n;
}

double neighborhood_purity(const NeighborList& neighbors, std::span<const std::size_t> labels,
                           std::size_t k) {
  if (labels.size() != neighbors.queries()) {
    throw ConfigError("label count " + std::to_string(labels.size()) + " does not match " +
                      std::to_string(neighbors.queries()) + " queries");
  }
  if (k == 0) throw ConfigError("purity needs k >= 1");
  double total = 0.0;
  for (std::size_t q = 0; q < neighbors.queries(); ++q) {
    std::size_t seen = 0;
    std::size_t same = 0;
    for (std::size_t j : neighbors.indices(q)) {
      if (j == q) continue;
      if (seen == k) break;
      ++seen;
      if (labels[j] == labels[q]) ++same;
    }
    if (seen < k) {
      throw ConfigError("query " + std::to_string(q) + " has only " + std::to_string(seen) +
                        " non-self neighbors, k=" + std::to_string(k));
    }
    total += static_cast<double>(same) / static_cast<double>(k);
  }
  return total / static_cast<double>(neighbors.queries());
}

MetricsReport evaluate_clustering(std::span<const std::size_t> truth,
                                  std::span<const std::size_t> pred) {
  MetricsReport report;
  report.nmi = nmi(truth, pred);
  report.acc = accuracy(truth, pred);
  report.ari = truth.size() >= 2 ? ari(truth, pred) : 1.0;
  return report;
}

}  // namespace nbr
