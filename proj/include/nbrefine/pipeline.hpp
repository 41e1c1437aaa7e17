#pragma once

// Epoch-loop simulation over frozen embeddings. Each simulated epoch fits
// k-means on the full set, shuffles it into batches and, per batch, retrieves
// ConAff neighborhoods, computes boundary ratios against the epoch's model,
// selects candidates at fr(t) and evaluates the filtered group loss. Features
// never change, so this measures the selection machinery, not training.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "nbrefine/conaff.hpp"
#include "nbrefine/embedding.hpp"
#include "nbrefine/kmeans.hpp"
#include "nbrefine/metrics.hpp"

namespace nbr {

struct PipelineConfig {
  NeighborConfig neighbors;
  PropagationConfig propagation;
  ScheduleConfig schedule;
  std::size_t clusters = 10;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
  // Number of epochs sampled evenly over [t0, T], both ends included.
  std::size_t epochs = 5;
  KMeansOptions kmeans;
  std::vector<std::size_t> purity_ks = {1, 5, 10, 20};

  void validate(std::size_t n) const;
  // Epoch numbers visited by the simulation.
  std::vector<long> simulated_epochs() const;
};

struct BatchRecord {
  std::size_t index = 0;
  std::size_t size = 0;
  std::size_t candidates = 0;
  double sigma = 0.0;
  std::optional<double> group_loss;     // all anchors
  std::optional<double> filtered_loss;  // candidate anchors only
  std::optional<std::string> error;
};

using PurityCurve = std::vector<std::pair<std::size_t, double>>;

struct EpochRecord {
  long epoch = 0;
  double fr = 1.0;
  double inertia = 0.0;
  std::size_t kmeans_iterations = 0;
  std::optional<MetricsReport> metrics;
  std::vector<BatchRecord> batches;
  // Batch-averaged purity; empty without labels.
  PurityCurve purity_euclidean;
  PurityCurve purity_conaff;
  PurityCurve purity_euclidean_candidates;
  PurityCurve purity_conaff_candidates;
};

struct PipelineReport {
  PipelineConfig config;
  std::size_t samples = 0;
  std::size_t dim = 0;
  std::vector<EpochRecord> epochs;
};

// Batches are consecutive chunks of a seeded shuffle; a trailing partial chunk
// joins the previous batch. Returns index lists in batch order.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::vector<std::size_t> order);

PipelineReport run_pipeline(const EmbeddingMatrix& embeddings,
                            const std::optional<LabelVector>& labels, const PipelineConfig& cfg);

nlohmann::json to_json(const PipelineConfig& cfg);
nlohmann::json to_json(const PipelineReport& report);

}  // namespace nbr
