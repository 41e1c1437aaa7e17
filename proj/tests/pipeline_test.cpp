#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "nbrefine/boundary.hpp"
#include "nbrefine/error.hpp"
#include "nbrefine/parallel.hpp"
#include "nbrefine/pipeline.hpp"
#include "nbrefine/synth.hpp"

using namespace nbr;

namespace {

SyntheticData small_mixture(std::uint64_t seed, double spread = 0.25) {
  MixtureSpec spec;
  spec.clusters = 5;
  spec.per_cluster = 40;
  spec.dim = 16;
  spec.spread = spread;
  spec.separation = 0.8;
  spec.seed = seed;
  return generate(spec);
}

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.clusters = 5;
  cfg.batch_size = 64;
  cfg.epochs = 3;
  cfg.purity_ks = {1, 5, 10};
  return cfg;
}

}  // namespace

TEST(MakeBatches, TrailingChunkMerges) {
  std::vector<std::size_t> order(10);
  std::iota(order.begin(), order.end(), 0);
  const auto b = make_batches(10, 4, order);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].size(), 4u);
  EXPECT_EQ(b[1].size(), 6u);
  EXPECT_EQ(make_batches(3, 8, {2, 0, 1}), (std::vector<std::vector<std::size_t>>{{2, 0, 1}}));
}

TEST(PipelineConfig, SimulatedEpochs) {
  PipelineConfig cfg;
  cfg.epochs = 5;
  EXPECT_EQ(cfg.simulated_epochs(), (std::vector<long>{800, 850, 900, 950, 1000}));
  cfg.epochs = 1;
  EXPECT_EQ(cfg.simulated_epochs(), (std::vector<long>{800}));
}

TEST(PipelineConfig, Validation) {
  PipelineConfig cfg = small_config();
  EXPECT_NO_THROW(cfg.validate(200));
  cfg.clusters = 1;
  EXPECT_THROW(cfg.validate(200), ConfigError);
  cfg = small_config();
  cfg.purity_ks = {64};
  EXPECT_THROW(cfg.validate(200), ConfigError);
  cfg = small_config();
  cfg.neighbors.k1 = 100;
  EXPECT_THROW(cfg.validate(200), ConfigError);
  cfg = small_config();
  cfg.schedule.t0 = 10;
  cfg.schedule.T = 11;
  EXPECT_THROW(cfg.validate(200), ConfigError);
}

TEST(Pipeline, EpochFractionsFollowSchedule) {
  const auto data = small_mixture(1);
  const PipelineConfig cfg = small_config();
  const auto report = run_pipeline(data.features, data.labels, cfg);
  ASSERT_EQ(report.epochs.size(), 3u);
  for (const auto& rec : report.epochs) {
    EXPECT_EQ(rec.fr, fraction_ratio(cfg.schedule, rec.epoch));
    ASSERT_EQ(rec.batches.size(), 3u);
    std::size_t covered = 0;
    for (const auto& b : rec.batches) {
      EXPECT_FALSE(b.error.has_value());
      const auto expected = std::clamp<std::size_t>(
          static_cast<std::size_t>(static_cast<double>(b.size) * rec.fr + 1e-9), 1, b.size);
      EXPECT_GE(b.candidates, expected);
      covered += b.size;
    }
    EXPECT_EQ(covered, 200u);
  }
  EXPECT_EQ(report.epochs.back().fr, 1.0);
}

TEST(Pipeline, FullFractionFilteredEqualsGroup) {
  const auto data = small_mixture(2);
  PipelineConfig cfg = small_config();
  cfg.schedule.fr0 = 1.0;
  const auto report = run_pipeline(data.features, std::nullopt, cfg);
  for (const auto& rec : report.epochs) {
    EXPECT_FALSE(rec.metrics.has_value());
    EXPECT_TRUE(rec.purity_conaff.empty());
    for (const auto& b : rec.batches) {
      EXPECT_EQ(b.candidates, b.size);
      EXPECT_EQ(*b.filtered_loss, *b.group_loss);
    }
  }
}

TEST(Pipeline, SingleBatchWhenBatchCoversAll) {
  const auto data = small_mixture(3);
  PipelineConfig cfg = small_config();
  cfg.batch_size = 200;
  const auto report = run_pipeline(data.features, data.labels, cfg);
  for (const auto& rec : report.epochs) {
    ASSERT_EQ(rec.batches.size(), 1u);
    EXPECT_EQ(rec.batches[0].size, 200u);
  }
}

TEST(Pipeline, SeparatedDataClustersPerfectly) {
  const auto data = small_mixture(4, 0.02);
  const auto report = run_pipeline(data.features, data.labels, small_config());
  for (const auto& rec : report.epochs) {
    ASSERT_TRUE(rec.metrics.has_value());
    EXPECT_EQ(rec.metrics->acc, 1.0);
    EXPECT_NEAR(rec.metrics->nmi, 1.0, 1e-12);
    EXPECT_EQ(rec.metrics->ari, 1.0);
  }
}

TEST(Pipeline, DeterministicJsonAcrossRunsAndThreads) {
  const auto data = small_mixture(5);
  const PipelineConfig cfg = small_config();
  set_num_threads(1);
  const std::string a = to_json(run_pipeline(data.features, data.labels, cfg)).dump();
  const std::string b = to_json(run_pipeline(data.features, data.labels, cfg)).dump();
  set_num_threads(4);
  const std::string c = to_json(run_pipeline(data.features, data.labels, cfg)).dump();
  set_num_threads(0);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Pipeline, ConAffPurityAtLeastEuclidean) {
  const auto data = small_mixture(6);
  const auto report = run_pipeline(data.features, data.labels, small_config());
  for (const auto& rec : report.epochs) {
    ASSERT_EQ(rec.purity_conaff.size(), 3u);
    const double eu = rec.purity_euclidean.back().second;
    const double ca = rec.purity_conaff.back().second;
    EXPECT_GE(ca, eu - 0.02);
  }
}

TEST(Pipeline, JsonShape) {
  const auto data = small_mixture(7);
  const auto j = to_json(run_pipeline(data.features, data.labels, small_config()));
  EXPECT_EQ(j["kind"], "pipeline_report");
  EXPECT_EQ(j["simulation"], true);
  EXPECT_EQ(j["samples"], 200);
  EXPECT_EQ(j["config"]["k1"], 10);
  EXPECT_EQ(j["epochs"].size(), 3u);
  EXPECT_TRUE(j["epochs"][0]["purity"].contains("conaff_candidates"));
}

TEST(Pipeline, LabelCountMismatch) {
  const auto data = small_mixture(8);
  std::vector<std::size_t> l(10, 0);
  l[1] = 1;
  EXPECT_THROW(run_pipeline(data.features, LabelVector(l), small_config()), DataError);
}
