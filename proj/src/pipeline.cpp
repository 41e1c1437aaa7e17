#include "nbrefine/pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "nbrefine/boundary.hpp"
#include "nbrefine/concordance.hpp"
#include "nbrefine/error.hpp"
#include "nbrefine/knn.hpp"

namespace nbr {
namespace {

// Purity over the queries selected by mask (all queries when mask is null).
std::optional<double> masked_purity(const NeighborList& list, std::span<const std::size_t> labels,
                                    std::size_t k, const std::vector<bool>* mask) {
  double total = 0.0;
  std::size_t queries = 0;
  for (std::size_t q = 0; q < list.queries(); ++q) {
    if (mask != nullptr && !(*mask)[q]) continue;
    std::size_t seen = 0, same = 0;
    for (std::size_t j : list.indices(q)) {
      if (j == q) continue;
      if (seen == k) break;
      ++seen;
      same += labels[j] == labels[q];
    }
    if (seen < k) throw ConfigError("purity k=" + std::to_string(k) + " exceeds neighbor list");
    total += static_cast<double>(same) / static_cast<double>(k);
    ++queries;
  }
  if (queries == 0) return std::nullopt;
  return total / static_cast<double>(queries);
}

struct CurveAccumulator {
  std::vector<double> sums;
  std::vector<std::size_t> counts;

  explicit CurveAccumulator(std::size_t n) : sums(n, 0.0), counts(n, 0) {}

  void add(std::size_t slot, std::optional<double> v) {
    if (!v) return;
    sums[slot] += *v;
    ++counts[slot];
  }

  PurityCurve finish(const std::vector<std::size_t>& ks) const {
    PurityCurve curve;
    for (std::size_t s = 0; s < ks.size(); ++s) {
      if (counts[s] != 0) curve.emplace_back(ks[s], sums[s] / static_cast<double>(counts[s]));
    }
    return curve;
  }
};

nlohmann::json curve_json(const PurityCurve& curve) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [k, p] : curve) out.push_back({{"k", k}, {"purity", p}});
  return out;
}

}  // namespace

void PipelineConfig::validate(std::size_t n) const {
  if (batch_size < 2) throw ConfigError("batch size must be at least 2");
  if (clusters < 2 || clusters > n) {
    throw ConfigError("cluster count " + std::to_string(clusters) + " outside [2, " +
                      std::to_string(n) + "]");
  }
  schedule.validate();
  propagation.validate();
  if (epochs < 1) throw ConfigError("simulate at least one epoch");
  if (epochs > static_cast<std::size_t>(schedule.T - schedule.t0 + 1)) {
    throw ConfigError("cannot simulate " + std::to_string(epochs) + " distinct epochs in [" +
                      std::to_string(schedule.t0) + ", " + std::to_string(schedule.T) + "]");
  }
  const std::size_t smallest = std::min(batch_size, n);
  neighbors.validate(smallest);
  for (std::size_t k : purity_ks) {
    if (k < 1 || k >= smallest) {
      throw ConfigError("purity k=" + std::to_string(k) + " needs batches larger than " +
                        std::to_string(k) + " (smallest batch " + std::to_string(smallest) + ")");
    }
  }
}

std::vector<long> PipelineConfig::simulated_epochs() const {
  std::vector<long> out;
  const long span = schedule.T - schedule.t0;
  if (epochs == 1) return {schedule.t0};
  const long steps = static_cast<long>(epochs) - 1;
  for (long e = 0; e <= steps; ++e) {
    out.push_back(schedule.t0 + (e * span + steps / 2) / steps);
  }
  return out;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::vector<std::size_t> order) {
  const std::size_t count = std::max<std::size_t>(1, n / batch_size);
  std::vector<std::vector<std::size_t>> batches(count);
  for (std::size_t b = 0; b < count; ++b) {
    const std::size_t begin = b * batch_size;
    const std::size_t end = (b + 1 == count) ? n : begin + batch_size;
    batches[b].assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                      order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

PipelineReport run_pipeline(const EmbeddingMatrix& embeddings,
                            const std::optional<LabelVector>& labels, const PipelineConfig& cfg) {
  const EmbeddingMatrix features =
      embeddings.normalized() ? embeddings : normalize_rows(embeddings);
  const std::size_t n = features.rows();
  cfg.validate(n);
  if (labels && labels->size() != n) {
    throw DataError("label count " + std::to_string(labels->size()) +
                    " does not match embedding rows " + std::to_string(n));
  }

  PipelineReport report;
  report.config = cfg;
  report.samples = n;
  report.dim = features.dim();

  std::vector<std::size_t> ks = cfg.purity_ks;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  const std::size_t max_k = ks.empty() ? 0 : ks.back();

  std::mt19937_64 rng(cfg.seed);
  for (long t : cfg.simulated_epochs()) {
    EpochRecord rec;
    rec.epoch = t;
    rec.fr = fraction_ratio(cfg.schedule, t);

    const std::uint64_t kmeans_seed = rng();
    const ClusterModel model = kmeans_fit(features, cfg.clusters, kmeans_seed, cfg.kmeans);
    rec.inertia = model.inertia;
    rec.kmeans_iterations = model.iterations;
    if (labels) rec.metrics = evaluate_clustering(labels->values(), model.assignments);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto batches = make_batches(n, cfg.batch_size, std::move(order));

    CurveAccumulator eu(ks.size()), ca(ks.size()), eu_cand(ks.size()), ca_cand(ks.size());
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& idx = batches[b];
      BatchRecord br;
      br.index = b;
      br.size = idx.size();
      try {
        const EmbeddingMatrix batch = features.subset(idx);
        const RefinedFeatures refined = refine(batch, cfg.neighbors, cfg.propagation);
        const NeighborList conaff = conaff_neighbors(refined, cfg.neighbors.k,
                                                     cfg.neighbors.include_self,
                                                     cfg.propagation.normalize_refined);

        std::vector<std::size_t> assigned(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) assigned[i] = model.assignments[idx[i]];
        const auto ratios = boundary_ratios(batch, model.centroids, assigned);
        const BoundaryReport sel = select_candidates(ratios, rec.fr);
        br.candidates = sel.candidate_count();
        br.sigma = sel.sigma;

        const ViewPair views(batch, batch);
        br.group_loss = group_loss(views, conaff);
        br.filtered_loss = filtered_group_loss(views, conaff, sel.candidate_mask);

        if (labels && max_k > 0) {
          std::vector<std::size_t> batch_labels(idx.size());
          for (std::size_t i = 0; i < idx.size(); ++i) batch_labels[i] = (*labels)[idx[i]];
          const NeighborList eu_list = topk(batch, max_k, false);
          const NeighborList ca_list =
              conaff_neighbors(refined, std::min(max_k + 1, idx.size()), true,
                               cfg.propagation.normalize_refined);
          for (std::size_t s = 0; s < ks.size(); ++s) {
            eu.add(s, masked_purity(eu_list, batch_labels, ks[s], nullptr));
            ca.add(s, masked_purity(ca_list, batch_labels, ks[s], nullptr));
            eu_cand.add(s, masked_purity(eu_list, batch_labels, ks[s], &sel.candidate_mask));
            ca_cand.add(s, masked_purity(ca_list, batch_labels, ks[s], &sel.candidate_mask));
          }
        }
      } catch (const Error& e) {
        br.error = e.what();
      }
      rec.batches.push_back(std::move(br));
    }
    rec.purity_euclidean = eu.finish(ks);
    rec.purity_conaff = ca.finish(ks);
    rec.purity_euclidean_candidates = eu_cand.finish(ks);
    rec.purity_conaff_candidates = ca_cand.finish(ks);
    report.epochs.push_back(std::move(rec));
  }
  return report;
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  return {
      {"k", cfg.neighbors.k},
      {"k1", cfg.neighbors.k1},
      {"k2", cfg.neighbors.k2},
      {"include_self", cfg.neighbors.include_self},
      {"alpha", cfg.propagation.alpha},
      {"layers", cfg.propagation.layers},
      {"normalize_refined", cfg.propagation.normalize_refined},
      {"t0", cfg.schedule.t0},
      {"T", cfg.schedule.T},
      {"fr0", cfg.schedule.fr0},
      {"clusters", cfg.clusters},
      {"batch_size", cfg.batch_size},
      {"seed", cfg.seed},
      {"epochs", cfg.epochs},
      {"kmeans_max_iter", cfg.kmeans.max_iter},
      {"kmeans_tol", cfg.kmeans.tol},
      {"purity_ks", cfg.purity_ks},
  };
}

nlohmann::json to_json(const PipelineReport& report) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const EpochRecord& rec : report.epochs) {
    nlohmann::json batches = nlohmann::json::array();
    for (const BatchRecord& b : rec.batches) {
      nlohmann::json jb = {{"index", b.index}, {"size", b.size}, {"candidates", b.candidates},
                           {"sigma", b.sigma}};
      jb["group_loss"] = b.group_loss ? nlohmann::json(*b.group_loss) : nlohmann::json(nullptr);
      jb["filtered_loss"] =
          b.filtered_loss ? nlohmann::json(*b.filtered_loss) : nlohmann::json(nullptr);
      if (b.error) jb["error"] = *b.error;
      batches.push_back(std::move(jb));
    }
    nlohmann::json je = {
        {"epoch", rec.epoch},
        {"fr", rec.fr},
        {"kmeans", {{"inertia", rec.inertia}, {"iterations", rec.kmeans_iterations}}},
        {"batches", std::move(batches)},
    };
    if (rec.metrics) {
      je["metrics"] = {{"nmi", rec.metrics->nmi}, {"acc", rec.metrics->acc},
                       {"ari", rec.metrics->ari}};
    } else {
      je["metrics"] = nullptr;
    }
    je["purity"] = {
        {"euclidean", curve_json(rec.purity_euclidean)},
        {"conaff", curve_json(rec.purity_conaff)},
        {"euclidean_candidates", curve_json(rec.purity_euclidean_candidates)},
        {"conaff_candidates", curve_json(rec.purity_conaff_candidates)},
    };
    epochs.push_back(std::move(je));
  }
  return {
      {"kind", "pipeline_report"},
      {"simulation", true},
      {"samples", report.samples},
      {"dim", report.dim},
      {"config", to_json(report.config)},
      {"epochs", std::move(epochs)},
  };
}

}  // namespace nbr
