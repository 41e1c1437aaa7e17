#include "nbrefine/concordance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nbrefine/error.hpp"
#include "nbrefine/matrix.hpp"

namespace nbr {
namespace {

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  return dot(a, b) / (na * nb);
}

void check_same_shape(const EmbeddingMatrix& a, const EmbeddingMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.dim() != b.dim()) {
    throw ConfigError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.dim()) + " vs " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.dim()));
  }
}

// Mean over anchors of the mean cosine between anchor prediction and neighbor targets.
double mean_neighbor_cosine(const EmbeddingMatrix& pred, const EmbeddingMatrix& target,
                            const Neighborhoods& neighborhoods, const std::vector<bool>* mask) {
  if (neighborhoods.size() != pred.rows()) {
    throw ConfigError("expected " + std::to_string(pred.rows()) + " neighborhoods, got " +
                      std::to_string(neighborhoods.size()));
  }
  double total = 0.0;
  std::size_t anchors = 0;
  for (std::size_t i = 0; i < neighborhoods.size(); ++i) {
    if (mask != nullptr && !(*mask)[i]) continue;
    const auto& hood = neighborhoods[i];
    if (hood.empty()) throw DataError("empty neighborhood for sample " + std::to_string(i));
    double inner = 0.0;
    for (std::size_t j : hood) {
      if (j >= target.rows()) {
        throw ConfigError("neighbor index " + std::to_string(j) + " out of range for sample " +
                          std::to_string(i));
      }
      inner += cosine(pred.row(i), target.row(j));
    }
    total += inner / static_cast<double>(hood.size());
    ++anchors;
  }
  if (anchors == 0) throw DataError("no candidates at epoch");
  return total / static_cast<double>(anchors);
}

}  // namespace

ViewPair::ViewPair(EmbeddingMatrix online_pred, EmbeddingMatrix target_proj)
    : online_(std::move(online_pred)), target_(std::move(target_proj)) {
  check_same_shape(online_, target_, "view pair");
  require_normalized(online_, "view pair");
  require_normalized(target_, "view pair");
}

double instance_loss(const ViewPair& pair) {
  double total = 0.0;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    total += cosine(pair.online_pred().row(i), pair.target_proj().row(i));
  }
  return -total / static_cast<double>(pair.size());
}

double group_loss(const ViewPair& pair, const Neighborhoods& neighborhoods) {
  return -mean_neighbor_cosine(pair.online_pred(), pair.target_proj(), neighborhoods, nullptr);
}

double group_loss(const ViewPair& pair, const NeighborList& neighbors) {
  return group_loss(pair, to_neighborhoods(neighbors));
}

double filtered_group_loss(const ViewPair& pair, const Neighborhoods& neighborhoods,
                           const std::vector<bool>& candidate_mask) {
  if (candidate_mask.size() != pair.size()) {
    throw ConfigError("candidate mask has " + std::to_string(candidate_mask.size()) +
                      " entries for " + std::to_string(pair.size()) + " samples");
  }
  return -mean_neighbor_cosine(pair.online_pred(), pair.target_proj(), neighborhoods,
                               &candidate_mask);
}

double filtered_group_loss(const ViewPair& pair, const NeighborList& neighbors,
                           const std::vector<bool>& candidate_mask) {
  return filtered_group_loss(pair, to_neighborhoods(neighbors), candidate_mask);
}

double total_loss(long t, long t0, double instance_value, double filtered_group_value) {
  return t < t0 ? instance_value : filtered_group_value;
}

double simsiam_conaff_loss(const EmbeddingMatrix& p1, const EmbeddingMatrix& p2,
                           const EmbeddingMatrix& z1, const EmbeddingMatrix& z2,
                           const Neighborhoods& n1, const Neighborhoods& n2) {
  check_same_shape(p1, p2, "simsiam");
  check_same_shape(p1, z1, "simsiam");
  check_same_shape(p1, z2, "simsiam");
  const double first = -mean_neighbor_cosine(p1, z2, n2, nullptr);
  const double second = -mean_neighbor_cosine(p2, z1, n1, nullptr);
  return 0.5 * first + 0.5 * second;
}

double infonce_conaff_loss(std::span<const double> query,
                           const std::vector<std::vector<double>>& positives,
                           const std::vector<std::vector<double>>& negatives, double tau,
                           bool other_positives_in_denominator) {
  if (!(tau > 0.0)) throw ConfigError("temperature must be positive");
  if (positives.empty()) throw DataError("InfoNCE needs at least one positive");
  auto logit = [&](const std::vector<double>& key) {
    if (key.size() != query.size()) throw ConfigError("key dimension does not match query");
    return dot(query, key) / tau;
  };

  std::vector<double> pos_logits, neg_logits;
  pos_logits.reserve(positives.size());
  neg_logits.reserve(negatives.size());
  for (const auto& k : positives) pos_logits.push_back(logit(k));
  for (const auto& k : negatives) neg_logits.push_back(logit(k));

  double total = 0.0;
  for (std::size_t a = 0; a < pos_logits.size(); ++a) {
    const double pos = pos_logits[a];
    // log-sum-exp over the denominator terms, shifted by the largest logit.
    double peak = pos;
    for (double l : neg_logits) peak = std::max(peak, l);
    if (other_positives_in_denominator) {
      for (double l : pos_logits) peak = std::max(peak, l);
    }
    double sum = 0.0;
    if (other_positives_in_denominator) {
      for (double l : pos_logits) sum += std::exp(l - peak);
    } else {
      sum += std::exp(pos - peak);
    }
    for (double l : neg_logits) sum += std::exp(l - peak);
    total += (pos - peak) - std::log(sum);
  }
  return -total / static_cast<double>(pos_logits.size());
}

}  // namespace nbr
