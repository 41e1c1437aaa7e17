#include "cli.hpp"

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nbrefine/boundary.hpp"
#include "nbrefine/codec.hpp"
#include "nbrefine/conaff.hpp"
#include "nbrefine/error.hpp"
#include "nbrefine/kmeans.hpp"
#include "nbrefine/knn.hpp"
#include "nbrefine/metrics.hpp"
#include "nbrefine/parallel.hpp"
#include "nbrefine/pipeline.hpp"
#include "nbrefine/synth.hpp"

namespace nbr::cli {
namespace {

using nlohmann::json;

// Flag values shared by the subcommands; each subcommand registers the subset it reads.
struct Options {
  std::string input;
  std::string labels;
  std::string pred;
  std::string out;
  std::string labels_out;
  std::string format;
  std::size_t k = 10;
  std::size_t k1 = 10;
  std::size_t k2 = 2;
  bool include_self = true;
  double alpha = 2.0;
  std::size_t layers = 1;
  bool normalize_refined = false;
  double fr0 = 0.8;
  long t0 = 800;
  long max_epoch = 1000;
  std::optional<long> epoch;
  std::size_t epochs = 5;
  std::size_t clusters = 10;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::vector<std::size_t> ks;
  std::size_t per_cluster = 100;
  std::size_t dim = 32;
  double spread = 0.25;
  double separation = 0.5;
};

FileFormat input_format(const Options& o, const std::string& path) {
  return o.format.empty() ? format_from_path(path) : parse_format(o.format);
}

EmbeddingMatrix load_embeddings(const Options& o) {
  if (o.input.empty()) throw ConfigError("--input is required");
  const Matrix raw = read_matrix(o.input, input_format(o, o.input));
  return normalize_rows(EmbeddingMatrix(raw));
}

LabelVector load_labels(const std::string& path, std::size_t expected) {
  const auto raw = read_labels(path);
  if (raw.size() != expected) {
    throw DataError(path + " holds " + std::to_string(raw.size()) + " labels, expected " +
                    std::to_string(expected));
  }
  return LabelVector::from_raw(raw);
}

NeighborConfig neighbor_config(const Options& o) {
  return NeighborConfig{o.k, o.k1, o.k2, o.include_self};
}

PropagationConfig propagation_config(const Options& o) {
  return PropagationConfig{o.alpha, o.layers, o.normalize_refined};
}

ScheduleConfig schedule_config(const Options& o) { return ScheduleConfig{o.t0, o.max_epoch, o.fr0}; }

json neighbors_json(const NeighborList& list) {
  json idx = json::array();
  json sc = json::array();
  for (std::size_t q = 0; q < list.queries(); ++q) {
    auto i = list.indices(q);
    auto s = list.scores(q);
    idx.push_back(std::vector<std::size_t>(i.begin(), i.end()));
    sc.push_back(std::vector<double>(s.begin(), s.end()));
  }
  return {{"k", list.k()},
          {"include_self", list.include_self()},
          {"space", list.space() == NeighborSpace::kConAff ? "conaff" : "feature"},
          {"indices", std::move(idx)},
          {"scores", std::move(sc)}};
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

void emit(const json& doc, const Options& o, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw DataError("cannot write " + o.out);
  f << text;
}

void add_neighbor_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--k", o.k, "retrieval neighborhood size")->capture_default_str();
  cmd->add_flag("--include-self,!--exclude-self", o.include_self,
                "keep the query in its own neighbor list (default on)");
}

void add_graph_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--k1", o.k1, "reciprocal graph neighbors")->capture_default_str();
  cmd->add_option("--k2", o.k2, "propagation edges per node")->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "edge weight exponent")->capture_default_str();
  cmd->add_option("--layers", o.layers, "propagation rounds")->capture_default_str();
  cmd->add_flag("--normalize-refined", o.normalize_refined,
                "unit-normalize refined rows before ranking");
}

void add_io_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--input", o.input, "embedding file")->required();
  cmd->add_option("--format", o.format, "input format (bin or csv; default from extension)")
      ->check(CLI::IsMember({"bin", "csv"}));
  cmd->add_option("--out", o.out, "write the JSON result here instead of stdout");
}

void add_kmeans_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--clusters", o.clusters, "number of clusters K")->capture_default_str();
  cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
  cmd->add_option("--max-iter", o.max_iter, "Lloyd iteration cap")->capture_default_str();
  cmd->add_option("--tol", o.tol, "centroid shift tolerance")->capture_default_str();
}

void add_schedule_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--fr0", o.fr0, "initial fraction ratio")->capture_default_str();
  cmd->add_option("--t0", o.t0, "epoch clustering starts")->capture_default_str();
  cmd->add_option("--max-epoch", o.max_epoch, "epoch at which the fraction reaches 1")
      ->capture_default_str();
}

int cmd_synth(const Options& o, std::ostream& out) {
  MixtureSpec spec{o.clusters, o.per_cluster, o.dim, o.spread, o.separation, o.seed};
  const SyntheticData data = generate(spec);
  const FileFormat fmt = o.format.empty() ? format_from_path(o.out) : parse_format(o.format);
  write_matrix(o.out, data.features.data(), fmt);
  if (!o.labels_out.empty()) write_labels(o.labels_out, data.labels.values());
  const auto boundary = static_cast<std::size_t>(
      std::count(data.boundary.begin(), data.boundary.end(), true));
  json summary = {{"kind", "synth"},
                  {"samples", data.features.rows()},
                  {"dim", data.features.dim()},
                  {"clusters", spec.clusters},
                  {"boundary_samples", boundary},
                  {"boundary", std::vector<bool>(data.boundary.begin(), data.boundary.end())}};
  out << summary.dump(2) << "\n";
  return 0;
}

int cmd_neighbors(const Options& o, std::ostream& out) {
  const EmbeddingMatrix f = load_embeddings(o);
  json doc = neighbors_json(topk(f, o.k, o.include_self));
  doc["kind"] = "neighbors";
  emit(doc, o, out);
  return 0;
}

int cmd_conaff(const Options& o, std::ostream& out) {
  const EmbeddingMatrix f = load_embeddings(o);
  json doc = neighbors_json(refine_and_retrieve(f, neighbor_config(o), propagation_config(o)));
  doc["kind"] = "conaff";
  doc["k1"] = o.k1;
  doc["k2"] = o.k2;
  doc["alpha"] = o.alpha;
  doc["layers"] = o.layers;
  emit(doc, o, out);
  return 0;
}

int cmd_kmeans(const Options& o, std::ostream& out) {
  const EmbeddingMatrix f = load_embeddings(o);
  const ClusterModel model = kmeans_fit(f, o.clusters, o.seed, KMeansOptions{o.max_iter, o.tol});
  json doc = {{"kind", "kmeans"},
              {"clusters", model.num_clusters()},
              {"iterations", model.iterations},
              {"inertia", model.inertia},
              {"inertia_history", model.inertia_history},
              {"assignments", model.assignments},
              {"centroids", matrix_json(model.centroids)}};
  if (!o.labels.empty()) {
    const LabelVector truth = load_labels(o.labels, f.rows());
    const MetricsReport m = evaluate_clustering(truth.values(), model.assignments);
    doc["metrics"] = {{"nmi", m.nmi}, {"acc", m.acc}, {"ari", m.ari}};
  }
  emit(doc, o, out);
  return 0;
}

int cmd_boundary(const Options& o, std::ostream& out) {
  const EmbeddingMatrix f = load_embeddings(o);
  const ScheduleConfig schedule = schedule_config(o);
  const long t = o.epoch.value_or(o.t0);
  const double fr = fraction_ratio(schedule, t);
  const ClusterModel model = kmeans_fit(f, o.clusters, o.seed, KMeansOptions{o.max_iter, o.tol});
  const auto ratios = boundary_ratios(f, model);
  const BoundaryReport rep = select_candidates(ratios, fr);
  std::vector<std::size_t> candidates, filtered;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    (rep.candidate_mask[i] ? candidates : filtered).push_back(i);
  }
  json doc = {{"kind", "boundary"}, {"epoch", t},          {"fr", fr},
              {"sigma", rep.sigma}, {"ratios", ratios},    {"candidates", candidates},
              {"filtered", filtered}, {"assignments", model.assignments}};
  emit(doc, o, out);
  return 0;
}

int cmd_purity(const Options& o, std::ostream& out) {
  const EmbeddingMatrix f = load_embeddings(o);
  if (o.labels.empty()) throw ConfigError("--labels is required");
  const LabelVector truth = load_labels(o.labels, f.rows());
  std::vector<std::size_t> ks = o.ks.empty() ? std::vector<std::size_t>{o.k} : o.ks;
  std::sort(ks.begin(), ks.end());
  const std::size_t max_k = ks.back();
  if (max_k >= f.rows()) {
    throw ConfigError("purity k=" + std::to_string(max_k) + " needs more than " +
                      std::to_string(max_k) + " samples");
  }
  NeighborConfig ncfg = neighbor_config(o);
  ncfg.k = std::min(max_k + 1, f.rows());
  ncfg.include_self = true;
  const RefinedFeatures refined = refine(f, ncfg, propagation_config(o));
  const NeighborList eu = topk(f, max_k, false);
  const NeighborList ca = conaff_neighbors(refined, ncfg.k, true, o.normalize_refined);
  json eu_curve = json::array(), ca_curve = json::array();
  for (std::size_t k : ks) {
    eu_curve.push_back({{"k", k}, {"purity", neighborhood_purity(eu, truth.values(), k)}});
    ca_curve.push_back({{"k", k}, {"purity", neighborhood_purity(ca, truth.values(), k)}});
  }
  json doc = {{"kind", "purity"}, {"euclidean", eu_curve}, {"conaff", ca_curve}};
  emit(doc, o, out);
  return 0;
}

int cmd_pipeline(const Options& o, std::ostream& out) {
  const EmbeddingMatrix f = load_embeddings(o);
  std::optional<LabelVector> labels;
  if (!o.labels.empty()) labels = load_labels(o.labels, f.rows());
  PipelineConfig cfg;
  cfg.neighbors = neighbor_config(o);
  cfg.propagation = propagation_config(o);
  cfg.schedule = schedule_config(o);
  cfg.clusters = o.clusters;
  cfg.batch_size = o.batch_size;
  cfg.seed = o.seed;
  cfg.epochs = o.epochs;
  cfg.kmeans = KMeansOptions{o.max_iter, o.tol};
  if (!o.ks.empty()) cfg.purity_ks = o.ks;
  emit(to_json(run_pipeline(f, labels, cfg)), o, out);
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto truth = read_labels(o.labels);
  const auto pred = read_labels(o.pred);
  if (truth.size() != pred.size()) {
    throw DataError("label files differ in length: " + std::to_string(truth.size()) + " vs " +
                    std::to_string(pred.size()));
  }
  const LabelVector t = LabelVector::from_raw(truth);
  const LabelVector p = LabelVector::from_raw(pred);
  const MetricsReport m = evaluate_clustering(t.values(), p.values());
  emit({{"kind", "eval"}, {"nmi", m.nmi}, {"acc", m.acc}, {"ari", m.ari}}, o, out);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neighborhood refinement toolkit for clustering embeddings"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "generate a synthetic Gaussian mixture on the sphere");
  synth->add_option("--clusters", o.clusters, "mixture components")->capture_default_str();
  synth->add_option("--per-cluster", o.per_cluster, "samples per component")->capture_default_str();
  synth->add_option("--dim", o.dim, "embedding dimension")->capture_default_str();
  synth->add_option("--spread", o.spread, "per-coordinate noise std")->capture_default_str();
  synth->add_option("--separation", o.separation, "minimum angle between means (rad)")
      ->capture_default_str();
  synth->add_option("--seed", o.seed, "random seed")->capture_default_str();
  synth->add_option("--out", o.out, "embedding output path")->required();
  synth->add_option("--labels-out", o.labels_out, "label output path");
  synth->add_option("--format", o.format, "output format (bin or csv)")
      ->check(CLI::IsMember({"bin", "csv"}));

  auto* neighbors = app.add_subcommand("neighbors", "exact cosine top-k");
  add_io_flags(neighbors, o);
  add_neighbor_flags(neighbors, o);

  auto* conaff = app.add_subcommand("conaff", "contextually affinitive neighbors");
  add_io_flags(conaff, o);
  add_neighbor_flags(conaff, o);
  add_graph_flags(conaff, o);

  auto* kmeans = app.add_subcommand("kmeans", "k-means++ / Lloyd clustering");
  add_io_flags(kmeans, o);
  add_kmeans_flags(kmeans, o);
  kmeans->add_option("--labels", o.labels, "ground-truth labels for NMI/ACC/ARI");

  auto* boundary = app.add_subcommand("boundary", "boundary ratios and candidate selection");
  add_io_flags(boundary, o);
  add_kmeans_flags(boundary, o);
  add_schedule_flags(boundary, o);
  boundary->add_option("--epoch", o.epoch, "epoch at which to evaluate the schedule (default t0)");

  auto* purity = app.add_subcommand("purity", "Euclidean vs ConAff neighborhood purity");
  add_io_flags(purity, o);
  add_neighbor_flags(purity, o);
  add_graph_flags(purity, o);
  purity->add_option("--labels", o.labels, "ground-truth labels")->required();
  purity->add_option("--ks", o.ks, "neighborhood sizes for the curve (default --k)")
      ->delimiter(',');

  auto* pipeline = app.add_subcommand("pipeline", "simulate the epoch selection loop");
  add_io_flags(pipeline, o);
  add_neighbor_flags(pipeline, o);
  add_graph_flags(pipeline, o);
  add_kmeans_flags(pipeline, o);
  add_schedule_flags(pipeline, o);
  pipeline->add_option("--labels", o.labels, "ground-truth labels");
  pipeline->add_option("--epochs", o.epochs, "epochs sampled over [t0, max-epoch]")
      ->capture_default_str();
  pipeline->add_option("--batch-size", o.batch_size, "batch size")->capture_default_str();
  pipeline->add_option("--ks", o.ks, "purity curve sizes")->delimiter(',');
  pipeline->add_option("--threads", o.threads, "worker threads (0 = all cores)")
      ->capture_default_str();

  auto* eval = app.add_subcommand("eval", "NMI, ACC and ARI between two label files");
  eval->add_option("--labels", o.labels, "ground-truth labels")->required();
  eval->add_option("--pred", o.pred, "predicted labels")->required();
  eval->add_option("--out", o.out, "write the JSON result here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    set_num_threads(o.threads);
    if (synth->parsed()) return cmd_synth(o, out);
    if (neighbors->parsed()) return cmd_neighbors(o, out);
    if (conaff->parsed()) return cmd_conaff(o, out);
    if (kmeans->parsed()) return cmd_kmeans(o, out);
    if (boundary->parsed()) return cmd_boundary(o, out);
    if (purity->parsed()) return cmd_purity(o, out);
    if (pipeline->parsed()) return cmd_pipeline(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == Error::Kind::kData ? 2 : 1;
  }
  return 1;
}

}  // namespace nbr::cli
