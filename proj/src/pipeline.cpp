#include "hgcml/pipeline.hpp"

#include <fstream>
#include <ostream>

#include "hgcml/binio.hpp"
#include "hgcml/error.hpp"
#include "hgcml/parallel.hpp"
#include "hgcml/params.hpp"

namespace hgcml {

namespace {

std::filesystem::path ensure_output_dir(const RunConfig& cfg) {
  const auto dir = cfg.output_dir();
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::string> view_names(const RunConfig& cfg) {
  std::vector<std::string> names;
  for (const auto& m : cfg.metapaths) names.push_back(m.name);
  return names;
}

}  // namespace

PreparedData prepare_data(const RunConfig& cfg, std::ostream& log) {
  PreparedData data;
  const Schema schema = cfg.build_schema();
  data.metapaths = cfg.build_metapaths(schema);
  data.hin = load_hin(cfg.files(), schema);
  data.views.resize(data.metapaths.size());
  parallel_for(data.metapaths.size(),
               [&](std::size_t m) { data.views[m] = extract_metapath_view(data.hin, data.metapaths[m]); });
  for (const auto& v : data.views)
    for (const auto& w : v.warnings) log << "warning: " << w << '\n';
  return data;
}

PositiveSets compute_positives(const RunConfig& cfg, const PreparedData& data) {
  const auto& p = cfg.positives;
  std::vector<DiffusionMatrix> diffusions(data.views.size());
  parallel_for(data.views.size(),
               [&](std::size_t m) { diffusions[m] = ppr_matrix(data.views[m], p.alpha, p.tol, p.max_iter); });
  if (p.cache_ppr) {
    const auto dir = ensure_output_dir(cfg);
    for (const auto& d : diffusions) write_hgf1(dir / ("ppr_" + d.metapath + ".bin"), d.values);
  }
  return select_positives(topology_similarity(diffusions), semantic_similarity(*data.hin.features), p.k_t, p.k_s);
}

void cmd_prepare(const RunConfig& cfg, std::ostream& log) {
  const PreparedData data = prepare_data(cfg, log);
  const auto dir = ensure_output_dir(cfg);
  std::filesystem::create_directories(dir / "views");
  std::ofstream summary(dir / kSummaryFile, std::ios::trunc);
  if (!summary) throw Error(ErrorKind::Io, "cannot write " + (dir / kSummaryFile).string());
  log << "nodes: " << data.hin.num_targets() << " target, edges: " << data.hin.num_edges() << '\n';
  for (const auto& view : data.views) {
    const auto path = dir / "views" / (view.name + ".tsv");
    {
      std::ofstream out(path, std::ios::trunc);
      if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
      for (std::size_t i = 0; i < view.num_nodes(); ++i)
        for (auto j : view.adjacency.row_cols(i))
          if (j > i) out << i << '\t' << j << '\n';
    }
    const std::string digest = file_digest(path);
    summary << view.name << '\t' << view.num_nodes() << '\t' << view.num_edges() << '\t' << digest << '\n';
    log << "view " << view.name << ": " << view.num_nodes() << " nodes, " << view.num_edges() << " edges, digest "
        << digest << '\n';
  }
}

void cmd_positives(const RunConfig& cfg, std::ostream& log) {
  const PreparedData data = prepare_data(cfg, log);
  const PositiveSets sets = compute_positives(cfg, data);
  const auto path = ensure_output_dir(cfg) / kPositivesFile;
  write_positives(path, sets);
  std::size_t total = 0;
  for (const auto& p : sets.positives) total += p.size();
  log << "positives: " << sets.num_nodes() << " anchors, mean set size "
      << (sets.num_nodes() ? static_cast<double>(total) / static_cast<double>(sets.num_nodes()) : 0.0) << " -> "
      << path.string() << '\n';
}

TrainResult cmd_train(const RunConfig& cfg, std::ostream& log) {
  for (const auto& w : cfg.grid_warnings()) log << "warning: " << w << '\n';
  const PreparedData data = prepare_data(cfg, log);
  const auto dir = ensure_output_dir(cfg);
  const auto positives_path = dir / kPositivesFile;
  PositiveSets positives;
  if (std::filesystem::exists(positives_path)) {
    positives = read_positives(positives_path, data.hin.num_targets());
  } else {
    log << "no " << kPositivesFile << " in " << dir.string() << "; computing it now\n";
    positives = compute_positives(cfg, data);
    write_positives(positives_path, positives);
  }

  TrainResult result = train(data.views, positives, cfg.train_config(), [&log](std::size_t epoch, double loss) {
    if (epoch % 10 == 0) log << "epoch " << epoch << " loss " << loss << '\n';
  });
  save_checkpoint(dir / kCheckpointFile, result.model.params());
  write_trace(dir / kTraceFile, result.trace);
  log << "best loss " << result.best_loss << " at epoch " << result.best_epoch << " of " << result.trace.size()
      << (result.early_stopped ? " (early stop)" : "") << '\n';
  if (result.diverged)
    throw Error(ErrorKind::DivergedLoss, "training diverged after epoch " + std::to_string(result.trace.size()) +
                                             "; best checkpoint written to " + (dir / kCheckpointFile).string());
  return result;
}

void cmd_embed(const RunConfig& cfg, std::ostream& log) {
  const PreparedData data = prepare_data(cfg, log);
  const auto dir = ensure_output_dir(cfg);
  Model model(cfg.model, view_names(cfg), load_checkpoint(dir / kCheckpointFile));
  const Matrix embeddings = export_embeddings(model, data.views);
  write_hgf1(dir / kEmbeddingsFile, embeddings);
  log << "embeddings: " << embeddings.rows() << " x " << embeddings.cols() << " -> "
      << (dir / kEmbeddingsFile).string() << '\n';
}

EvalReport cmd_eval(const RunConfig& cfg, std::ostream& log) {
  const Schema schema = cfg.build_schema();
  const Hin hin = load_hin(cfg.files(), schema);
  if (!hin.has_labels()) throw Error(ErrorKind::Config, "evaluation needs data.labels");
  const auto dir = ensure_output_dir(cfg);
  const Matrix embeddings = read_hgf1(dir / kEmbeddingsFile);
  if (embeddings.rows() != hin.num_targets())
    throw Error(ErrorKind::ShapeMismatch, "embedding rows do not match the number of target nodes");
  const EvalReport report = evaluate(embeddings, hin.labels, cfg.eval_config());
  write_report(dir / kReportFile, report);
  log << "micro_f1 " << report.micro_f1.mean << " +- " << report.micro_f1.std << ", nmi " << report.nmi.mean << " +- "
      << report.nmi.std << '\n';
  return report;
}

RunConfig cmd_synth(const SynthConfig& synth, const std::filesystem::path& dir, std::ostream& log) {
  const SynthDataset ds = make_synthetic(synth);
  write_dataset(ds.hin, dir);

  RunConfig cfg;
  cfg.data.labels = "labels.tsv";
  const Schema& s = ds.hin.schema;
  cfg.schema.node_types = s.node_types;
  for (const auto& r : s.relations) cfg.schema.relations.push_back({r.name, s.node_types[r.src_type], s.node_types[r.dst_type]});
  cfg.schema.target_type = s.node_types[s.target_type];
  for (std::size_t m = 0; m < ds.metapaths.size(); ++m) cfg.metapaths.push_back({ds.metapaths[m].name, ds.metapath_steps[m]});
  cfg.seed = synth.seed;
  cfg.base_dir = dir;
  save_config(dir / "config.json", cfg);
  log << "synthetic HIN: " << ds.hin.num_targets() << " target nodes, " << ds.hin.num_edges() << " edges, "
      << ds.metapaths.size() << " metapaths -> " << dir.string() << '\n';
  return cfg;
}

}  // namespace hgcml
