#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgcml/augment.hpp"
#include "hgcml/eval.hpp"
#include "hgcml/hin.hpp"
#include "hgcml/model.hpp"
#include "hgcml/objective.hpp"
#include "hgcml/trainer.hpp"

namespace hgcml {

/// Everything one pipeline run needs. Loaded from a JSON document; unknown
/// keys are rejected and every omitted key takes its default.
struct RunConfig {
  struct Data {
    std::string nodes = "nodes.tsv";
    std::string edges = "edges.tsv";
    std::string features = "features.bin";
    std::string labels;  // empty: no labels
  } data;

  struct SchemaSection {
    std::vector<std::string> node_types;
    std::vector<Schema::RelationByName> relations;
    std::string target_type;
  } schema;

  struct Metapath {
    std::string name;
    std::vector<std::string> relations;
  };
  std::vector<Metapath> metapaths;

  struct Augment {
    double p_e = 0.3;
    double p_f = 0.3;
    MaskMode mask_mode = MaskMode::Columns;
    bool resample_every_epoch = true;
  } augment;

  struct Positives {
    double alpha = 0.85;
    double tol = 1e-6;
    std::size_t max_iter = 100;
    std::size_t k_t = 8;
    std::size_t k_s = 8;
    bool cache_ppr = false;
  } positives;

  ModelConfig model;
  ObjectiveConfig objective;

  struct Train {
    double lr = 1e-3;
    std::size_t patience = 20;
    std::size_t max_epochs = 500;
    double min_delta = 1e-6;
  } train;

  struct Eval {
    double train_frac = 0.2;
    std::size_t probe_runs = 10;
    std::size_t probe_epochs = 300;
    double probe_lr = 1e-2;
    std::size_t kmeans_runs = 10;
  } eval;

  std::uint64_t seed = 0;
  std::string out_dir = "run";

  /// Directory relative paths are resolved against (the config file's directory).
  std::filesystem::path base_dir;

  Schema build_schema() const;
  std::vector<MetapathSpec> build_metapaths(const Schema& schema) const;
  HinFiles files() const;
  std::filesystem::path output_dir() const;
  TrainConfig train_config() const;
  EvalConfig eval_config() const;

  /// Values outside the tuning grids documented for each hyperparameter.
  std::vector<std::string> grid_warnings() const;
};

RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& cfg);

}  // namespace hgcml
