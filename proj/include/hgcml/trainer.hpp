#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "hgcml/augment.hpp"
#include "hgcml/model.hpp"
#include "hgcml/objective.hpp"
#include "hgcml/positives.hpp"

namespace hgcml {

struct TrainConfig {
  double lr = 1e-3;
  std::size_t patience = 20;
  std::size_t max_epochs = 500;
  /// Smallest loss decrease that resets the patience counter.
  double min_delta = 1e-6;
  bool resample_every_epoch = true;
  CorruptionConfig corruption;
  ObjectiveConfig objective;
  ModelConfig model;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  Model model;             // parameters of the best epoch
  std::vector<double> trace;
  std::size_t best_epoch = 0;
  double best_loss = 0.0;
  bool diverged = false;
  bool early_stopped = false;
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Full-batch training. Each epoch's loss is measured before its Adam step, so
/// the retained model reproduces min(trace).
TrainResult train(const std::vector<MetapathView>& views, const PositiveSets& positives, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Fused embeddings of the uncorrupted views.
Matrix export_embeddings(const Model& model, const std::vector<MetapathView>& views);
Matrix export_embeddings(const Model& model, const std::vector<MetapathView>& views, FusionMode mode);

/// trace.tsv: `epoch<TAB>loss`.
void write_trace(const std::filesystem::path& path, const std::vector<double>& trace);
std::vector<double> read_trace(const std::filesystem::path& path);

}  // namespace hgcml
