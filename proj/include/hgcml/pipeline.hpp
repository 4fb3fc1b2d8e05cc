#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hgcml/config.hpp"
#include "hgcml/eval.hpp"
#include "hgcml/hin.hpp"
#include "hgcml/positives.hpp"
#include "hgcml/synth.hpp"
#include "hgcml/trainer.hpp"

namespace hgcml {

// Output files, all inside RunConfig::output_dir().
inline constexpr const char* kPositivesFile = "positives.tsv";
inline constexpr const char* kCheckpointFile = "model.bin";
inline constexpr const char* kTraceFile = "trace.tsv";
inline constexpr const char* kEmbeddingsFile = "embeddings.bin";
inline constexpr const char* kReportFile = "report.tsv";
inline constexpr const char* kSummaryFile = "summary.tsv";

struct PreparedData {
  Hin hin;
  std::vector<MetapathSpec> metapaths;
  std::vector<MetapathView> views;
};

/// Loads the network and extracts one view per configured metapath.
PreparedData prepare_data(const RunConfig& cfg, std::ostream& log);

/// Sampled positives from per-view PPR plus feature distance.
PositiveSets compute_positives(const RunConfig& cfg, const PreparedData& data);

/// Writes views/<metapath>.tsv (`i<TAB>j`, i < j) and summary.tsv (`view<TAB>nodes<TAB>edges<TAB>digest`).
void cmd_prepare(const RunConfig& cfg, std::ostream& log);
void cmd_positives(const RunConfig& cfg, std::ostream& log);
/// Writes model.bin and trace.tsv. On divergence the best checkpoint is still
/// written and DivergedLoss is thrown.
TrainResult cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_embed(const RunConfig& cfg, std::ostream& log);
EvalReport cmd_eval(const RunConfig& cfg, std::ostream& log);
/// Writes a synthetic dataset plus a ready-to-run config.json into `dir`.
RunConfig cmd_synth(const SynthConfig& synth, const std::filesystem::path& dir, std::ostream& log);

}  // namespace hgcml
