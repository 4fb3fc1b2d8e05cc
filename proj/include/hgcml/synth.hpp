#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hgcml/hin.hpp"

namespace hgcml {

/// Planted-block HIN: target nodes split into equal blocks; each metapath
/// "A<X>A" gets one auxiliary X node per sampled target pair, so the view of
/// that metapath is exactly a stochastic block model draw.
struct SynthConfig {
  std::size_t blocks = 3;
  std::size_t block_size = 30;
  std::size_t metapaths = 2;
  double p_intra = 0.3;
  double p_inter = 0.02;
  std::size_t feature_dim = 32;
  /// Added to the dimensions owned by a node's block (dimension c belongs to block c % blocks).
  double feature_shift = 1.0;
  double feature_noise = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthDataset {
  Hin hin;
  std::vector<MetapathSpec> metapaths;
  /// Relation step names per metapath, as they appear in a run config.
  std::vector<std::vector<std::string>> metapath_steps;
};

SynthDataset make_synthetic(const SynthConfig& cfg);

/// Writes nodes.tsv, edges.tsv, features.bin (HGF1) and labels.tsv into `dir`.
void write_dataset(const Hin& hin, const std::filesystem::path& dir);

}  // namespace hgcml
