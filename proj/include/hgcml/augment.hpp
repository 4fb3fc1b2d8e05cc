#pragma once

#include <cstdint>

#include "hgcml/hin.hpp"
#include "hgcml/rng.hpp"

namespace hgcml {

enum class MaskMode { Columns, Entries };

struct CorruptionConfig {
  double p_e = 0.3;
  double p_f = 0.3;
  MaskMode mask_mode = MaskMode::Columns;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Each undirected edge is one Bernoulli(p_e) removal trial.
MetapathView drop_edges(const MetapathView& view, double p_e, Rng& rng);

/// Columns mode zeroes whole feature dimensions; Entries mode zeroes single entries.
MetapathView mask_features(const MetapathView& view, double p_f, Rng& rng, MaskMode mode = MaskMode::Columns);

/// drop_edges then mask_features, each on its own substream of cfg.seed.
MetapathView corrupt(const MetapathView& view, const CorruptionConfig& cfg);

}  // namespace hgcml
