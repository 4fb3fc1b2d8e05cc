#include "hgcml/augment.hpp"

#include <algorithm>

#include "hgcml/error.hpp"

namespace hgcml {

void CorruptionConfig::validate() const {
  if (!(p_e >= 0.0 && p_e <= 1.0)) throw Error(ErrorKind::Config, "p_e must lie in [0, 1]");
  if (!(p_f >= 0.0 && p_f <= 1.0)) throw Error(ErrorKind::Config, "p_f must lie in [0, 1]");
}

MetapathView drop_edges(const MetapathView& view, double p_e, Rng& rng) {
  const SparseMatrix& a = view.adjacency;
  std::vector<Edge> kept;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (auto j : a.row_cols(i))
      if (j > i && !rng.bernoulli(p_e)) kept.push_back({static_cast<std::uint32_t>(i), j});
  MetapathView out;
  out.name = view.name;
  out.features = view.features;
  out.adjacency = symmetric_adjacency(a.rows(), kept);
  return out;
}

MetapathView mask_features(const MetapathView& view, double p_f, Rng& rng, MaskMode mode) {
  Matrix x = *view.features;
  if (mode == MaskMode::Columns) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (!rng.bernoulli(p_f)) continue;
      for (std::size_t r = 0; r < x.rows(); ++r) x(r, c) = 0.0;
    }
  } else {
    for (double& v : x.data())
      if (rng.bernoulli(p_f)) v = 0.0;
  }
  MetapathView out;
  out.name = view.name;
  out.adjacency = view.adjacency;
  out.features = std::make_shared<const Matrix>(std::move(x));
  return out;
}

MetapathView corrupt(const MetapathView& view, const CorruptionConfig& cfg) {
  cfg.validate();
  const Rng root(cfg.seed);
  Rng edge_rng = root.substream("edges");
  Rng feature_rng = root.substream("features");
  MetapathView out = drop_edges(view, cfg.p_e, edge_rng);
  return mask_features(out, cfg.p_f, feature_rng, cfg.mask_mode);
}

}  // namespace hgcml
