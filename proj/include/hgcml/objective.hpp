#pragma once

#include <memory>
#include <vector>

#include "hgcml/augment.hpp"
#include "hgcml/model.hpp"
#include "hgcml/positives.hpp"

namespace hgcml {

struct ObjectiveConfig {
  double tau = 0.5;
  /// Use the second corruption's embeddings verbatim as node-graph negatives
  /// for intra-metapath pairs instead of a feature-shuffled encoding.
  bool literal_eq2 = false;
  double local_weight = 1.0;
  double global_weight = 1.0;

  void validate() const;
};

/// Membership masks of the positive sets, built once per training run.
struct PositiveMasks {
  std::shared_ptr<const RowMask> positive;
  std::shared_ptr<const RowMask> negative;

  static PositiveMasks from(const PositiveSets& sets);
};

/// Multi-positive InfoNCE over already-projected rows, averaged over anchors:
/// -log( sum_{P_u} th(z^m_u, z^n_v) / (sum_{V} th(z^m_u, z^n_v) + sum_{V\P_u} th(z^m_u, z^m_v)) )
/// with th = exp(cos / tau), evaluated in log-sum-exp form.
Var node_node_loss(Var z_m, Var z_n, const PositiveMasks& masks, double tau);
Var node_node_loss(Var z_m, Var z_n, const PositiveSets& positives, double tau);

/// Mean over nodes of -log D(h_u^m, s) - log(1 - D(h_u^neg, s)).
Var node_graph_loss(Var h_m, Var h_neg, Var summary, const ProjectorVars& proj, Var bilinear_weight);

/// Two corruptions of every view plus the shuffled-feature encoding input used
/// as node-graph negatives for intra-metapath pairs.
struct TrainingSample {
  struct ViewInputs {
    GraphInput first;
    GraphInput second;
    GraphInput shuffled;
  };
  std::vector<ViewInputs> views;
};

/// Draws one sample from uncorrupted views. Deterministic in (views, cfg, seed, round).
TrainingSample draw_sample(const std::vector<MetapathView>& views, const CorruptionConfig& cfg, std::uint64_t seed,
                           std::uint64_t round);

struct PairTerm {
  std::size_t m = 0;
  std::size_t n = 0;
  bool intra = false;
  Var local;
  Var global;
};

struct ObjectiveTerms {
  Var total;
  std::vector<PairTerm> pairs;  // lexicographic (m, n)
};

/// Sum over ordered view pairs of weighted node-node and node-graph losses; minimized.
ObjectiveTerms total_objective(Tape& tape, Model& model, const TrainingSample& sample, const PositiveMasks& masks,
                               const ObjectiveConfig& cfg);

}  // namespace hgcml
