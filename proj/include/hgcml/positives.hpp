#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hgcml/autodiff.hpp"
#include "hgcml/hin.hpp"

namespace hgcml {

/// Truncated personalized PageRank diffusion of one view.
struct DiffusionMatrix {
  std::string metapath;
  double alpha = 0.85;
  Matrix values;
  /// Index K of the last series term that was added.
  std::size_t iterations = 0;
  /// Entrywise bound on the dropped tail, (1 - alpha)^(K + 1).
  double error_bound = 0.0;
  bool converged = true;
};

/// S = sum_{k=0..K} alpha (1 - alpha)^k (A D^-1)^k, stopping once the newest
/// term's max-abs entry drops below `tol` or K reaches `max_iter`.
/// A zero-degree node's column of A D^-1 is its own indicator.
DiffusionMatrix ppr_matrix(const MetapathView& view, double alpha = 0.85, double tol = 1e-6, std::size_t max_iter = 100);

/// Elementwise sum of per-view diffusions.
Matrix topology_similarity(const std::vector<DiffusionMatrix>& diffusions);

/// sim[i][j] = -||x_i - x_j||_2.
Matrix semantic_similarity(const Matrix& x);

struct PositiveSets {
  std::size_t k_t = 0;
  std::size_t k_s = 0;
  /// Per node, sorted: {u} + topology + semantic.
  std::vector<std::vector<std::uint32_t>> positives;
  std::vector<std::vector<std::uint32_t>> topology;
  std::vector<std::vector<std::uint32_t>> semantic;

  std::size_t num_nodes() const { return positives.size(); }
  bool contains(std::size_t u, std::size_t v) const;
  /// mask(u, v) = v in P_u.
  RowMask mask() const;
  void validate() const;

  static PositiveSets anchors_only(std::size_t n);
};

/// Top-k per row excluding the anchor; ties go to the smaller node id.
PositiveSets select_positives(const Matrix& sim_t, const Matrix& sim_s, std::size_t k_t, std::size_t k_s);

/// Top-k column ids of row u (excluding u), ordered by descending score then id.
std::vector<std::uint32_t> top_k_excluding(const Matrix& sim, std::size_t u, std::size_t k);

/// positives.tsv: `node<TAB>id,id,...` with ascending ids.
void write_positives(const std::filesystem::path& path, const PositiveSets& sets);
PositiveSets read_positives(const std::filesystem::path& path, std::size_t num_nodes);

}  // namespace hgcml
