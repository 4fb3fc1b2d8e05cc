#pragma once

// Small graphs and brute-force oracles shared by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hgcml/hin.hpp"
#include "hgcml/matrix.hpp"
#include "hgcml/model.hpp"
#include "hgcml/positives.hpp"
#include "hgcml/rng.hpp"

namespace hgcml::testing {

inline MetapathView make_view(std::size_t n, const std::vector<Edge>& edges, Matrix features,
                              std::string name = "V") {
  MetapathView v;
  v.name = std::move(name);
  v.adjacency = symmetric_adjacency(n, edges);
  v.features = std::make_shared<const Matrix>(std::move(features));
  return v;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (auto& x : m.data()) x = rng.uniform(lo, hi);
  return m;
}

inline std::vector<Edge> random_edges(std::size_t n, double p, Rng& rng) {
  std::vector<Edge> edges;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) edges.push_back({i, j});
  return edges;
}

/// Closed-form PPR: alpha (I - (1 - alpha) P)^-1 with P = A D^-1, dangling
/// columns replaced by self-indicators.
inline Matrix ppr_closed_form(const SparseMatrix& a, double alpha) {
  const auto n = static_cast<Eigen::Index>(a.rows());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  const Matrix dense = a.to_dense();
  for (Eigen::Index j = 0; j < n; ++j) {
    double deg = 0;
    for (Eigen::Index i = 0; i < n; ++i) deg += dense(i, j);
    if (deg == 0) {
      p(j, j) = 1.0;
      continue;
    }
    for (Eigen::Index i = 0; i < n; ++i) p(i, j) = dense(i, j) / deg;
  }
  const Eigen::MatrixXd s =
      alpha * (Eigen::MatrixXd::Identity(n, n) - (1.0 - alpha) * p).inverse();
  Matrix out(a.rows(), a.rows());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = s(i, j);
  return out;
}

/// Random typed graph: 2-4 types (type 0 is the target), 2-5 relations, at
/// most `max_nodes` nodes in total.
inline Hin random_hin(Rng& rng, std::size_t max_nodes = 50) {
  const std::size_t num_types = 2 + rng.below(3);
  std::vector<std::string> types;
  for (std::size_t t = 0; t < num_types; ++t) types.push_back("T" + std::to_string(t));
  const std::size_t num_rel = 2 + rng.below(4);
  std::vector<Schema::RelationByName> rels;
  for (std::size_t r = 0; r < num_rel; ++r) {
    // First relation always touches the target type so metapaths exist.
    const std::size_t s = r == 0 ? 0 : rng.below(num_types);
    const std::size_t d = r == 0 ? 1 : rng.below(num_types);
    rels.push_back({"R" + std::to_string(r), types[s], types[d]});
  }
  Hin hin;
  hin.schema = Schema::make(types, rels, types[0]);
  hin.external_ids.resize(num_types);
  std::int64_t next = 0;
  const std::size_t per_type = std::max<std::size_t>(1, max_nodes / num_types);
  for (std::size_t t = 0; t < num_types; ++t) {
    const std::size_t count = 1 + rng.below(per_type);
    for (std::size_t i = 0; i < count; ++i) hin.external_ids[t].push_back(next++);
  }
  hin.edges.resize(num_rel);
  const double density = rng.uniform(0.05, 0.4);
  for (std::size_t r = 0; r < num_rel; ++r) {
    const auto& decl = hin.schema.relations[r];
    for (std::uint32_t i = 0; i < hin.num_nodes(decl.src_type); ++i)
      for (std::uint32_t j = 0; j < hin.num_nodes(decl.dst_type); ++j)
        if (rng.bernoulli(density)) hin.edges[r].push_back({i, j});
  }
  hin.features = std::make_shared<const Matrix>(random_matrix(hin.num_targets(), 3, rng));
  return hin;
}

/// Random walk over the relation graph from the target type, retried until it
/// closes back at the target. Returns step names ("R1", "~R0", ...).
inline std::vector<std::string> random_metapath(const Hin& hin, Rng& rng) {
  const Schema& s = hin.schema;
  for (int attempt = 0; attempt < 200; ++attempt) {
    const std::size_t len = 1 + rng.below(4);
    std::vector<std::string> steps;
    TypeId at = s.target_type;
    bool stuck = false;
    for (std::size_t k = 0; k < len && !stuck; ++k) {
      std::vector<std::pair<std::size_t, bool>> options;
      for (std::size_t r = 0; r < s.relations.size(); ++r) {
        if (s.relations[r].src_type == at) options.push_back({r, false});
        if (s.relations[r].dst_type == at) options.push_back({r, true});
      }
      if (options.empty()) {
        stuck = true;
        break;
      }
      const auto [r, rev] = options[rng.below(options.size())];
      steps.push_back((rev ? "~" : "") + s.relations[r].name);
      at = rev ? s.relations[r].src_type : s.relations[r].dst_type;
    }
    if (!stuck && at == s.target_type) return steps;
  }
  return {"R0", "~R0"};
}

/// Endpoint pairs (i != j) of every path instance, found by depth-first
/// enumeration over raw edges, then symmetrized.
inline std::set<std::pair<std::uint32_t, std::uint32_t>> enumerate_metapath_pairs(const Hin& hin,
                                                                                   const MetapathSpec& spec) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  const auto walk = [&](auto&& self, std::uint32_t start, std::uint32_t node, std::size_t depth) -> void {
    if (depth == spec.steps.size()) {
      if (node != start) {
        pairs.insert({start, node});
        pairs.insert({node, start});
      }
      return;
    }
    const MetapathStep step = spec.steps[depth];
    for (const Edge& e : hin.edges[step.relation]) {
      if (!step.reversed && e.src == node) self(self, start, e.dst, depth + 1);
      if (step.reversed && e.dst == node) self(self, start, e.src, depth + 1);
    }
  };
  for (std::uint32_t u = 0; u < hin.num_targets(); ++u) walk(walk, u, u, 0);
  return pairs;
}

inline std::set<std::pair<std::uint32_t, std::uint32_t>> adjacency_pairs(const SparseMatrix& a) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::uint32_t i = 0; i < a.rows(); ++i)
    for (auto j : a.row_cols(i)) pairs.insert({i, j});
  return pairs;
}

/// Toy bibliographic network: 4 authors, 5 papers, 2 subjects, 2 conferences.
/// Author 1 shares paper p1 with author 2 only.
struct ToyFiles {
  std::filesystem::path dir;
  std::filesystem::path nodes, edges, features, labels;
};

inline Schema toy_schema() {
  return Schema::make({"A", "P", "S", "C"}, {{"AP", "A", "P"}, {"PS", "P", "S"}, {"PC", "P", "C"}}, "A");
}

inline ToyFiles write_toy_files(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  ToyFiles f{dir, dir / "nodes.tsv", dir / "edges.tsv", dir / "features.tsv", dir / "labels.tsv"};
  std::ofstream(f.nodes) << "1\tA\n2\tA\n3\tA\n4\tA\n"
                            "11\tP\n12\tP\n13\tP\n14\tP\n15\tP\n"
                            "21\tS\n22\tS\n31\tC\n32\tC\n";
  std::ofstream(f.edges) << "1\t11\tAP\n2\t11\tAP\n2\t12\tAP\n3\t13\tAP\n3\t14\tAP\n4\t15\tAP\n"
                            "11\t21\tPS\n12\t21\tPS\n13\t22\tPS\n14\t22\tPS\n15\t21\tPS\n"
                            "11\t31\tPC\n12\t32\tPC\n13\t32\tPC\n14\t31\tPC\n15\t32\tPC\n";
  std::ofstream(f.features) << "1\t1,0,0\n2\t0,1,0\n3\t0,0,1\n4\t1,1,0\n";
  std::ofstream(f.labels) << "1\t0\n2\t0\n3\t1\n4\t1\n";
  return f;
}

// Six target nodes, two metapath views, three-dimensional embeddings.
struct SixNode {
  std::vector<MetapathView> views;
  PositiveSets positives;
  Model model;

  static SixNode make(std::uint64_t seed, std::size_t num_views = 2) {
    Rng rng(seed);
    const Matrix x = random_matrix(6, 4, rng, -1.0, 1.0);
    std::vector<MetapathView> views{make_view(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {2, 3}}, x, "APA"),
                                    make_view(6, {{0, 3}, {1, 4}, {2, 5}, {0, 5}, {1, 2}}, x, "APSPA")};
    views.resize(num_views);
    std::vector<std::string> names;
    for (const auto& v : views) names.push_back(v.name);
    auto positives = select_positives(random_matrix(6, 6, rng), semantic_similarity(x), 1, 1);
    Rng init = rng.substream("init");
    Model model({3, false, FusionMode::Sum}, names, 4, init);
    // Nonzero biases keep projected rows away from the origin even where the
    // GCN output is all zero, so every cosine is differentiable.
    model.params().at("proj.b1").value = random_matrix(1, 3, rng, 0.2, 0.6);
    model.params().at("proj.b2").value = random_matrix(1, 3, rng, 0.2, 0.6);
    return {views, positives, std::move(model)};
  }
};

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hgcml_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace hgcml::testing
