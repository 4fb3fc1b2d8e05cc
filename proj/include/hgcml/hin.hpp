#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hgcml/matrix.hpp"

namespace hgcml {

using TypeId = std::uint32_t;
using RelationId = std::uint32_t;

struct RelationDecl {
  std::string name;
  TypeId src_type = 0;
  TypeId dst_type = 0;
};

/// Node types, typed relations and the target type. Ids are positions in the vectors.
struct Schema {
  std::vector<std::string> node_types;
  std::vector<RelationDecl> relations;
  TypeId target_type = 0;

  struct RelationByName {
    std::string name;
    std::string src;
    std::string dst;
  };
  static Schema make(const std::vector<std::string>& node_types, const std::vector<RelationByName>& relations,
                     const std::string& target_type);

  TypeId type_id(const std::string& name) const;
  RelationId relation_id(const std::string& name) const;
  /// Throws Config unless ids are in range and |T| + |R| > 2.
  void validate() const;
};

/// Edge between two nodes, each given by its index within its own type.
struct Edge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
};

/// Heterogeneous information network. Node ids are dense per type; target-type
/// nodes are 0..N_t-1 in input order.
struct Hin {
  Schema schema;
  /// Per type: local index -> id used in the input files.
  std::vector<std::vector<std::int64_t>> external_ids;
  /// Per relation: edges in input order (multi-edges kept).
  std::vector<std::vector<Edge>> edges;
  /// N_t x d_in, target-type nodes only.
  std::shared_ptr<const Matrix> features;
  /// Per target node; -1 when unlabeled. Empty when no label file was given.
  std::vector<int> labels;

  std::size_t num_nodes(TypeId type) const { return external_ids.at(type).size(); }
  std::size_t num_targets() const { return num_nodes(schema.target_type); }
  std::size_t num_edges() const;
  bool has_labels() const { return !labels.empty(); }

  /// Checks every structural invariant; throws the matching Error.
  void validate() const;
};

struct HinFiles {
  std::filesystem::path nodes;
  std::filesystem::path edges;
  std::filesystem::path features;
  std::optional<std::filesystem::path> labels;
};

/// Parses nodes.tsv / edges.tsv / features (HGF1 binary or TSV) / labels.tsv.
Hin load_hin(const HinFiles& files, const Schema& schema);

/// One hop of a metapath; `reversed` walks the relation from dst type to src type.
struct MetapathStep {
  RelationId relation = 0;
  bool reversed = false;
};

struct MetapathSpec {
  std::string name;
  std::vector<MetapathStep> steps;

  /// Steps are relation names; a leading '~' walks the relation backwards (e.g. {"AP", "~AP"}).
  /// Type-checks the result.
  static MetapathSpec parse(const Schema& schema, const std::string& name, const std::vector<std::string>& steps);
  std::vector<std::string> step_names(const Schema& schema) const;
  bool is_palindromic(const Schema& schema) const;
  /// Throws TypeChainBroken unless the chain starts and ends at the target type.
  void type_check(const Schema& schema) const;
};

/// Homogeneous view over target nodes induced by a metapath.
struct MetapathView {
  std::string name;
  /// Symmetric, binary, zero diagonal, N_t x N_t.
  SparseMatrix adjacency;
  std::shared_ptr<const Matrix> features;
  std::vector<std::string> warnings;

  std::size_t num_nodes() const { return adjacency.rows(); }
  std::size_t num_edges() const { return adjacency.nnz() / 2; }
  void validate() const;
};

MetapathView extract_metapath_view(const Hin& hin, const MetapathSpec& spec);

/// Binary symmetric zero-diagonal adjacency from an undirected edge list.
SparseMatrix symmetric_adjacency(std::size_t n, const std::vector<Edge>& edges);

}  // namespace hgcml
