#include "hgcml/hin.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>
#include <unordered_map>

#include "hgcml/binio.hpp"
#include "hgcml/error.hpp"

namespace hgcml {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

[[noreturn]] void malformed(const std::filesystem::path& file, std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::MalformedRecord, file.string() + ":" + std::to_string(line_no) + ": " + what);
}

/// Calls fn(fields, line_no) for every non-empty line.
template <typename Fn>
void for_each_record(const std::filesystem::path& file, Fn fn) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + file.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim_cr(line);
    if (view.empty()) continue;
    fn(split(view, '\t'), line_no);
  }
}

struct NodeRef {
  TypeId type;
  std::uint32_t local;
};

}  // namespace

Schema Schema::make(const std::vector<std::string>& node_types, const std::vector<RelationByName>& relations,
                    const std::string& target_type) {
  Schema s;
  s.node_types = node_types;
  for (std::size_t i = 0; i < node_types.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (node_types[i] == node_types[j]) throw Error(ErrorKind::Config, "duplicate node type " + node_types[i]);
  for (const auto& r : relations) {
    for (const auto& existing : s.relations)
      if (existing.name == r.name) throw Error(ErrorKind::Config, "duplicate relation " + r.name);
    s.relations.push_back({r.name, s.type_id(r.src), s.type_id(r.dst)});
  }
  s.target_type = s.type_id(target_type);
  s.validate();
  return s;
}

TypeId Schema::type_id(const std::string& name) const {
  for (std::size_t i = 0; i < node_types.size(); ++i)
    if (node_types[i] == name) return static_cast<TypeId>(i);
  throw Error(ErrorKind::UnknownType, "node type '" + name + "'");
}

RelationId Schema::relation_id(const std::string& name) const {
  for (std::size_t i = 0; i < relations.size(); ++i)
    if (relations[i].name == name) return static_cast<RelationId>(i);
  throw Error(ErrorKind::UnknownRelation, "relation '" + name + "'");
}

void Schema::validate() const {
  if (node_types.size() + relations.size() <= 2)
    throw Error(ErrorKind::Config, "a heterogeneous network needs |types| + |relations| > 2");
  if (target_type >= node_types.size()) throw Error(ErrorKind::Config, "target type out of range");
  for (const auto& r : relations)
    if (r.src_type >= node_types.size() || r.dst_type >= node_types.size())
      throw Error(ErrorKind::Config, "relation " + r.name + " references an undeclared type");
}

std::size_t Hin::num_edges() const {
  std::size_t n = 0;
  for (const auto& e : edges) n += e.size();
  return n;
}

void Hin::validate() const {
  schema.validate();
  if (external_ids.size() != schema.node_types.size())
    throw Error(ErrorKind::ShapeMismatch, "external id table does not cover every node type");
  if (edges.size() != schema.relations.size())
    throw Error(ErrorKind::ShapeMismatch, "edge table does not cover every relation");
  for (std::size_t r = 0; r < edges.size(); ++r) {
    const auto& decl = schema.relations[r];
    for (const Edge& e : edges[r]) {
      if (e.src >= num_nodes(decl.src_type) || e.dst >= num_nodes(decl.dst_type))
        throw Error(ErrorKind::EndpointTypeMismatch, "edge of relation " + decl.name + " has an endpoint outside its type");
    }
  }
  if (!features || features->rows() != num_targets())
    throw Error(ErrorKind::FeatureRowMissing, "feature matrix must have one row per target node");
  if (!features->all_finite()) throw Error(ErrorKind::NonFiniteFeature, "feature matrix contains NaN or Inf");
  if (!labels.empty() && labels.size() != num_targets())
    throw Error(ErrorKind::LengthMismatch, "label vector must have one entry per target node");
}

Hin load_hin(const HinFiles& files, const Schema& schema) {
  schema.validate();
  Hin hin;
  hin.schema = schema;
  hin.external_ids.resize(schema.node_types.size());
  hin.edges.resize(schema.relations.size());

  std::unordered_map<std::string, TypeId> type_by_name;
  for (std::size_t i = 0; i < schema.node_types.size(); ++i)
    type_by_name.emplace(schema.node_types[i], static_cast<TypeId>(i));
  std::unordered_map<std::string, RelationId> relation_by_name;
  for (std::size_t i = 0; i < schema.relations.size(); ++i)
    relation_by_name.emplace(schema.relations[i].name, static_cast<RelationId>(i));

  std::unordered_map<std::int64_t, NodeRef> nodes;
  for_each_record(files.nodes, [&](const std::vector<std::string_view>& f, std::size_t line) {
    std::int64_t id = 0;
    if (f.size() != 2 || !parse_number(f[0], id)) malformed(files.nodes, line, "expected node_id<TAB>type_name");
    auto type = type_by_name.find(std::string(f[1]));
    if (type == type_by_name.end())
      throw Error(ErrorKind::UnknownType, files.nodes.string() + ":" + std::to_string(line) + ": type '" +
                                              std::string(f[1]) + "'");
    auto& ids = hin.external_ids[type->second];
    if (!nodes.emplace(id, NodeRef{type->second, static_cast<std::uint32_t>(ids.size())}).second)
      throw Error(ErrorKind::DuplicateNodeId, files.nodes.string() + ":" + std::to_string(line) + ": node " +
                                                  std::to_string(id));
    ids.push_back(id);
  });

  const auto lookup = [&](std::int64_t id, const std::filesystem::path& file, std::size_t line) {
    auto it = nodes.find(id);
    if (it == nodes.end())
      throw Error(ErrorKind::UnknownNode, file.string() + ":" + std::to_string(line) + ": node " + std::to_string(id));
    return it->second;
  };

  for_each_record(files.edges, [&](const std::vector<std::string_view>& f, std::size_t line) {
    std::int64_t src = 0, dst = 0;
    if (f.size() != 3 || !parse_number(f[0], src) || !parse_number(f[1], dst))
      malformed(files.edges, line, "expected src_id<TAB>dst_id<TAB>relation_name");
    auto rel = relation_by_name.find(std::string(f[2]));
    if (rel == relation_by_name.end())
      throw Error(ErrorKind::UnknownRelation, files.edges.string() + ":" + std::to_string(line) + ": relation '" +
                                                  std::string(f[2]) + "'");
    const RelationDecl& decl = schema.relations[rel->second];
    const NodeRef s = lookup(src, files.edges, line);
    const NodeRef d = lookup(dst, files.edges, line);
    if (s.type != decl.src_type || d.type != decl.dst_type)
      throw Error(ErrorKind::EndpointTypeMismatch, files.edges.string() + ":" + std::to_string(line) + ": relation " +
                                                       decl.name + " expects " + schema.node_types[decl.src_type] +
                                                       " -> " + schema.node_types[decl.dst_type]);
    hin.edges[rel->second].push_back({s.local, d.local});
  });

  const std::size_t n_targets = hin.num_targets();
  if (!std::filesystem::exists(files.features))
    throw Error(ErrorKind::FeatureRowMissing,
                "feature file " + files.features.string() + " not found; no target node has a feature row");
  if (has_hgf1_magic(files.features)) {
    Matrix m = read_hgf1(files.features);
    if (m.rows() < n_targets)
      throw Error(ErrorKind::FeatureRowMissing, files.features.string() + ": " + std::to_string(m.rows()) +
                                                    " rows for " + std::to_string(n_targets) + " target nodes");
    if (m.rows() > n_targets)
      throw Error(ErrorKind::MalformedRecord, files.features.string() + ": more rows than target nodes");
    hin.features = std::make_shared<const Matrix>(std::move(m));
  } else {
    std::vector<std::vector<double>> rows(n_targets);
    std::size_t dim = 0;
    bool have_dim = false;
    for_each_record(files.features, [&](const std::vector<std::string_view>& f, std::size_t line) {
      std::int64_t id = 0;
      if (f.size() != 2 || !parse_number(f[0], id)) malformed(files.features, line, "expected node_id<TAB>v1,v2,...");
      const NodeRef ref = lookup(id, files.features, line);
      if (ref.type != schema.target_type) return;  // attributes of other types are not used
      std::vector<double> values;
      for (std::string_view tok : split(f[1], ',')) {
        double v = 0.0;
        if (!parse_number(tok, v)) malformed(files.features, line, "bad feature value '" + std::string(tok) + "'");
        values.push_back(v);
      }
      if (!have_dim) {
        dim = values.size();
        have_dim = true;
      } else if (values.size() != dim) {
        malformed(files.features, line, "feature row length differs from earlier rows");
      }
      if (!rows[ref.local].empty()) malformed(files.features, line, "duplicate feature row");
      rows[ref.local] = std::move(values);
    });
    Matrix m(n_targets, dim);
    for (std::size_t i = 0; i < n_targets; ++i) {
      if (rows[i].size() != dim || (dim > 0 && rows[i].empty()))
        throw Error(ErrorKind::FeatureRowMissing, "target node " + std::to_string(hin.external_ids[schema.target_type][i]));
      std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    hin.features = std::make_shared<const Matrix>(std::move(m));
  }
  if (!hin.features->all_finite()) throw Error(ErrorKind::NonFiniteFeature, files.features.string());

  if (files.labels) {
    hin.labels.assign(n_targets, -1);
    for_each_record(*files.labels, [&](const std::vector<std::string_view>& f, std::size_t line) {
      std::int64_t id = 0;
      int cls = 0;
      if (f.size() != 2 || !parse_number(f[0], id) || !parse_number(f[1], cls) || cls < 0)
        malformed(*files.labels, line, "expected node_id<TAB>class_id");
      const NodeRef ref = lookup(id, *files.labels, line);
      if (ref.type != schema.target_type) malformed(*files.labels, line, "label on a non-target node");
      hin.labels[ref.local] = cls;
    });
  }
  hin.validate();
  return hin;
}

MetapathSpec MetapathSpec::parse(const Schema& schema, const std::string& name, const std::vector<std::string>& steps) {
  MetapathSpec spec;
  spec.name = name;
  for (const std::string& s : steps) {
    const bool reversed = !s.empty() && s.front() == '~';
    spec.steps.push_back({schema.relation_id(reversed ? s.substr(1) : s), reversed});
  }
  spec.type_check(schema);
  return spec;
}

std::vector<std::string> MetapathSpec::step_names(const Schema& schema) const {
  std::vector<std::string> out;
  for (const auto& s : steps) out.push_back((s.reversed ? "~" : "") + schema.relations.at(s.relation).name);
  return out;
}

namespace {

TypeId step_from(const Schema& schema, const MetapathStep& s) {
  const auto& r = schema.relations.at(s.relation);
  return s.reversed ? r.dst_type : r.src_type;
}

TypeId step_to(const Schema& schema, const MetapathStep& s) {
  const auto& r = schema.relations.at(s.relation);
  return s.reversed ? r.src_type : r.dst_type;
}

}  // namespace

bool MetapathSpec::is_palindromic(const Schema& schema) const {
  // Reading the chain backwards (each step inverted) gives the same chain.
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& a = steps[i];
    const auto& b = steps[steps.size() - 1 - i];
    if (a.relation != b.relation) return false;
    const bool self_typed = schema.relations[a.relation].src_type == schema.relations[a.relation].dst_type;
    if (!self_typed && a.reversed == b.reversed) return false;
  }
  return true;
}

void MetapathSpec::type_check(const Schema& schema) const {
  if (steps.empty()) throw Error(ErrorKind::TypeChainBroken, "metapath " + name + " has no relations");
  TypeId at = schema.target_type;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].relation >= schema.relations.size())
      throw Error(ErrorKind::TypeChainBroken, "metapath " + name + " references an unknown relation");
    if (step_from(schema, steps[i]) != at)
      throw Error(ErrorKind::TypeChainBroken, "metapath " + name + ": step " + std::to_string(i) + " starts at " +
                                                  schema.node_types[step_from(schema, steps[i])] + ", expected " +
                                                  schema.node_types[at]);
    at = step_to(schema, steps[i]);
  }
  if (at != schema.target_type)
    throw Error(ErrorKind::TypeChainBroken, "metapath " + name + " ends at " + schema.node_types[at] +
                                                ", not the target type");
}

void MetapathView::validate() const {
  if (!adjacency.is_valid() || adjacency.rows() != adjacency.cols())
    throw Error(ErrorKind::ShapeMismatch, "view " + name + ": adjacency is not a valid square CSR matrix");
  if (!features || features->rows() != adjacency.rows())
    throw Error(ErrorKind::ShapeMismatch, "view " + name + ": feature rows do not match node count");
  for (std::size_t r = 0; r < adjacency.rows(); ++r)
    for (auto c : adjacency.row_cols(r))
      if (c == r || adjacency.at(c, r) == 0.0)
        throw Error(ErrorKind::ShapeMismatch, "view " + name + ": adjacency must be symmetric with zero diagonal");
}

SparseMatrix symmetric_adjacency(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<SparseMatrix::Entry> entries;
  entries.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    if (e.src == e.dst) continue;
    entries.push_back({e.src, e.dst, 1.0});
    entries.push_back({e.dst, e.src, 1.0});
  }
  SparseMatrix a = SparseMatrix::from_entries(n, n, std::move(entries));
  std::fill(a.values().begin(), a.values().end(), 1.0);
  return a;
}

MetapathView extract_metapath_view(const Hin& hin, const MetapathSpec& spec) {
  spec.type_check(hin.schema);
  const Schema& schema = hin.schema;

  // Per step, neighbor lists from the step's source type to its destination type.
  std::vector<SparseMatrix> hops;
  for (const MetapathStep& step : spec.steps) {
    const auto& decl = schema.relations[step.relation];
    const std::size_t from = hin.num_nodes(step.reversed ? decl.dst_type : decl.src_type);
    const std::size_t to = hin.num_nodes(step.reversed ? decl.src_type : decl.dst_type);
    std::vector<SparseMatrix::Entry> entries;
    for (const Edge& e : hin.edges[step.relation])
      entries.push_back(step.reversed ? SparseMatrix::Entry{e.dst, e.src, 1.0} : SparseMatrix::Entry{e.src, e.dst, 1.0});
    hops.push_back(SparseMatrix::from_entries(from, to, std::move(entries)));
  }

  // Boolean product, row by row: frontier sets are deduplicated with a stamp array.
  const std::size_t n = hin.num_targets();
  std::vector<SparseMatrix::Entry> entries;
  std::vector<std::uint32_t> frontier, next;
  std::vector<std::size_t> stamp;
  std::size_t clock = 0;
  for (std::size_t i = 0; i < n; ++i) {
    frontier.assign(1, static_cast<std::uint32_t>(i));
    for (const SparseMatrix& hop : hops) {
      stamp.resize(std::max(stamp.size(), hop.cols()), 0);
      ++clock;
      next.clear();
      for (auto u : frontier)
        for (auto v : hop.row_cols(u))
          if (stamp[v] != clock) {
            stamp[v] = clock;
            next.push_back(v);
          }
      frontier.swap(next);
    }
    for (auto j : frontier)
      if (j != i) entries.push_back({static_cast<std::uint32_t>(i), j, 1.0});
  }
  SparseMatrix directed = SparseMatrix::from_entries(n, n, entries);

  MetapathView view;
  view.name = spec.name;
  view.features = hin.features;
  if (!(directed == directed.transposed())) {
    view.warnings.push_back("metapath " + spec.name + " induces an asymmetric relation; view was symmetrized");
  } else if (!spec.is_palindromic(schema)) {
    view.warnings.push_back("metapath " + spec.name + " is not palindromic");
  }
  for (std::size_t k = 0, total = entries.size(); k < total; ++k)
    entries.push_back({entries[k].col, entries[k].row, 1.0});
  view.adjacency = SparseMatrix::from_entries(n, n, std::move(entries));
  std::fill(view.adjacency.values().begin(), view.adjacency.values().end(), 1.0);
  if (view.num_edges() == 0) view.warnings.push_back("metapath " + spec.name + " produced an empty view");
  return view;
}

}  // namespace hgcml
