#include "hgcml/synth.hpp"

#include <algorithm>
#include <fstream>

#include "hgcml/binio.hpp"
#include "hgcml/error.hpp"
#include "hgcml/rng.hpp"

namespace hgcml {

namespace {
const char* const kAuxTypes[] = {"P", "S", "C", "T", "V", "K", "L", "R"};
constexpr std::size_t kMaxMetapaths = sizeof(kAuxTypes) / sizeof(kAuxTypes[0]);
}  // namespace

void SynthConfig::validate() const {
  if (blocks < 1 || block_size < 1) throw Error(ErrorKind::Config, "synthetic graph needs at least one non-empty block");
  if (metapaths < 1 || metapaths > kMaxMetapaths)
    throw Error(ErrorKind::Config, "synthetic metapath count must be in [1, " + std::to_string(kMaxMetapaths) + "]");
  if (!(p_intra >= 0 && p_intra <= 1 && p_inter >= 0 && p_inter <= 1))
    throw Error(ErrorKind::Config, "edge probabilities must lie in [0, 1]");
  if (feature_dim < 1) throw Error(ErrorKind::Config, "feature dimension must be positive");
}

SynthDataset make_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.blocks * cfg.block_size;
  std::vector<std::string> types{"A"};
  std::vector<Schema::RelationByName> relations;
  for (std::size_t m = 0; m < cfg.metapaths; ++m) {
    types.emplace_back(kAuxTypes[m]);
    relations.push_back({std::string("A") + kAuxTypes[m], "A", kAuxTypes[m]});
  }

  SynthDataset ds;
  Hin& hin = ds.hin;
  hin.schema = Schema::make(types, relations, "A");
  hin.external_ids.resize(types.size());
  hin.edges.resize(relations.size());
  for (std::size_t i = 0; i < n; ++i) hin.external_ids[0].push_back(static_cast<std::int64_t>(i));

  const Rng root(cfg.seed);
  std::int64_t next_id = static_cast<std::int64_t>(n);
  for (std::size_t m = 0; m < cfg.metapaths; ++m) {
    Rng rng = root.substream("synth.edges", m);
    auto& aux_ids = hin.external_ids[m + 1];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const bool same = i / cfg.block_size == j / cfg.block_size;
        if (!rng.bernoulli(same ? cfg.p_intra : cfg.p_inter)) continue;
        const auto aux = static_cast<std::uint32_t>(aux_ids.size());
        aux_ids.push_back(next_id++);
        hin.edges[m].push_back({static_cast<std::uint32_t>(i), aux});
        hin.edges[m].push_back({static_cast<std::uint32_t>(j), aux});
      }
    const std::string rel = relations[m].name;
    ds.metapaths.push_back(MetapathSpec::parse(hin.schema, std::string("A") + kAuxTypes[m] + "A", {rel, "~" + rel}));
    ds.metapath_steps.push_back({rel, "~" + rel});
  }

  Rng feature_rng = root.substream("synth.features");
  Matrix x(n, cfg.feature_dim);
  hin.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t block = i / cfg.block_size;
    hin.labels[i] = static_cast<int>(block);
    for (std::size_t c = 0; c < cfg.feature_dim; ++c) {
      const double v = cfg.feature_noise * feature_rng.normal() + (c % cfg.blocks == block ? cfg.feature_shift : 0.0);
      x(i, c) = static_cast<float>(v);  // representable in the f32 file layout
    }
  }
  hin.features = std::make_shared<const Matrix>(std::move(x));
  hin.validate();
  return ds;
}

void write_dataset(const Hin& hin, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("nodes.tsv");
    // Emit in ascending id order across types.
    std::vector<std::pair<std::int64_t, TypeId>> all;
    for (TypeId t = 0; t < hin.external_ids.size(); ++t)
      for (auto id : hin.external_ids[t]) all.emplace_back(id, t);
    std::sort(all.begin(), all.end());
    for (const auto& [id, t] : all) out << id << '\t' << hin.schema.node_types[t] << '\n';
  }
  {
    auto out = open("edges.tsv");
    for (std::size_t r = 0; r < hin.edges.size(); ++r) {
      const auto& decl = hin.schema.relations[r];
      for (const Edge& e : hin.edges[r])
        out << hin.external_ids[decl.src_type][e.src] << '\t' << hin.external_ids[decl.dst_type][e.dst] << '\t'
            << decl.name << '\n';
    }
  }
  write_hgf1(dir / "features.bin", *hin.features);
  if (hin.has_labels()) {
    auto out = open("labels.tsv");
    const auto& ids = hin.external_ids[hin.schema.target_type];
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (hin.labels[i] >= 0) out << ids[i] << '\t' << hin.labels[i] << '\n';
  }
}

}  // namespace hgcml
