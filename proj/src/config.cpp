#include "hgcml/config.hpp"

#include <fstream>
#include <set>

#include "hgcml/error.hpp"

namespace hgcml {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Config, where + ": " + what);
}

/// Reads typed keys from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) config_error(where_, "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    allowed_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->template get<std::int64_t>() >= 0))
          config_error(where_ + "." + key, "expected a non-negative integer");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) config_error(where_ + "." + key, "expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) config_error(where_ + "." + key, "expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) config_error(where_ + "." + key, "expected a string");
      }
      out = it->get<T>();
    } catch (const json::exception& e) {
      config_error(where_ + "." + key, e.what());
    }
  }

  const json* child(const char* key) {
    allowed_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  const json& required(const char* key) {
    const json* c = child(key);
    if (c == nullptr) config_error(where_, std::string("missing required key '") + key + "'");
    return *c;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!allowed_.contains(it.key())) config_error(where_, "unknown key '" + it.key() + "'");
  }

  const std::string& where() const { return where_; }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> allowed_;
};

std::vector<std::string> string_list(const json& j, const std::string& where) {
  if (!j.is_array()) config_error(where, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) config_error(where, "expected an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

MaskMode parse_mask_mode(const std::string& s) {
  if (s == "columns") return MaskMode::Columns;
  if (s == "entries") return MaskMode::Entries;
  throw Error(ErrorKind::ModeInvalid, "mask_mode must be 'columns' or 'entries', got '" + s + "'");
}

}  // namespace

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  Section root(doc, "config");

  if (const json* d = root.child("data")) {
    Section s(*d, "data");
    s.get("nodes", cfg.data.nodes);
    s.get("edges", cfg.data.edges);
    s.get("features", cfg.data.features);
    s.get("labels", cfg.data.labels);
    s.finish();
  }

  {
    Section s(root.required("schema"), "schema");
    cfg.schema.node_types = string_list(s.required("node_types"), "schema.node_types");
    const json& rels = s.required("relations");
    if (!rels.is_array()) config_error("schema.relations", "expected an array");
    for (const auto& r : rels) {
      Section rs(r, "schema.relations[]");
      Schema::RelationByName rel;
      rs.get("name", rel.name);
      rs.get("src", rel.src);
      rs.get("dst", rel.dst);
      rs.finish();
      if (rel.name.empty() || rel.src.empty() || rel.dst.empty())
        config_error("schema.relations[]", "name, src and dst are required");
      cfg.schema.relations.push_back(rel);
    }
    s.get("target_type", cfg.schema.target_type);
    s.finish();
    if (cfg.schema.target_type.empty()) config_error("schema", "missing required key 'target_type'");
  }

  {
    const json& mps = root.required("metapaths");
    if (!mps.is_array() || mps.empty()) config_error("metapaths", "expected a non-empty array");
    for (const auto& m : mps) {
      Section ms(m, "metapaths[]");
      RunConfig::Metapath mp;
      ms.get("name", mp.name);
      mp.relations = string_list(ms.required("relations"), "metapaths[].relations");
      ms.finish();
      if (mp.name.empty()) config_error("metapaths[]", "missing name");
      for (const auto& other : cfg.metapaths)
        if (other.name == mp.name) config_error("metapaths", "duplicate metapath name '" + mp.name + "'");
      cfg.metapaths.push_back(std::move(mp));
    }
  }

  if (const json* a = root.child("augment")) {
    Section s(*a, "augment");
    std::string mode = "columns";
    s.get("p_e", cfg.augment.p_e);
    s.get("p_f", cfg.augment.p_f);
    s.get("mask_mode", mode);
    s.get("resample_every_epoch", cfg.augment.resample_every_epoch);
    s.finish();
    cfg.augment.mask_mode = parse_mask_mode(mode);
  }

  if (const json* p = root.child("positives")) {
    Section s(*p, "positives");
    s.get("alpha", cfg.positives.alpha);
    s.get("tol", cfg.positives.tol);
    s.get("max_iter", cfg.positives.max_iter);
    s.get("k_t", cfg.positives.k_t);
    s.get("k_s", cfg.positives.k_s);
    s.get("cache_ppr", cfg.positives.cache_ppr);
    s.finish();
  }

  if (const json* m = root.child("model")) {
    Section s(*m, "model");
    std::string fusion = "sum";
    s.get("dim", cfg.model.dim);
    s.get("share_encoder", cfg.model.share_encoder);
    s.get("fusion", fusion);
    s.finish();
    cfg.model.fusion = parse_fusion_mode(fusion);
  }

  if (const json* o = root.child("objective")) {
    Section s(*o, "objective");
    s.get("tau", cfg.objective.tau);
    s.get("literal_eq2", cfg.objective.literal_eq2);
    if (const json* w = s.child("loss_weights")) {
      Section ws(*w, "objective.loss_weights");
      ws.get("local", cfg.objective.local_weight);
      ws.get("global", cfg.objective.global_weight);
      ws.finish();
    }
    s.finish();
  }

  if (const json* t = root.child("train")) {
    Section s(*t, "train");
    s.get("lr", cfg.train.lr);
    s.get("patience", cfg.train.patience);
    s.get("max_epochs", cfg.train.max_epochs);
    s.get("min_delta", cfg.train.min_delta);
    s.finish();
  }

  if (const json* e = root.child("eval")) {
    Section s(*e, "eval");
    s.get("train_frac", cfg.eval.train_frac);
    s.get("probe_runs", cfg.eval.probe_runs);
    s.get("probe_epochs", cfg.eval.probe_epochs);
    s.get("probe_lr", cfg.eval.probe_lr);
    s.get("kmeans_runs", cfg.eval.kmeans_runs);
    s.finish();
  }

  root.get("seed", cfg.seed);
  root.get("out_dir", cfg.out_dir);
  root.finish();

  // Semantic checks that do not need the data files.
  const Schema schema = cfg.build_schema();
  cfg.build_metapaths(schema);
  cfg.train_config().validate();
  if (!(cfg.positives.alpha > 0.0 && cfg.positives.alpha <= 1.0))
    config_error("positives.alpha", "must lie in (0, 1]");
  if (!(cfg.positives.tol > 0.0)) config_error("positives.tol", "must be positive");
  if (!(cfg.eval.train_frac > 0.0 && cfg.eval.train_frac < 1.0)) config_error("eval.train_frac", "must lie in (0, 1)");
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json j;
  j["data"] = {{"nodes", cfg.data.nodes}, {"edges", cfg.data.edges}, {"features", cfg.data.features},
               {"labels", cfg.data.labels}};
  json rels = json::array();
  for (const auto& r : cfg.schema.relations) rels.push_back({{"name", r.name}, {"src", r.src}, {"dst", r.dst}});
  j["schema"] = {{"node_types", cfg.schema.node_types}, {"relations", rels}, {"target_type", cfg.schema.target_type}};
  json mps = json::array();
  for (const auto& m : cfg.metapaths) mps.push_back({{"name", m.name}, {"relations", m.relations}});
  j["metapaths"] = mps;
  j["augment"] = {{"p_e", cfg.augment.p_e},
                  {"p_f", cfg.augment.p_f},
                  {"mask_mode", cfg.augment.mask_mode == MaskMode::Columns ? "columns" : "entries"},
                  {"resample_every_epoch", cfg.augment.resample_every_epoch}};
  j["positives"] = {{"alpha", cfg.positives.alpha}, {"tol", cfg.positives.tol},
                    {"max_iter", cfg.positives.max_iter}, {"k_t", cfg.positives.k_t},
                    {"k_s", cfg.positives.k_s}, {"cache_ppr", cfg.positives.cache_ppr}};
  j["model"] = {{"dim", cfg.model.dim}, {"share_encoder", cfg.model.share_encoder},
                {"fusion", to_string(cfg.model.fusion)}};
  j["objective"] = {{"tau", cfg.objective.tau},
                    {"literal_eq2", cfg.objective.literal_eq2},
                    {"loss_weights", {{"local", cfg.objective.local_weight}, {"global", cfg.objective.global_weight}}}};
  j["train"] = {{"lr", cfg.train.lr}, {"patience", cfg.train.patience}, {"max_epochs", cfg.train.max_epochs},
                {"min_delta", cfg.train.min_delta}};
  j["eval"] = {{"train_frac", cfg.eval.train_frac}, {"probe_runs", cfg.eval.probe_runs},
               {"probe_epochs", cfg.eval.probe_epochs}, {"probe_lr", cfg.eval.probe_lr},
               {"kmeans_runs", cfg.eval.kmeans_runs}};
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

void save_config(const std::filesystem::path& path, const RunConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << to_json(cfg).dump(2) << '\n';
}

Schema RunConfig::build_schema() const {
  try {
    return Schema::make(schema.node_types, schema.relations, schema.target_type);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("schema: ") + e.what());
  }
}

std::vector<MetapathSpec> RunConfig::build_metapaths(const Schema& s) const {
  std::vector<MetapathSpec> out;
  for (const auto& m : metapaths) {
    try {
      MetapathSpec spec = MetapathSpec::parse(s, m.name, m.relations);
      spec.type_check(s);
      out.push_back(std::move(spec));
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, "metapath " + m.name + ": " + e.what());
    }
  }
  return out;
}

HinFiles RunConfig::files() const {
  HinFiles f;
  f.nodes = base_dir / data.nodes;
  f.edges = base_dir / data.edges;
  f.features = base_dir / data.features;
  if (!data.labels.empty()) f.labels = base_dir / data.labels;
  return f;
}

std::filesystem::path RunConfig::output_dir() const { return base_dir / out_dir; }

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.lr = train.lr;
  t.patience = train.patience;
  t.max_epochs = train.max_epochs;
  t.min_delta = train.min_delta;
  t.resample_every_epoch = augment.resample_every_epoch;
  t.corruption = {augment.p_e, augment.p_f, augment.mask_mode, 0};
  t.objective = objective;
  t.model = model;
  t.seed = seed;
  return t;
}

EvalConfig RunConfig::eval_config() const {
  EvalConfig e;
  e.probe.train_frac = eval.train_frac;
  e.probe.epochs = eval.probe_epochs;
  e.probe.lr = eval.probe_lr;
  e.probe_runs = eval.probe_runs;
  e.kmeans_runs = eval.kmeans_runs;
  e.seed = seed;
  return e;
}

std::vector<std::string> RunConfig::grid_warnings() const {
  std::vector<std::string> w;
  const auto check = [&w](const char* key, double v, double lo, double hi) {
    if (v < lo || v > hi)
      w.push_back(std::string(key) + "=" + std::to_string(v) + " is outside the tuning grid [" + std::to_string(lo) +
                  ", " + std::to_string(hi) + "]");
  };
  check("train.lr", train.lr, 5e-4, 5e-3);
  check("objective.tau", objective.tau, 0.2, 0.8);
  check("augment.p_e", augment.p_e, 0.1, 0.7);
  check("augment.p_f", augment.p_f, 0.1, 0.7);
  check("positives.k_t", static_cast<double>(positives.k_t), 0, 128);
  check("positives.k_s", static_cast<double>(positives.k_s), 0, 128);
  return w;
}

}  // namespace hgcml
