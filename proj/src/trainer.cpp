#include "hgcml/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hgcml/error.hpp"

namespace hgcml {

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw Error(ErrorKind::Config, "learning rate must be non-negative");
  if (patience < 1) throw Error(ErrorKind::Config, "patience must be at least 1");
  if (max_epochs < 1) throw Error(ErrorKind::Config, "max_epochs must be at least 1");
  if (model.dim == 0) throw Error(ErrorKind::Config, "embedding dimension must be positive");
  corruption.validate();
  objective.validate();
}

namespace {

std::vector<std::string> view_names(const std::vector<MetapathView>& views) {
  std::vector<std::string> names;
  for (const auto& v : views) names.push_back(v.name);
  return names;
}

Model initial_model(const std::vector<MetapathView>& views, const TrainConfig& cfg) {
  if (views.empty()) throw Error(ErrorKind::Config, "training needs at least one metapath view");
  Rng init = Rng(cfg.seed).substream("init");
  return Model(cfg.model, view_names(views), views.front().features->cols(), init);
}

}  // namespace

TrainResult train(const std::vector<MetapathView>& views, const PositiveSets& positives, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  for (const auto& v : views)
    if (v.num_nodes() != positives.num_nodes())
      throw Error(ErrorKind::ShapeMismatch, "positive sets do not match view " + v.name);
  const PositiveMasks masks = PositiveMasks::from(positives);
  const std::uint64_t sample_seed = Rng(cfg.seed).substream("samples").key();

  Model model = initial_model(views, cfg);
  TrainResult result{model, {}, 0, 0.0, false, false};
  AdamState adam;
  adam.config.lr = cfg.lr;

  TrainingSample sample;
  std::size_t since_improvement = 0;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    if (epoch == 0 || cfg.resample_every_epoch)
      sample = draw_sample(views, cfg.corruption, sample_seed, cfg.resample_every_epoch ? epoch : 0);

    model.params().zero_grad();
    double loss = 0.0;
    {
      Tape tape;
      ObjectiveTerms terms = total_objective(tape, model, sample, masks, cfg.objective);
      loss = terms.total.scalar();
      if (std::isfinite(loss)) tape.backward(terms.total);
    }
    if (!std::isfinite(loss)) {
      result.diverged = true;
      break;
    }
    result.trace.push_back(loss);
    if (on_epoch) on_epoch(epoch, loss);

    if (epoch == 0 || loss < result.best_loss - cfg.min_delta) {
      result.best_loss = loss;
      result.best_epoch = epoch;
      result.model.params().copy_values_from(model.params());
      since_improvement = 0;
    } else {
      if (loss < result.best_loss) {
        // Below min_delta: not an improvement for patience, but keep the minimum.
        result.best_loss = loss;
        result.best_epoch = epoch;
        result.model.params().copy_values_from(model.params());
      }
      if (++since_improvement >= cfg.patience) {
        result.early_stopped = true;
        break;
      }
    }

    adam_step(model.params(), adam);
    if (!model.params().all_finite()) {
      result.diverged = true;
      break;
    }
  }
  return result;
}

Matrix export_embeddings(const Model& model, const std::vector<MetapathView>& views) {
  return export_embeddings(model, views, model.config().fusion);
}

Matrix export_embeddings(const Model& model, const std::vector<MetapathView>& views, FusionMode mode) {
  std::vector<GraphInput> inputs;
  for (const auto& v : views) inputs.push_back(GraphInput::from_view(v));
  return fuse(model.embed_views(inputs), mode);
}

void write_trace(const std::filesystem::path& path, const std::vector<double>& trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  char buf[64];
  for (std::size_t e = 0; e < trace.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%.17g", trace[e]);
    out << e << '\t' << buf << '\n';
  }
}

std::vector<double> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<double> trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t epoch = 0;
    double loss = 0.0;
    if (!(fields >> epoch >> loss) || epoch != trace.size())
      throw Error(ErrorKind::MalformedRecord, path.string() + ": bad trace line '" + line + "'");
    trace.push_back(loss);
  }
  return trace;
}

}  // namespace hgcml
