#include "hgcml/objective.hpp"

#include "hgcml/error.hpp"

namespace hgcml {

void ObjectiveConfig::validate() const {
  if (!(tau > 0.0)) throw Error(ErrorKind::TauNonPositive, "temperature must be positive");
}

PositiveMasks PositiveMasks::from(const PositiveSets& sets) {
  sets.validate();
  auto positive = std::make_shared<const RowMask>(sets.mask());
  auto negative = std::make_shared<const RowMask>(positive->inverted());
  return {positive, negative};
}

Var node_node_loss(Var z_m, Var z_n, const PositiveMasks& masks, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::TauNonPositive, "temperature must be positive");
  if (!z_m.value().same_shape(z_n.value())) throw Error(ErrorKind::ShapeMismatch, "node-node views differ in shape");
  if (masks.positive->rows() != z_m.rows()) throw Error(ErrorKind::ShapeMismatch, "positive sets do not cover every node");
  Var a = row_l2_normalize(z_m);
  Var b = row_l2_normalize(z_n);
  Var cross = scale(matmul_nt(a, b), 1.0 / tau);
  Var within = scale(matmul_nt(a, a), 1.0 / tau);
  Var numerator = row_logsumexp(cross, masks.positive);
  Var denominator = logaddexp(row_logsumexp(cross), row_logsumexp(within, masks.negative));
  return mean(sub(denominator, numerator));
}

Var node_node_loss(Var z_m, Var z_n, const PositiveSets& positives, double tau) {
  return node_node_loss(z_m, z_n, PositiveMasks::from(positives), tau);
}

namespace {

Var node_graph_loss_projected(Var z_pos, Var z_neg, Var z_summary, Var bilinear_weight) {
  if (!z_pos.value().same_shape(z_neg.value())) throw Error(ErrorKind::ShapeMismatch, "node-graph branches differ in shape");
  Var pos_logits = bilinear(z_pos, bilinear_weight, z_summary);
  Var neg_logits = bilinear(z_neg, bilinear_weight, z_summary);
  // -log sigmoid(x) = softplus(-x); -log(1 - sigmoid(x)) = softplus(x)
  return add(mean(softplus(scale(pos_logits, -1.0))), mean(softplus(neg_logits)));
}

}  // namespace

Var node_graph_loss(Var h_m, Var h_neg, Var summary, const ProjectorVars& proj, Var bilinear_weight) {
  return node_graph_loss_projected(project(h_m, proj), project(h_neg, proj), project(summary, proj), bilinear_weight);
}

TrainingSample draw_sample(const std::vector<MetapathView>& views, const CorruptionConfig& cfg, std::uint64_t seed,
                           std::uint64_t round) {
  TrainingSample sample;
  const Rng root(seed);
  for (std::size_t m = 0; m < views.size(); ++m) {
    const std::uint64_t slot = round * views.size() + m;
    CorruptionConfig c1 = cfg, c2 = cfg;
    c1.seed = root.substream("corrupt.first", slot).key();
    c2.seed = root.substream("corrupt.second", slot).key();
    MetapathView first = corrupt(views[m], c1);
    MetapathView second = corrupt(views[m], c2);

    Rng shuffle_rng = root.substream("shuffle", slot);
    const auto perm = random_permutation(second.num_nodes(), shuffle_rng);
    const Matrix& x = *second.features;
    Matrix shuffled(x.rows(), x.cols());
    for (std::size_t i = 0; i < perm.size(); ++i)
      std::copy(x.row(perm[i]).begin(), x.row(perm[i]).end(), shuffled.row(i).begin());

    TrainingSample::ViewInputs in;
    in.first = GraphInput::from_view(first);
    in.second = GraphInput::from_view(second);
    in.shuffled = {in.second.a_hat, std::make_shared<const Matrix>(std::move(shuffled))};
    sample.views.push_back(std::move(in));
  }
  return sample;
}

ObjectiveTerms total_objective(Tape& tape, Model& model, const TrainingSample& sample, const PositiveMasks& masks,
                               const ObjectiveConfig& cfg) {
  cfg.validate();
  const std::size_t num_views = sample.views.size();
  if (num_views == 0 || num_views != model.view_names().size())
    throw Error(ErrorKind::ShapeMismatch, "sample must hold one entry per model view");
  ModelVars vars = model.bind(tape);

  struct Encoded {
    Var h1, h2, z1, z2, summary, z_summary;
    Var z_shuffled;
  };
  std::vector<Encoded> enc(num_views);
  for (std::size_t m = 0; m < num_views; ++m) {
    const auto& in = sample.views[m];
    Encoded& e = enc[m];
    e.h1 = gcn_forward(in.first, vars.encoders[m]);
    e.h2 = gcn_forward(in.second, vars.encoders[m]);
    e.z1 = project(e.h1, vars.proj);
    e.z2 = project(e.h2, vars.proj);
    e.summary = readout(e.h1);
    e.z_summary = project(e.summary, vars.proj);
    e.z_shuffled = cfg.literal_eq2 ? e.z2 : project(gcn_forward(in.shuffled, vars.encoders[m]), vars.proj);
  }

  ObjectiveTerms terms;
  Var total;
  bool have_total = false;
  for (std::size_t m = 0; m < num_views; ++m) {
    for (std::size_t n = 0; n < num_views; ++n) {
      PairTerm pair;
      pair.m = m;
      pair.n = n;
      pair.intra = m == n;
      const Var z_other = pair.intra ? enc[m].z2 : enc[n].z1;
      const Var z_negative = pair.intra ? enc[m].z_shuffled : enc[n].z1;
      pair.local = node_node_loss(enc[m].z1, z_other, masks, cfg.tau);
      pair.global = node_graph_loss_projected(enc[m].z1, z_negative, enc[m].z_summary, vars.disc);
      Var term = add(scale(pair.local, cfg.local_weight), scale(pair.global, cfg.global_weight));
      total = have_total ? add(total, term) : term;
      have_total = true;
      terms.pairs.push_back(pair);
    }
  }
  terms.total = total;
  return terms;
}

}  // namespace hgcml
