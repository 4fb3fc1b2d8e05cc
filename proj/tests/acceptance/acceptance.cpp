// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../fixtures.hpp"
#include "hgcml/binio.hpp"
#include "hgcml/error.hpp"
#include "hgcml/eval.hpp"
#include "hgcml/objective.hpp"
#include "hgcml/pipeline.hpp"

namespace {

using namespace hgcml;
using testing::make_view;
using testing::random_matrix;
namespace fs = std::filesystem;

// Collects failed conditions and a few measured values for the report line.
class Outcome {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool passed() const { return failures_.empty(); }
  std::string summary() const {
    std::ostringstream out;
    const auto& items = failures_.empty() ? notes_ : failures_;
    for (std::size_t i = 0; i < items.size(); ++i) out << (i ? "; " : "") << items[i];
    return out.str();
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Reverse-mode gradients against central differences.
void gradients(Outcome& o) {
  auto f = testing::SixNode::make(7);
  const auto sample = draw_sample(f.views, {0.2, 0.2, MaskMode::Columns, 0}, 3, 0);
  const auto masks = PositiveMasks::from(f.positives);
  const double total_err = grad_check(
      [&](Tape& t) { return total_objective(t, f.model, sample, masks, {}).total; }, f.model.params().pointers());
  o.require(total_err < 1e-4, "total objective rel. error " + fmt("%.3g", total_err));
  o.note("objective " + fmt("%.2e", total_err));

  Rng rng(11);
  const auto rand = [&](std::size_t r, std::size_t c) { return random_matrix(r, c, rng, -2.0, 2.0); };
  Matrix kinked = rand(4, 3);
  for (double& x : kinked.data())
    if (std::abs(x) < 1e-3) x = x < 0 ? -0.5 : 0.5;
  Parameter a("a", rand(4, 3)), b("b", rand(4, 3)), c("c", rand(3, 5)), d("d", rand(6, 3)), k("k", kinked),
      bias("bias", rand(1, 3)), s("s", rand(1, 3)), sq("sq", rand(3, 3)), pos("pos", random_matrix(4, 3, rng, 0.5, 2.0));
  auto sparse = std::make_shared<const SparseMatrix>(
      SparseMatrix::from_entries(4, 4, {{0, 1, 0.5}, {1, 0, 0.5}, {2, 2, 1.0}, {3, 1, -0.7}, {1, 3, 2.0}}));
  auto mask = std::make_shared<RowMask>(4, 3, true);
  mask->set(0, 0, false), mask->set(2, 1, false), mask->set(3, 2, false);
  // Fixed random row and column weights reduce a matrix output to a scalar.
  const auto red = [](Var v) {
    Rng w(v.rows() * 131 + v.cols());
    Tape& t = *v.tape;
    const Var r = t.constant(random_matrix(1, v.rows(), w));
    return matmul(matmul(r, v), t.constant(random_matrix(v.cols(), 1, w)));
  };
  struct Case {
    const char* name;
    std::function<Var(Tape&)> f;
    std::vector<Parameter*> ps;
  };
  const std::vector<Case> cases{
      {"matmul", [&](Tape& t) { return red(matmul(t.parameter(a), t.parameter(c))); }, {&a, &c}},
      {"matmul_nt", [&](Tape& t) { return red(matmul_nt(t.parameter(a), t.parameter(d))); }, {&a, &d}},
      {"transpose", [&](Tape& t) { return red(transpose(t.parameter(a))); }, {&a}},
      {"spmm", [&](Tape& t) { return red(spmm(sparse, t.parameter(a))); }, {&a}},
      {"add", [&](Tape& t) { return red(add(t.parameter(a), t.parameter(bias))); }, {&a, &bias}},
      {"sub", [&](Tape& t) { return red(sub(t.parameter(a), t.parameter(b))); }, {&a, &b}},
      {"scale", [&](Tape& t) { return red(scale(t.parameter(a), -1.3)); }, {&a}},
      {"relu", [&](Tape& t) { return red(relu(t.parameter(k))); }, {&k}},
      {"sigmoid", [&](Tape& t) { return red(sigmoid(t.parameter(a))); }, {&a}},
      {"exp", [&](Tape& t) { return red(exp(t.parameter(a))); }, {&a}},
      {"log", [&](Tape& t) { return red(log(t.parameter(pos))); }, {&pos}},
      {"softplus", [&](Tape& t) { return red(softplus(t.parameter(a))); }, {&a}},
      {"logaddexp", [&](Tape& t) { return red(logaddexp(t.parameter(a), t.parameter(b))); }, {&a, &b}},
      {"row_l2_normalize", [&](Tape& t) { return red(row_l2_normalize(t.parameter(a))); }, {&a}},
      {"cosine_rowwise", [&](Tape& t) { return red(cosine_rowwise(t.parameter(a), t.parameter(b))); }, {&a, &b}},
      {"mean_rows", [&](Tape& t) { return red(mean_rows(t.parameter(a))); }, {&a}},
      {"sum", [&](Tape& t) { return sum(t.parameter(a)); }, {&a}},
      {"mean", [&](Tape& t) { return mean(t.parameter(a)); }, {&a}},
      {"bilinear", [&](Tape& t) { return red(bilinear(t.parameter(a), t.parameter(sq), t.parameter(s))); },
       {&a, &sq, &s}},
      {"concat_cols", [&](Tape& t) { return red(concat_cols({t.parameter(a), t.parameter(b)})); }, {&a, &b}},
      {"row_logsumexp", [&](Tape& t) { return red(row_logsumexp(t.parameter(a))); }, {&a}},
      {"masked row_logsumexp", [&](Tape& t) { return red(row_logsumexp(t.parameter(a), mask)); }, {&a}},
  };
  double worst = 0.0;
  for (const auto& cs : cases) {
    const double err = grad_check(cs.f, cs.ps);
    worst = std::max(worst, err);
    o.require(err < 1e-6, std::string(cs.name) + " rel. error " + fmt("%.3g", err));
  }
  o.note("worst op " + fmt("%.2e", worst) + " over " + std::to_string(cases.size()) + " ops");
}

// 2. Truncated PPR series against the closed-form inverse.
void ppr_oracle(Outcome& o) {
  const auto two = ppr_matrix(make_view(2, {{0, 1}}, Matrix(2, 1)), 0.85);
  const double expect[2][2] = {{0.86957, 0.13043}, {0.13043, 0.86957}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      o.require(std::abs(two.values(i, j) - expect[i][j]) <= 1e-4, "2-node entry off");

  Rng rng(2024);
  double worst_margin = -1.0;
  for (int g = 0; g < 50; ++g) {
    const std::size_t n = 1 + rng.below(30);
    const auto view = make_view(n, testing::random_edges(n, rng.uniform(0.0, 0.6), rng), Matrix(n, 1));
    const double alpha = g % 5 == 0 ? 0.85 : rng.uniform(0.05, 1.0);
    const auto s = ppr_matrix(view, alpha);
    const Matrix oracle = testing::ppr_closed_form(view.adjacency, alpha);
    double err = 0.0;
    for (std::size_t k = 0; k < oracle.size(); ++k) err = std::max(err, std::abs(oracle.data()[k] - s.values.data()[k]));
    const double bound = 1e-6 + std::pow(1.0 - alpha, static_cast<double>(s.iterations + 1));
    o.require(err <= bound, "graph " + std::to_string(g) + " error " + fmt("%.3g", err));
    worst_margin = std::max(worst_margin, err / bound);
  }
  o.note("50 graphs, worst error/bound " + fmt("%.3f", worst_margin));
}

// 3. Metapath views against brute-force path enumeration.
void metapath_oracle(Outcome& o) {
  const auto dir = testing::scratch_dir("acceptance_toy");
  const auto f = testing::write_toy_files(dir);
  const Hin toy = load_hin({f.nodes, f.edges, f.features, f.labels}, testing::toy_schema());
  const auto apa = extract_metapath_view(toy, MetapathSpec::parse(toy.schema, "APA", {"AP", "~AP"}));
  const auto row = apa.adjacency.row_cols(0);
  o.require(std::vector<std::uint32_t>(row.begin(), row.end()) == std::vector<std::uint32_t>{1},
            "author 1 APA neighbors are not {author 2}");

  Rng rng(99);
  std::size_t edges = 0;
  for (int g = 0; g < 100; ++g) {
    const Hin hin = testing::random_hin(rng, 50);
    const auto spec = MetapathSpec::parse(hin.schema, "mp", testing::random_metapath(hin, rng));
    const auto view = extract_metapath_view(hin, spec);
    o.require(testing::adjacency_pairs(view.adjacency) == testing::enumerate_metapath_pairs(hin, spec),
              "graph " + std::to_string(g) + " differs from enumeration");
    edges += view.num_edges();
  }
  o.note("100 graphs, " + std::to_string(edges) + " view edges matched");
}

// 4. Closed-form loss values and pair counting.
void loss_identities(Outcome& o) {
  Tape t;
  const Var z = t.constant(Matrix::from_rows({{0.4, -1.0, 2.0}, {0.4, -1.0, 2.0}}));
  const double nn = node_node_loss(z, z, PositiveSets::anchors_only(2), 0.5).scalar();
  o.require(std::abs(nn - std::log(3.0)) <= 1e-10, "node-node " + fmt("%.17g", nn));

  Rng rng(1);
  const ProjectorVars proj{t.constant(random_matrix(3, 3, rng)), t.constant(random_matrix(1, 3, rng)),
                           t.constant(random_matrix(3, 3, rng)), t.constant(random_matrix(1, 3, rng))};
  const Var h = t.constant(random_matrix(5, 3, rng)), hn = t.constant(random_matrix(5, 3, rng));
  const double ng = node_graph_loss(h, hn, readout(h), proj, t.constant(Matrix(3, 3))).scalar();
  o.require(std::abs(ng - 2.0 * std::log(2.0)) <= 1e-12, "node-graph " + fmt("%.17g", ng));

  auto f = testing::SixNode::make(3);
  const auto sample = draw_sample(f.views, {}, 1, 0);
  Tape t2;
  const auto terms = total_objective(t2, f.model, sample, PositiveMasks::from(f.positives), {});
  o.require(terms.pairs.size() == 4, std::to_string(terms.pairs.size()) + " pair terms");
  o.note("log 3 err " + fmt("%.1e", std::abs(nn - std::log(3.0))) + ", 2 ln 2 err " +
         fmt("%.1e", std::abs(ng - 2.0 * std::log(2.0))) + ", " + std::to_string(terms.pairs.size()) + " pairs");
}

// Runs synth -> positives -> train -> embed -> eval into `dir`.
struct PipelineRun {
  RunConfig cfg;
  TrainResult train;
  EvalReport report;
};

PipelineRun run_pipeline(const fs::path& dir) {
  std::ostringstream log;
  RunConfig cfg = cmd_synth(SynthConfig{}, dir, log);
  cmd_positives(cfg, log);
  TrainResult trained = cmd_train(cfg, log);
  cmd_embed(cfg, log);
  const EvalReport report = cmd_eval(cfg, log);
  return {std::move(cfg), std::move(trained), report};
}

// 5. Learning signal on the 3-block synthetic network.
void learning_signal(Outcome& o) {
  const auto run = run_pipeline(testing::scratch_dir("acceptance_e2e"));
  const auto& trace = run.train.trace;
  const double drop = 1.0 - run.train.best_loss / trace.front();
  o.require(trace.size() > 1, "trace too short");
  o.require(drop >= 0.20, "loss drop " + fmt("%.3f", drop));
  o.require(run.report.micro_f1.mean >= 0.90, "micro-F1 " + fmt("%.4f", run.report.micro_f1.mean));
  o.require(run.report.nmi.mean >= 0.6, "NMI " + fmt("%.4f", run.report.nmi.mean));
  o.require(run.report.nmi.values.size() == 10, "NMI runs");
  o.note("loss " + fmt("%.3f", trace.front()) + " -> " + fmt("%.3f", run.train.best_loss) + " (-" +
         fmt("%.1f", 100 * drop) + "%), micro-F1 " + fmt("%.4f", run.report.micro_f1.mean) + ", NMI " +
         fmt("%.4f", run.report.nmi.mean) + " +- " + fmt("%.4f", run.report.nmi.std));
}

// 6. Positive purity and sampled-vs-anchor-only non-inferiority.
void positive_quality(Outcome& o) {
  const auto dir = testing::scratch_dir("acceptance_positives");
  std::ostringstream log;
  const RunConfig cfg = cmd_synth(SynthConfig{}, dir, log);
  const PreparedData data = prepare_data(cfg, log);
  const PositiveSets sampled = compute_positives(cfg, data);
  std::size_t same = 0, total = 0;
  for (std::size_t u = 0; u < sampled.num_nodes(); ++u)
    for (auto v : sampled.positives[u]) {
      if (v == u) continue;
      ++total;
      same += data.hin.labels[u] == data.hin.labels[v];
    }
  const double purity = static_cast<double>(same) / static_cast<double>(total);
  o.require(sampled.k_t == 8 && sampled.k_s == 8, "default k");
  o.require(purity >= 0.80, "purity " + fmt("%.3f", purity));

  const PositiveSets anchors = PositiveSets::anchors_only(sampled.num_nodes());
  double f1_sampled = 0.0, f1_anchor = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig tc = cfg.train_config();
    tc.seed = seed;
    EvalConfig ec = cfg.eval_config();
    ec.seed = seed;
    for (auto [sets, acc] : {std::pair{&sampled, &f1_sampled}, std::pair{&anchors, &f1_anchor}}) {
      const TrainResult r = train(data.views, *sets, tc);
      const Matrix emb = export_embeddings(r.model, data.views);
      *acc += probe_micro_f1(emb, data.hin.labels, ec.probe_runs, ec.seed, ec.probe).mean / 5.0;
    }
  }
  o.require(f1_sampled >= f1_anchor - 0.01,
            "sampled " + fmt("%.4f", f1_sampled) + " vs anchor-only " + fmt("%.4f", f1_anchor));
  o.note("purity " + fmt("%.3f", purity) + ", micro-F1 sampled " + fmt("%.4f", f1_sampled) + " vs anchor-only " +
         fmt("%.4f", f1_anchor) + " (5 seeds)");
}

// 7. Byte-identical reruns and cosine scale invariance.
void determinism(Outcome& o) {
  const auto a = testing::scratch_dir("acceptance_det_a"), b = testing::scratch_dir("acceptance_det_b");
  const fs::path out_a = run_pipeline(a).cfg.output_dir(), out_b = run_pipeline(b).cfg.output_dir();
  for (const char* f : {kPositivesFile, kTraceFile, kCheckpointFile, kEmbeddingsFile}) {
    const std::string x = testing::read_file(out_a / f), y = testing::read_file(out_b / f);
    o.require(!x.empty() && x == y, std::string(f) + " differs between runs");
  }

  Rng rng(5);
  const std::size_t n = 30;
  const Matrix zm = random_matrix(n, 8, rng), zn = random_matrix(n, 8, rng);
  const auto p = select_positives(random_matrix(n, n, rng), random_matrix(n, n, rng), 3, 3);
  const auto loss = [&](double c) {
    Matrix a2 = zm, b2 = zn;
    for (double& v : a2.data()) v *= c;
    for (double& v : b2.data()) v *= c;
    Tape t;
    return node_node_loss(t.constant(a2), t.constant(b2), p, 0.5).scalar();
  };
  double drift = 0.0;
  for (double c : {1e-4, 0.1, 3.0, 250.0, 1e5}) drift = std::max(drift, std::abs(loss(c) - loss(1.0)));
  o.require(drift <= 1e-10, "scale drift " + fmt("%.3g", drift));
  o.note("4 artifacts identical, scale drift " + fmt("%.1e", drift));
}

// 8. Metric invariants against counting oracles.
void protocol_invariants(Outcome& o) {
  Rng rng(8);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 1 + rng.below(200);
    const auto k = 1 + rng.below(6);
    std::vector<int> pred(n), truth(n);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng.below(k));
      truth[i] = static_cast<int>(rng.below(k));
      correct += pred[i] == truth[i];
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(n);
    if (micro_f1(pred, truth) != acc) o.require(false, "micro-F1 != accuracy in case " + std::to_string(c));
  }
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 2 + rng.below(300);
    const auto ka = 1 + rng.below(8), kb = 1 + rng.below(8);
    std::vector<int> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<int>(rng.below(ka)), b[i] = static_cast<int>(rng.below(kb));
    const auto perm = random_permutation(8, rng);
    std::vector<int> relabeled(n);
    for (std::size_t i = 0; i < n; ++i) relabeled[i] = 100 - static_cast<int>(perm[static_cast<std::size_t>(a[i])]);
    const double base = nmi(a, b);
    if (base != nmi(b, a)) o.require(false, "NMI asymmetric in case " + std::to_string(c));
    if (base != nmi(relabeled, b) || base != nmi(b, relabeled))
      o.require(false, "NMI not relabel-invariant in case " + std::to_string(c));
  }
  o.note("1000 F1 cases, 100 NMI partitions exact");
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  void (*run)(Outcome&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "gradient correctness", 10.0, gradients},
      {2, "PPR oracle equivalence", 5.0, ppr_oracle},
      {3, "metapath-view oracle", 10.0, metapath_oracle},
      {4, "loss identities", 0.0, loss_identities},
      {5, "end-to-end learning signal", 120.0, learning_signal},
      {6, "positive-sampler quality", 0.0, positive_quality},
      {7, "determinism", 0.0, determinism},
      {8, "protocol invariants", 0.0, protocol_invariants},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0) o.require(secs < c.budget_s, "took " + fmt("%.2f", secs) + " s, budget " + fmt("%.0f", c.budget_s) + " s");
    const bool ok = o.passed();
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << " (" << fmt("%.2f", secs) << " s): "
              << o.summary() << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << 8 - failed << "/8" << std::endl;
  return failed ? 1 : 0;
}
