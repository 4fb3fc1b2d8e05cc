#include "hgcml/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "hgcml/error.hpp"
#include "hgcml/params.hpp"
#include "hgcml/rng.hpp"

namespace hgcml {

double micro_f1(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw Error(ErrorKind::LengthMismatch, "prediction and truth lengths differ");
  if (pred.empty()) return 0.0;
  // Each mistake is one FP (predicted class) and one FN (true class).
  double tp = 0.0, fp = 0.0, fn = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) {
      tp += 1.0;
    } else {
      fp += 1.0;
      fn += 1.0;
    }
  }
  return tp / (tp + 0.5 * (fp + fn));
}

namespace {

// Sums in sorted order so the result depends only on the multiset of terms,
// which makes nmi exactly symmetric and invariant to relabeling.
double sorted_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

double entropy(const std::map<int, double>& counts, double n) {
  std::vector<double> terms;
  for (const auto& [label, c] : counts) {
    const double p = c / n;
    if (p > 0.0) terms.push_back(-p * std::log(p));
  }
  return sorted_sum(std::move(terms));
}

}  // namespace

double nmi(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "partition lengths differ");
  if (a.empty()) return 0.0;
  const double n = static_cast<double>(a.size());
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    joint[{a[i], b[i]}] += 1.0;
  }
  const double ha = entropy(ca, n);
  const double hb = entropy(cb, n);
  if (ha + hb == 0.0) return 1.0;
  std::vector<double> terms;
  for (const auto& [key, c] : joint) terms.push_back((c / n) * std::log(c * n / (ca[key.first] * cb[key.second])));
  const double mi = sorted_sum(std::move(terms));
  return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

double linear_probe(const Matrix& embeddings, std::span<const int> labels, std::uint64_t seed, const ProbeConfig& cfg) {
  const std::size_t n = embeddings.rows();
  if (labels.size() != n) throw Error(ErrorKind::LengthMismatch, "one label per embedding row is required");
  std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() < 2) throw Error(ErrorKind::DegenerateSplit, "the probe needs at least two classes");
  if (*classes.begin() < 0) throw Error(ErrorKind::LengthMismatch, "unlabeled rows must be filtered before probing");
  const std::size_t num_classes = static_cast<std::size_t>(*classes.rbegin()) + 1;
  const std::size_t n_train = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.train_frac * n)));
  if (n_train >= n) throw Error(ErrorKind::DegenerateSplit, "train split leaves no held-out rows");

  // Unstratified split; retry with the next derived seed if a class is missing.
  std::vector<std::size_t> perm;
  bool ok = false;
  for (std::size_t attempt = 0; attempt < cfg.max_split_attempts && !ok; ++attempt) {
    Rng rng = Rng(seed).substream("probe.split", attempt);
    perm = random_permutation(n, rng);
    std::set<int> seen;
    for (std::size_t i = 0; i < n_train; ++i) seen.insert(labels[perm[i]]);
    ok = seen.size() == classes.size();
  }
  if (!ok) throw Error(ErrorKind::DegenerateSplit, "no split within the attempt budget covers every class");

  const std::size_t d = embeddings.cols();
  ParamStore params;
  Parameter& w = params.add("W", Matrix(d, num_classes));
  Parameter& b = params.add("b", Matrix(1, num_classes));
  AdamState adam;
  adam.config.lr = cfg.lr;

  std::vector<double> probs(num_classes);
  const auto softmax_row = [&](std::size_t row) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < num_classes; ++c) {
      double z = b.value(0, c);
      for (std::size_t k = 0; k < d; ++k) z += embeddings(row, k) * w.value(k, c);
      probs[c] = z;
      mx = std::max(mx, z);
    }
    double total = 0.0;
    for (double& p : probs) total += (p = std::exp(p - mx));
    for (double& p : probs) p /= total;
  };

  const double inv_train = 1.0 / static_cast<double>(n_train);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    params.zero_grad();
    for (std::size_t t = 0; t < n_train; ++t) {
      const std::size_t row = perm[t];
      softmax_row(row);
      for (std::size_t c = 0; c < num_classes; ++c) {
        const double g = (probs[c] - (labels[row] == static_cast<int>(c) ? 1.0 : 0.0)) * inv_train;
        b.grad(0, c) += g;
        for (std::size_t k = 0; k < d; ++k) w.grad(k, c) += embeddings(row, k) * g;
      }
    }
    adam_step(params, adam);
  }

  std::vector<int> pred, truth;
  for (std::size_t t = n_train; t < n; ++t) {
    const std::size_t row = perm[t];
    softmax_row(row);
    pred.push_back(static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin()));
    truth.push_back(labels[row]);
  }
  return micro_f1(pred, truth);
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter, double tol) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (k == 0 || k > n) throw Error(ErrorKind::Config, "k-means needs 1 <= k <= number of points");
  Rng rng = Rng(seed).substream("kmeans.init");

  KMeansResult result;
  result.centroids = Matrix(k, d);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.below(n);
  std::copy(points.row(first).begin(), points.row(first).end(), result.centroids.row(0).begin());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), result.centroids.row(c - 1)));
      total += nearest[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    std::copy(points.row(pick).begin(), points.row(pick).end(), result.centroids.row(c).begin());
  }

  result.assignment.assign(n, 0);
  std::vector<double> dist(n);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    result.iterations = iter + 1;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = squared_distance(points.row(i), result.centroids.row(c));
        if (dd < best) {
          best = dd;
          result.assignment[i] = static_cast<int>(c);
        }
      }
      dist[i] = best;
    }
    Matrix next(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(result.assignment[i]);
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) next(c, j) += points(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        const std::size_t far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        const auto old = static_cast<std::size_t>(result.assignment[far]);
        for (std::size_t j = 0; j < d; ++j) next(old, j) -= points(far, j);
        --counts[old];
        result.assignment[far] = static_cast<int>(c);
        counts[c] = 1;
        dist[far] = 0.0;
        std::copy(points.row(far).begin(), points.row(far).end(), next.row(c).begin());
      }
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // The cluster that donated a point may itself be empty now; keep its centroid.
        std::copy(result.centroids.row(c).begin(), result.centroids.row(c).end(), next.row(c).begin());
        continue;
      }
      for (std::size_t j = 0; j < d; ++j) next(c, j) /= static_cast<double>(counts[c]);
      shift = std::max(shift, std::sqrt(squared_distance(next.row(c), result.centroids.row(c))));
    }
    result.centroids = std::move(next);
    if (shift < tol) break;
  }
  return result;
}

MetricSummary MetricSummary::of(std::vector<double> values) {
  MetricSummary s;
  s.values = std::move(values);
  if (s.values.empty()) return s;
  double total = 0.0;
  for (double v : s.values) total += v;
  s.mean = total / static_cast<double>(s.values.size());
  double var = 0.0;
  for (double v : s.values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(s.values.size()));
  return s;
}

MetricSummary kmeans_nmi(const Matrix& embeddings, std::span<const int> labels, std::size_t runs, std::uint64_t seed) {
  if (labels.size() != embeddings.rows()) throw Error(ErrorKind::LengthMismatch, "one label per embedding row is required");
  const std::size_t k = std::set<int>(labels.begin(), labels.end()).size();
  std::vector<double> scores;
  for (std::size_t r = 0; r < runs; ++r) {
    const KMeansResult km = kmeans(embeddings, k, Rng(seed).substream("kmeans.run", r).key());
    scores.push_back(nmi(km.assignment, labels));
  }
  return MetricSummary::of(std::move(scores));
}

MetricSummary probe_micro_f1(const Matrix& embeddings, std::span<const int> labels, std::size_t runs,
                             std::uint64_t seed, const ProbeConfig& cfg) {
  std::vector<double> scores;
  for (std::size_t r = 0; r < runs; ++r)
    scores.push_back(linear_probe(embeddings, labels, Rng(seed).substream("probe.run", r).key(), cfg));
  return MetricSummary::of(std::move(scores));
}

EvalReport evaluate(const Matrix& embeddings, std::span<const int> labels, const EvalConfig& cfg) {
  if (labels.size() != embeddings.rows()) throw Error(ErrorKind::LengthMismatch, "one label per embedding row is required");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) keep.push_back(i);
  Matrix x(keep.size(), embeddings.cols());
  std::vector<int> y;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    std::copy(embeddings.row(keep[r]).begin(), embeddings.row(keep[r]).end(), x.row(r).begin());
    y.push_back(labels[keep[r]]);
  }
  EvalReport report;
  report.train_frac = cfg.probe.train_frac;
  report.seed = cfg.seed;
  report.micro_f1 = probe_micro_f1(x, y, cfg.probe_runs, cfg.seed, cfg.probe);
  report.nmi = kmeans_nmi(x, y, cfg.kmeans_runs, cfg.seed);
  return report;
}

void write_report(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  char buf[128];
  for (const auto& [name, m] : {std::pair{"micro_f1", &report.micro_f1}, std::pair{"nmi", &report.nmi}}) {
    std::snprintf(buf, sizeof buf, "%s\t%.6f\t%.6f\t%zu\n", name, m->mean, m->std, m->values.size());
    out << buf;
  }
}

}  // namespace hgcml
