#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hgcml/matrix.hpp"

namespace hgcml {

/// Global TP / (TP + (FP + FN) / 2) over all classes; equals accuracy for single-label data.
double micro_f1(std::span<const int> pred, std::span<const int> truth);

/// I(A;B) / ((H(A) + H(B)) / 2). Two single-cluster partitions score 1.
double nmi(std::span<const int> a, std::span<const int> b);

struct ProbeConfig {
  double train_frac = 0.2;
  std::size_t epochs = 300;
  double lr = 1e-2;
  std::size_t max_split_attempts = 10;
};

/// Softmax regression on frozen embeddings, trained on a random train_frac
/// split with full-batch Adam; returns micro-F1 on the held-out rows.
double linear_probe(const Matrix& embeddings, std::span<const int> labels, std::uint64_t seed,
                    const ProbeConfig& cfg = {});

struct KMeansResult {
  std::vector<int> assignment;
  Matrix centroids;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding; an empty cluster takes the point
/// farthest from its current centroid.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter = 300,
                    double tol = 1e-6);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::vector<double> values;

  static MetricSummary of(std::vector<double> values);
};

/// Clusters into as many groups as there are distinct labels, `runs` times.
MetricSummary kmeans_nmi(const Matrix& embeddings, std::span<const int> labels, std::size_t runs, std::uint64_t seed);
MetricSummary probe_micro_f1(const Matrix& embeddings, std::span<const int> labels, std::size_t runs,
                             std::uint64_t seed, const ProbeConfig& cfg = {});

struct EvalConfig {
  ProbeConfig probe;
  std::size_t probe_runs = 10;
  std::size_t kmeans_runs = 10;
  std::uint64_t seed = 0;
};

struct EvalReport {
  MetricSummary micro_f1;
  MetricSummary nmi;
  double train_frac = 0.2;
  std::uint64_t seed = 0;
};

/// Rows with a negative label are ignored.
EvalReport evaluate(const Matrix& embeddings, std::span<const int> labels, const EvalConfig& cfg);

/// report.tsv: `metric<TAB>mean<TAB>std<TAB>runs`.
void write_report(const std::filesystem::path& path, const EvalReport& report);

}  // namespace hgcml
