#include "hgcml/positives.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hgcml/error.hpp"

namespace hgcml {

DiffusionMatrix ppr_matrix(const MetapathView& view, double alpha, double tol, std::size_t max_iter) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::Config, "teleport probability must lie in (0, 1]");
  const SparseMatrix& a = view.adjacency;
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorKind::ShapeMismatch, "PPR needs a square adjacency");

  std::vector<double> col_degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) col_degree[cols[k]] += vals[k];
  }

  DiffusionMatrix out;
  out.metapath = view.name;
  out.alpha = alpha;
  Matrix term = Matrix::identity(n);
  for (double& v : term.data()) v *= alpha;
  out.values = term;

  const double decay = 1.0 - alpha;
  std::size_t k = 0;
  double last_max = term.max_abs();
  while (last_max >= tol && k < max_iter) {
    // term <- (1 - alpha) * (A D^-1) * term
    Matrix next(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      auto out_row = next.row(i);
      auto cols = a.row_cols(i);
      auto vals = a.row_values(i);
      for (std::size_t e = 0; e < cols.size(); ++e) {
        const std::size_t j = cols[e];
        const double w = decay * vals[e] / col_degree[j];
        auto src = term.row(j);
        for (std::size_t c = 0; c < n; ++c) out_row[c] += w * src[c];
      }
      if (col_degree[i] == 0.0) {
        auto src = term.row(i);
        for (std::size_t c = 0; c < n; ++c) out_row[c] += decay * src[c];
      }
    }
    term = std::move(next);
    ++k;
    for (std::size_t idx = 0; idx < term.size(); ++idx) out.values.data()[idx] += term.data()[idx];
    last_max = term.max_abs();
  }
  out.iterations = k;
  out.error_bound = std::pow(decay, static_cast<double>(k + 1));
  out.converged = last_max < tol;
  return out;
}

Matrix topology_similarity(const std::vector<DiffusionMatrix>& diffusions) {
  if (diffusions.empty()) throw Error(ErrorKind::ShapeMismatch, "topology similarity needs at least one view");
  Matrix sum = diffusions.front().values;
  for (std::size_t m = 1; m < diffusions.size(); ++m) {
    const Matrix& s = diffusions[m].values;
    if (!s.same_shape(sum)) throw Error(ErrorKind::ShapeMismatch, "diffusion matrices differ in shape");
    for (std::size_t k = 0; k < s.size(); ++k) sum.data()[k] += s.data()[k];
  }
  return sum;
}

Matrix semantic_similarity(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix sim(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double ss = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double d = x(i, c) - x(j, c);
        ss += d * d;
      }
      sim(i, j) = sim(j, i) = -std::sqrt(ss);
    }
  return sim;
}

std::vector<std::uint32_t> top_k_excluding(const Matrix& sim, std::size_t u, std::size_t k) {
  std::vector<std::uint32_t> candidates;
  candidates.reserve(sim.cols());
  for (std::size_t v = 0; v < sim.cols(); ++v)
    if (v != u) candidates.push_back(static_cast<std::uint32_t>(v));
  k = std::min(k, candidates.size());
  const auto better = [&](std::uint32_t a, std::uint32_t b) {
    const double sa = sim(u, a), sb = sim(u, b);
    return sa != sb ? sa > sb : a < b;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(), better);
  candidates.resize(k);
  return candidates;
}

bool PositiveSets::contains(std::size_t u, std::size_t v) const {
  const auto& p = positives.at(u);
  return std::binary_search(p.begin(), p.end(), static_cast<std::uint32_t>(v));
}

RowMask PositiveSets::mask() const {
  const std::size_t n = num_nodes();
  RowMask m(n, n, false);
  for (std::size_t u = 0; u < n; ++u)
    for (auto v : positives[u]) m.set(u, v, true);
  return m;
}

void PositiveSets::validate() const {
  const std::size_t n = num_nodes();
  for (std::size_t u = 0; u < n; ++u) {
    const auto& p = positives[u];
    if (!std::is_sorted(p.begin(), p.end()) || std::adjacent_find(p.begin(), p.end()) != p.end())
      throw Error(ErrorKind::MalformedRecord, "positive set of node " + std::to_string(u) + " is not sorted and unique");
    if (!contains(u, u)) throw Error(ErrorKind::EmptyPositives, "node " + std::to_string(u) + " is missing from its own positives");
    if (!p.empty() && p.back() >= n) throw Error(ErrorKind::UnknownNode, "positive id out of range");
  }
}

PositiveSets PositiveSets::anchors_only(std::size_t n) {
  PositiveSets sets;
  sets.positives.resize(n);
  sets.topology.resize(n);
  sets.semantic.resize(n);
  for (std::size_t u = 0; u < n; ++u) sets.positives[u] = {static_cast<std::uint32_t>(u)};
  return sets;
}

PositiveSets select_positives(const Matrix& sim_t, const Matrix& sim_s, std::size_t k_t, std::size_t k_s) {
  const std::size_t n = sim_t.rows();
  if (sim_t.cols() != n || !sim_s.same_shape(sim_t))
    throw Error(ErrorKind::ShapeMismatch, "similarity matrices must both be N x N");
  if ((k_t > 0 && k_t >= n) || (k_s > 0 && k_s >= n))
    throw Error(ErrorKind::KTooLarge, "k_t and k_s must be smaller than the number of target nodes (" +
                                          std::to_string(n) + ")");
  PositiveSets sets = PositiveSets::anchors_only(n);
  sets.k_t = k_t;
  sets.k_s = k_s;
  for (std::size_t u = 0; u < n; ++u) {
    sets.topology[u] = top_k_excluding(sim_t, u, k_t);
    sets.semantic[u] = top_k_excluding(sim_s, u, k_s);
    auto& p = sets.positives[u];
    p.insert(p.end(), sets.topology[u].begin(), sets.topology[u].end());
    p.insert(p.end(), sets.semantic[u].begin(), sets.semantic[u].end());
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }
  return sets;
}

void write_positives(const std::filesystem::path& path, const PositiveSets& sets) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  for (std::size_t u = 0; u < sets.num_nodes(); ++u) {
    out << u << '\t';
    for (std::size_t k = 0; k < sets.positives[u].size(); ++k) out << (k ? "," : "") << sets.positives[u][k];
    out << '\n';
  }
}

PositiveSets read_positives(const std::filesystem::path& path, std::size_t num_nodes) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  PositiveSets sets = PositiveSets::anchors_only(num_nodes);
  std::vector<bool> seen(num_nodes, false);
  std::string line;
  std::size_t line_no = 0;
  const auto bad = [&](const std::string& what) {
    throw Error(ErrorKind::MalformedRecord, path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) bad("expected node<TAB>ids");
    std::size_t u = 0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + tab, u);
    if (ec != std::errc() || p != line.data() + tab || u >= num_nodes) bad("bad anchor id");
    if (seen[u]) bad("duplicate anchor");
    seen[u] = true;
    std::vector<std::uint32_t> ids;
    std::stringstream rest(line.substr(tab + 1));
    std::string tok;
    while (std::getline(rest, tok, ',')) {
      std::uint32_t v = 0;
      auto [q, ec2] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec2 != std::errc() || q != tok.data() + tok.size() || v >= num_nodes) bad("bad positive id '" + tok + "'");
      ids.push_back(v);
    }
    sets.positives[u] = std::move(ids);
  }
  for (std::size_t u = 0; u < num_nodes; ++u)
    if (!seen[u]) throw Error(ErrorKind::MalformedRecord, path.string() + ": no line for node " + std::to_string(u));
  sets.validate();
  return sets;
}

}  // namespace hgcml
