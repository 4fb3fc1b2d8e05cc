#include "hgcml/model.hpp"

#include <cmath>

#include "hgcml/error.hpp"

namespace hgcml {

FusionMode parse_fusion_mode(const std::string& s) {
  if (s == "sum") return FusionMode::Sum;
  if (s == "concat") return FusionMode::Concat;
  throw Error(ErrorKind::ModeInvalid, "fusion mode must be 'sum' or 'concat', got '" + s + "'");
}

std::string to_string(FusionMode mode) { return mode == FusionMode::Sum ? "sum" : "concat"; }

SparseMatrix normalized_adjacency(const SparseMatrix& a) {
  const std::size_t n = a.rows();
  std::vector<SparseMatrix::Entry> entries;
  entries.reserve(a.nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) entries.push_back({static_cast<std::uint32_t>(i), cols[k], vals[k]});
    entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), 1.0});
  }
  SparseMatrix tilde = SparseMatrix::from_entries(n, n, std::move(entries));
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (double v : tilde.row_values(i)) deg += v;
    inv_sqrt[i] = 1.0 / std::sqrt(deg);
  }
  auto& vals = tilde.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = tilde.row_ptr()[i]; k < tilde.row_ptr()[i + 1]; ++k)
      vals[k] *= inv_sqrt[i] * inv_sqrt[tilde.col_idx()[k]];
  return tilde;
}

GraphInput GraphInput::from_view(const MetapathView& view) {
  return {std::make_shared<const SparseMatrix>(normalized_adjacency(view.adjacency)), view.features};
}

Var gcn_forward(const GraphInput& input, Var weight) {
  Tape& tape = *weight.tape;
  Var x = tape.constant(*input.features);
  return relu(spmm(input.a_hat, matmul(x, weight)));
}

Matrix gcn_forward(const GraphInput& input, const Matrix& weight) {
  Matrix h = spmm(*input.a_hat, matmul(*input.features, weight));
  for (double& v : h.data()) v = v > 0.0 ? v : 0.0;
  return h;
}

Var project(Var h, const ProjectorVars& proj) {
  Var hidden = relu(add(matmul(h, proj.w1), proj.b1));
  return add(matmul(hidden, proj.w2), proj.b2);
}

Var readout(Var h) { return mean_rows(h); }

Var discriminator_logits(Var h, Var s, const ProjectorVars& proj, Var bilinear_weight) {
  return bilinear(project(h, proj), bilinear_weight, project(s, proj));
}

Var discriminate(Var h, Var s, const ProjectorVars& proj, Var bilinear_weight) {
  return sigmoid(discriminator_logits(h, s, proj, bilinear_weight));
}

Matrix fuse(const std::vector<Matrix>& per_view, FusionMode mode) {
  if (per_view.empty()) throw Error(ErrorKind::ShapeMismatch, "fusion needs at least one view");
  const std::size_t rows = per_view.front().rows();
  for (const Matrix& m : per_view)
    if (m.rows() != rows) throw Error(ErrorKind::ShapeMismatch, "fused views differ in row count");
  if (mode == FusionMode::Sum) {
    Matrix out = per_view.front();
    for (std::size_t v = 1; v < per_view.size(); ++v) {
      if (!per_view[v].same_shape(out)) throw Error(ErrorKind::ShapeMismatch, "sum fusion needs equal dimensions");
      for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] += per_view[v].data()[k];
    }
    return out;
  }
  std::size_t cols = 0;
  for (const Matrix& m : per_view) cols += m.cols();
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Matrix& m : per_view) {
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(m.row(i).begin(), m.row(i).end(), out.row(i).begin() + static_cast<std::ptrdiff_t>(offset));
    offset += m.cols();
  }
  return out;
}

namespace {

std::vector<std::string> make_encoder_names(const ModelConfig& config, const std::vector<std::string>& views) {
  std::vector<std::string> names;
  for (const auto& v : views) names.push_back(config.share_encoder ? "enc.shared.W" : "enc." + v + ".W");
  return names;
}

}  // namespace

Model::Model(const ModelConfig& config, std::vector<std::string> view_names, std::size_t input_dim, Rng& rng)
    : config_(config), view_names_(std::move(view_names)) {
  if (config_.dim == 0) throw Error(ErrorKind::Config, "embedding dimension must be positive");
  if (view_names_.empty()) throw Error(ErrorKind::Config, "at least one metapath is required");
  encoder_names_ = make_encoder_names(config_, view_names_);
  const std::size_t d = config_.dim;
  for (const auto& name : encoder_names_)
    if (!params_.contains(name)) params_.add(name, xavier_init(input_dim, d, rng));
  params_.add("proj.W1", xavier_init(d, d, rng));
  params_.add("proj.b1", Matrix(1, d));
  params_.add("proj.W2", xavier_init(d, d, rng));
  params_.add("proj.b2", Matrix(1, d));
  params_.add("disc.B", xavier_init(d, d, rng));
}

Model::Model(const ModelConfig& config, std::vector<std::string> view_names, ParamStore params)
    : config_(config), view_names_(std::move(view_names)), params_(std::move(params)) {
  encoder_names_ = make_encoder_names(config_, view_names_);
  check_layout();
}

void Model::check_layout() const {
  const std::size_t d = config_.dim;
  const auto expect = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    if (!params_.contains(name)) throw Error(ErrorKind::MalformedRecord, "checkpoint lacks tensor " + name);
    const Matrix& v = params_.at(name).value;
    if (v.rows() != rows || v.cols() != cols)
      throw Error(ErrorKind::ShapeMismatch, "checkpoint tensor " + name + " has an unexpected shape");
  };
  const std::size_t d_in = params_.contains(encoder_names_.front()) ? params_.at(encoder_names_.front()).value.rows() : 0;
  for (const auto& name : encoder_names_) expect(name, d_in, d);
  expect("proj.W1", d, d);
  expect("proj.b1", 1, d);
  expect("proj.W2", d, d);
  expect("proj.b2", 1, d);
  expect("disc.B", d, d);
}

std::size_t Model::input_dim() const { return params_.at(encoder_names_.front()).value.rows(); }

ModelVars Model::bind(Tape& tape) {
  ModelVars vars;
  std::map<std::string, Var> bound;
  for (Parameter& p : params_) bound.emplace(p.name, tape.parameter(p));
  for (const auto& name : encoder_names_) vars.encoders.push_back(bound.at(name));
  vars.proj = {bound.at("proj.W1"), bound.at("proj.b1"), bound.at("proj.W2"), bound.at("proj.b2")};
  vars.disc = bound.at("disc.B");
  return vars;
}

std::vector<Matrix> Model::embed_views(const std::vector<GraphInput>& inputs) const {
  if (inputs.size() != view_names_.size()) throw Error(ErrorKind::ShapeMismatch, "one input per view is required");
  std::vector<Matrix> out;
  for (std::size_t m = 0; m < inputs.size(); ++m) {
    const Matrix& w = params_.at(encoder_names_[m]).value;
    if (inputs[m].features->cols() != w.rows())
      throw Error(ErrorKind::ShapeMismatch, "feature dimension does not match the encoder");
    out.push_back(gcn_forward(inputs[m], w));
  }
  return out;
}

Matrix Model::embed(const std::vector<GraphInput>& inputs) const { return fuse(embed_views(inputs), config_.fusion); }

}  // namespace hgcml
