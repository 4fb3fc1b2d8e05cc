#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hgcml/autodiff.hpp"
#include "hgcml/hin.hpp"
#include "hgcml/params.hpp"

namespace hgcml {

enum class FusionMode { Sum, Concat };

FusionMode parse_fusion_mode(const std::string& s);
std::string to_string(FusionMode mode);

struct ModelConfig {
  std::size_t dim = 64;
  bool share_encoder = false;
  FusionMode fusion = FusionMode::Sum;
};

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
SparseMatrix normalized_adjacency(const SparseMatrix& a);

/// Encoder input for one (possibly corrupted) view.
struct GraphInput {
  std::shared_ptr<const SparseMatrix> a_hat;
  std::shared_ptr<const Matrix> features;

  static GraphInput from_view(const MetapathView& view);
  std::size_t num_nodes() const { return a_hat->rows(); }
};

struct ProjectorVars {
  Var w1, b1, w2, b2;
};

/// ReLU(A_hat X W), no bias.
Var gcn_forward(const GraphInput& input, Var weight);
Matrix gcn_forward(const GraphInput& input, const Matrix& weight);

/// Two-layer MLP applied row-wise: ReLU(H W1 + b1) W2 + b2.
Var project(Var h, const ProjectorVars& proj);

/// Mean pooling over nodes.
Var readout(Var h);

/// Bilinear score rho(h_i)^T B rho(s) for each row of h, before the sigmoid.
Var discriminator_logits(Var h, Var s, const ProjectorVars& proj, Var bilinear_weight);
/// sigmoid of discriminator_logits.
Var discriminate(Var h, Var s, const ProjectorVars& proj, Var bilinear_weight);

Matrix fuse(const std::vector<Matrix>& per_view, FusionMode mode);

/// Parameters of one model bound to a tape.
struct ModelVars {
  std::vector<Var> encoders;  // one per view (aliases when the encoder is shared)
  ProjectorVars proj;
  Var disc;
};

/// Per-view GCN encoders, shared projector and bilinear discriminator.
class Model {
 public:
  Model(const ModelConfig& config, std::vector<std::string> view_names, std::size_t input_dim, Rng& rng);
  /// Rebuilds a model around stored parameters; names and shapes are checked.
  Model(const ModelConfig& config, std::vector<std::string> view_names, ParamStore params);

  const ModelConfig& config() const { return config_; }
  const std::vector<std::string>& view_names() const { return view_names_; }
  std::size_t input_dim() const;
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  const std::string& encoder_name(std::size_t view) const { return encoder_names_.at(view); }

  ModelVars bind(Tape& tape);

  /// Per-view embeddings H_m on the given (uncorrupted) inputs.
  std::vector<Matrix> embed_views(const std::vector<GraphInput>& inputs) const;
  /// Late fusion of embed_views under the configured mode.
  Matrix embed(const std::vector<GraphInput>& inputs) const;

 private:
  void check_layout() const;

  ModelConfig config_;
  std::vector<std::string> view_names_;
  std::vector<std::string> encoder_names_;
  ParamStore params_;
};

}  // namespace hgcml
