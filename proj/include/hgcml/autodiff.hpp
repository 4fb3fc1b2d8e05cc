#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hgcml/matrix.hpp"

namespace hgcml {

/// A trainable tensor with its gradient slot.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad = Matrix(value.rows(), value.cols()); }
};

/// Dense boolean row mask used by masked reductions (N x M bytes).
class RowMask {
 public:
  RowMask() = default;
  RowMask(std::size_t rows, std::size_t cols, bool fill) : rows_(rows), cols_(cols), bits_(rows * cols, fill ? 1 : 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool operator()(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v) { bits_[r * cols_ + c] = v ? 1 : 0; }
  RowMask inverted() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<unsigned char> bits_;
};

class Tape;

/// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  double scalar() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Dynamically recorded reverse-mode tape. One tape per forward/backward
/// pass; parameters receive accumulated gradients when backward() runs.
class Tape {
 public:
  using Backward = std::function<void(Tape&)>;

  Var constant(Matrix value);
  Var parameter(Parameter& p);

  /// Seeds d(loss)/d(loss) = 1 and propagates; `loss` must be 1x1.
  void backward(Var loss);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of a node, allocated on first use.
  Matrix& grad(std::size_t id);

  /// Records an op result. `backward` may be empty when no input requires grad.
  Var record(Matrix value, bool requires_grad, Backward backward);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
    Parameter* param = nullptr;
  };
  std::vector<Node> nodes_;
};

// Differentiable ops. Shapes are checked; ShapeMismatch is thrown on misuse.
Var matmul(Var a, Var b);
/// a * b^T
Var matmul_nt(Var a, Var b);
Var transpose(Var a);
Var spmm(std::shared_ptr<const SparseMatrix> a, Var x);
/// Elementwise add; `b` may also be a 1 x cols row broadcast over rows of `a`.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double s);
Var relu(Var a);
Var sigmoid(Var a);
Var exp(Var a);
/// log(max(x, 1e-12)); gradient is zero where the clamp is active.
Var log(Var a);
/// log(1 + e^x), evaluated stably.
Var softplus(Var a);
Var logaddexp(Var a, Var b);
Var row_l2_normalize(Var a);
/// Per-row cosine similarity, N x 1.
Var cosine_rowwise(Var a, Var b);
/// Column means, 1 x cols.
Var mean_rows(Var a);
/// h_i^T B s for every row h_i of `h`; `s` is 1 x d. Returns N x 1.
Var bilinear(Var h, Var b, Var s);
Var concat_cols(const std::vector<Var>& parts);
Var sum(Var a);
Var mean(Var a);
/// log sum_{j : mask(i,j)} exp(x_ij) per row, shifted by the masked row max.
/// Rows with an empty mask yield -inf. Pass nullptr to reduce over all columns.
Var row_logsumexp(Var x, std::shared_ptr<const RowMask> mask = nullptr);

/// Central finite differences against reverse-mode gradients over every entry
/// of `params`. Returns max |g_ad - g_fd| / max(1, |g_fd|).
double grad_check(const std::function<Var(Tape&)>& f, const std::vector<Parameter*>& params, double eps = 1e-5);

}  // namespace hgcml
