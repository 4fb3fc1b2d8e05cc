#include "hgcml/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hgcml/error.hpp"

namespace hgcml {

namespace {

constexpr double kLogFloor = 1e-12;
constexpr double kNormFloor = 1e-12;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::ShapeMismatch, what);
}

Tape& tape_of(Var a) {
  require(a.tape != nullptr, "variable is not attached to a tape");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  require(a.tape != nullptr && a.tape == b.tape, "variables belong to different tapes");
  return *a.tape;
}

double softplus_value(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid_value(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Applies a pointwise map f with derivative df (evaluated on input x and output y).
template <typename F, typename DF>
Var pointwise(Var a, F f, DF df) {
  Tape& t = tape_of(a);
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = f(x.data()[i]);
  const std::size_t ia = a.id;
  const std::size_t out = t.size();
  const bool rg = t.requires_grad(ia);
  return t.record(std::move(y), rg, [ia, out, df](Tape& tp) {
    const Matrix& xv = tp.value(ia);
    const Matrix& yv = tp.value(out);
    const Matrix& g = tp.grad(out);
    Matrix& ga = tp.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * df(xv.data()[i], yv.data()[i]);
  });
}

}  // namespace

RowMask RowMask::inverted() const {
  RowMask m = *this;
  for (auto& b : m.bits_) b = b ? 0 : 1;
  return m;
}

const Matrix& Var::value() const { return tape->value(id); }

double Var::scalar() const {
  const Matrix& v = value();
  require(v.rows() == 1 && v.cols() == 1, "scalar() on a non 1x1 value");
  return v(0, 0);
}

Var Tape::constant(Matrix value) { return record(std::move(value), false, {}); }

Var Tape::parameter(Parameter& p) {
  Var v = record(p.value, true, {});
  nodes_[v.id].param = &p;
  return v;
}

Var Tape::record(Matrix value, bool requires_grad, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

Matrix& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols() || n.grad.empty())
    n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  require(loss.tape == this, "loss belongs to another tape");
  const Matrix& lv = value(loss.id);
  require(lv.rows() == 1 && lv.cols() == 1, "backward() needs a 1x1 loss");
  if (!nodes_[loss.id].requires_grad) return;
  grad(loss.id)(0, 0) += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this);
    if (n.param != nullptr) {
      Matrix& pg = n.param->grad;
      if (!pg.same_shape(n.value)) pg = Matrix(n.value.rows(), n.value.cols());
      for (std::size_t k = 0; k < pg.size(); ++k) pg.data()[k] += n.grad.data()[k];
    }
  }
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  const std::size_t ia = a.id, ib = b.id, out = t.size();
  const bool rg = t.requires_grad(ia) || t.requires_grad(ib);
  return t.record(hgcml::matmul(a.value(), b.value()), rg, [ia, ib, out](Tape& tp) {
    const Matrix& g = tp.grad(out);
    const Matrix& av = tp.value(ia);
    const Matrix& bv = tp.value(ib);
    if (tp.requires_grad(ia)) {
      Matrix& ga = tp.grad(ia);  // g * b^T
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t k = 0; k < bv.rows(); ++k) {
          double acc = 0.0;
          for (std::size_t j = 0; j < g.cols(); ++j) acc += g(i, j) * bv(k, j);
          ga(i, k) += acc;
        }
    }
    if (tp.requires_grad(ib)) {
      Matrix& gb = tp.grad(ib);  // a^T * g
      for (std::size_t i = 0; i < av.rows(); ++i)
        for (std::size_t k = 0; k < av.cols(); ++k) {
          const double aik = av(i, k);
          if (aik == 0.0) continue;
          for (std::size_t j = 0; j < g.cols(); ++j) gb(k, j) += aik * g(i, j);
        }
    }
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require(a.cols() == b.cols(), "matmul_nt: column counts differ");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Matrix y(av.rows(), bv.rows());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < bv.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < av.cols(); ++k) acc += av(i, k) * bv(j, k);
      y(i, j) = acc;
    }
  const std::size_t ia = a.id, ib = b.id, out = t.size();
  const bool rg = t.requires_grad(ia) || t.requires_grad(ib);
  return t.record(std::move(y), rg, [ia, ib, out](Tape& tp) {
    const Matrix& g = tp.grad(out);
    const Matrix& av = tp.value(ia);
    const Matrix& bv = tp.value(ib);
    if (tp.requires_grad(ia)) {
      Matrix& ga = tp.grad(ia);  // g * b
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) {
          const double gij = g(i, j);
          if (gij == 0.0) continue;
          for (std::size_t k = 0; k < bv.cols(); ++k) ga(i, k) += gij * bv(j, k);
        }
    }
    if (tp.requires_grad(ib)) {
      Matrix& gb = tp.grad(ib);  // g^T * a
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) {
          const double gij = g(i, j);
          if (gij == 0.0) continue;
          for (std::size_t k = 0; k < av.cols(); ++k) gb(j, k) += gij * av(i, k);
        }
    }
  });
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id, out = t.size();
  return t.record(a.value().transposed(), t.requires_grad(ia), [ia, out](Tape& tp) {
    const Matrix& g = tp.grad(out);
    Matrix& ga = tp.grad(ia);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) ga(j, i) += g(i, j);
  });
}

Var spmm(std::shared_ptr<const SparseMatrix> a, Var x) {
  Tape& t = tape_of(x);
  require(a != nullptr && a->cols() == x.rows(), "spmm: inner dimensions differ");
  const std::size_t ix = x.id, out = t.size();
  return t.record(hgcml::spmm(*a, x.value()), t.requires_grad(ix), [a, ix, out](Tape& tp) {
    Matrix gx = spmm_transposed(*a, tp.grad(out));
    Matrix& dst = tp.grad(ix);
    for (std::size_t k = 0; k < gx.size(); ++k) dst.data()[k] += gx.data()[k];
  });
}

namespace {

Var add_scaled(Var a, Var b, double sign) {
  Tape& t = tape_of(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const bool broadcast = !av.same_shape(bv);
  require(!broadcast || (bv.rows() == 1 && bv.cols() == av.cols()), "add: shapes not broadcastable");
  Matrix y = av;
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += sign * bv(broadcast ? 0 : i, j);
  const std::size_t ia = a.id, ib = b.id, out = t.size();
  const bool rg = t.requires_grad(ia) || t.requires_grad(ib);
  return t.record(std::move(y), rg, [ia, ib, out, broadcast, sign](Tape& tp) {
    const Matrix& g = tp.grad(out);
    if (tp.requires_grad(ia)) {
      Matrix& ga = tp.grad(ia);
      for (std::size_t k = 0; k < g.size(); ++k) ga.data()[k] += g.data()[k];
    }
    if (tp.requires_grad(ib)) {
      Matrix& gb = tp.grad(ib);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gb(broadcast ? 0 : i, j) += sign * g(i, j);
    }
  });
}

}  // namespace

Var add(Var a, Var b) { return add_scaled(a, b, 1.0); }
Var sub(Var a, Var b) { return add_scaled(a, b, -1.0); }

Var scale(Var a, double s) {
  return pointwise(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var relu(Var a) {
  return pointwise(a, [](double x) { return x > 0.0 ? x : 0.0; },
                   [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
  return pointwise(a, sigmoid_value, [](double, double y) { return y * (1.0 - y); });
}

Var exp(Var a) {
  return pointwise(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return pointwise(a, [](double x) { return std::log(std::max(x, kLogFloor)); },
                   [](double x, double) { return x > kLogFloor ? 1.0 / x : 0.0; });
}

Var softplus(Var a) {
  return pointwise(a, softplus_value, [](double x, double) { return sigmoid_value(x); });
}

Var logaddexp(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require(a.value().same_shape(b.value()), "logaddexp: shape mismatch");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Matrix y(av.rows(), av.cols());
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double x1 = av.data()[k], x2 = bv.data()[k];
    const double m = std::max(x1, x2);
    y.data()[k] = std::isinf(m) && m < 0 ? m : m + std::log(std::exp(x1 - m) + std::exp(x2 - m));
  }
  const std::size_t ia = a.id, ib = b.id, out = t.size();
  const bool rg = t.requires_grad(ia) || t.requires_grad(ib);
  return t.record(std::move(y), rg, [ia, ib, out](Tape& tp) {
    const Matrix& g = tp.grad(out);
    const Matrix& yv = tp.value(out);
    const Matrix& av = tp.value(ia);
    const Matrix& bv = tp.value(ib);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double y = yv.data()[k];
      const double wa = std::isinf(y) ? 0.0 : std::exp(av.data()[k] - y);
      const double wb = std::isinf(y) ? 0.0 : std::exp(bv.data()[k] - y);
      if (tp.requires_grad(ia)) tp.grad(ia).data()[k] += g.data()[k] * wa;
      if (tp.requires_grad(ib)) tp.grad(ib).data()[k] += g.data()[k] * wb;
    }
  });
}

Var row_l2_normalize(Var a) {
  Tape& t = tape_of(a);
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  std::vector<double> norms(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double ss = 0.0;
    for (double v : x.row(i)) ss += v * v;
    norms[i] = std::max(std::sqrt(ss), kNormFloor);
    for (std::size_t j = 0; j < x.cols(); ++j) y(i, j) = x(i, j) / norms[i];
  }
  const std::size_t ia = a.id, out = t.size();
  return t.record(std::move(y), t.requires_grad(ia), [ia, out, norms = std::move(norms)](Tape& tp) {
    const Matrix& g = tp.grad(out);
    const Matrix& yv = tp.value(out);
    Matrix& ga = tp.grad(ia);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      // d(x/|x|) = (g - y (y.g)) / |x|, unclamped branch.
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) dot += yv(i, j) * g(i, j);
      const bool clamped = norms[i] <= kNormFloor;
      for (std::size_t j = 0; j < g.cols(); ++j)
        ga(i, j) += clamped ? g(i, j) / norms[i] : (g(i, j) - yv(i, j) * dot) / norms[i];
    }
  });
}

Var cosine_rowwise(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require(a.value().same_shape(b.value()), "cosine_rowwise: shape mismatch");
  Var an = row_l2_normalize(a);
  Var bn = row_l2_normalize(b);
  const Matrix& av = an.value();
  const Matrix& bv = bn.value();
  Matrix y(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < av.cols(); ++j) acc += av(i, j) * bv(i, j);
    y(i, 0) = acc;
  }
  const std::size_t ia = an.id, ib = bn.id, out = t.size();
  const bool rg = t.requires_grad(ia) || t.requires_grad(ib);
  return t.record(std::move(y), rg, [ia, ib, out](Tape& tp) {
    const Matrix& g = tp.grad(out);
    const Matrix& av = tp.value(ia);
    const Matrix& bv = tp.value(ib);
    for (std::size_t i = 0; i < av.rows(); ++i)
      for (std::size_t j = 0; j < av.cols(); ++j) {
        if (tp.requires_grad(ia)) tp.grad(ia)(i, j) += g(i, 0) * bv(i, j);
        if (tp.requires_grad(ib)) tp.grad(ib)(i, j) += g(i, 0) * av(i, j);
      }
  });
}

Var mean_rows(Var a) {
  Tape& t = tape_of(a);
  const Matrix& x = a.value();
  require(x.rows() > 0, "mean_rows: empty input");
  Matrix y(1, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) y(0, j) += x(i, j);
  const double inv = 1.0 / static_cast<double>(x.rows());
  for (double& v : y.data()) v *= inv;
  const std::size_t ia = a.id, out = t.size();
  return t.record(std::move(y), t.requires_grad(ia), [ia, out, inv](Tape& tp) {
    const Matrix& g = tp.grad(out);
    Matrix& ga = tp.grad(ia);
    for (std::size_t i = 0; i < ga.rows(); ++i)
      for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(0, j) * inv;
  });
}

Var bilinear(Var h, Var b, Var s) {
  Tape& t = tape_of(h, b);
  require(s.tape == &t, "bilinear: variables belong to different tapes");
  const Matrix& hv = h.value();
  const Matrix& bv = b.value();
  const Matrix& sv = s.value();
  require(sv.rows() == 1 && bv.rows() == hv.cols() && bv.cols() == sv.cols(), "bilinear: shape mismatch");
  // Bs as a column, then each row dotted with it.
  std::vector<double> bs(bv.rows(), 0.0);
  for (std::size_t k = 0; k < bv.rows(); ++k)
    for (std::size_t j = 0; j < bv.cols(); ++j) bs[k] += bv(k, j) * sv(0, j);
  Matrix y(hv.rows(), 1);
  for (std::size_t i = 0; i < hv.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < hv.cols(); ++k) acc += hv(i, k) * bs[k];
    y(i, 0) = acc;
  }
  const std::size_t ih = h.id, ib = b.id, is = s.id, out = t.size();
  const bool rg = t.requires_grad(ih) || t.requires_grad(ib) || t.requires_grad(is);
  return t.record(std::move(y), rg, [ih, ib, is, out, bs = std::move(bs)](Tape& tp) {
    const Matrix& g = tp.grad(out);
    const Matrix& hv = tp.value(ih);
    const Matrix& bv = tp.value(ib);
    const Matrix& sv = tp.value(is);
    // u = sum_i g_i h_i  (so d/dB = u s^T, d/ds = B^T u)
    std::vector<double> u(hv.cols(), 0.0);
    for (std::size_t i = 0; i < hv.rows(); ++i)
      for (std::size_t k = 0; k < hv.cols(); ++k) u[k] += g(i, 0) * hv(i, k);
    if (tp.requires_grad(ih)) {
      Matrix& gh = tp.grad(ih);
      for (std::size_t i = 0; i < hv.rows(); ++i)
        for (std::size_t k = 0; k < hv.cols(); ++k) gh(i, k) += g(i, 0) * bs[k];
    }
    if (tp.requires_grad(ib)) {
      Matrix& gb = tp.grad(ib);
      for (std::size_t k = 0; k < bv.rows(); ++k)
        for (std::size_t j = 0; j < bv.cols(); ++j) gb(k, j) += u[k] * sv(0, j);
    }
    if (tp.requires_grad(is)) {
      Matrix& gs = tp.grad(is);
      for (std::size_t k = 0; k < bv.rows(); ++k)
        for (std::size_t j = 0; j < bv.cols(); ++j) gs(0, j) += bv(k, j) * u[k];
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  Tape& t = tape_of(parts.front());
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  bool rg = false;
  std::vector<std::size_t> ids, offsets;
  for (const Var& p : parts) {
    require(p.tape == &t && p.rows() == rows, "concat_cols: row counts differ");
    ids.push_back(p.id);
    offsets.push_back(cols);
    cols += p.cols();
    rg = rg || t.requires_grad(p.id);
  }
  Matrix y(rows, cols);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Matrix& v = parts[p].value();
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(v.row(i).begin(), v.row(i).end(), y.row(i).begin() + static_cast<std::ptrdiff_t>(offsets[p]));
  }
  const std::size_t out = t.size();
  return t.record(std::move(y), rg, [ids, offsets, out](Tape& tp) {
    const Matrix& g = tp.grad(out);
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (!tp.requires_grad(ids[p])) continue;
      Matrix& gp = tp.grad(ids[p]);
      for (std::size_t i = 0; i < gp.rows(); ++i)
        for (std::size_t j = 0; j < gp.cols(); ++j) gp(i, j) += g(i, offsets[p] + j);
    }
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double acc = 0.0;
  for (double v : a.value().data()) acc += v;
  const std::size_t ia = a.id, out = t.size();
  return t.record(Matrix(1, 1, acc), t.requires_grad(ia), [ia, out](Tape& tp) {
    const double g = tp.grad(out)(0, 0);
    for (double& v : tp.grad(ia).data()) v += g;
  });
}

Var mean(Var a) {
  require(a.value().size() > 0, "mean: empty input");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var row_logsumexp(Var x, std::shared_ptr<const RowMask> mask) {
  Tape& t = tape_of(x);
  const Matrix& xv = x.value();
  if (mask) require(mask->rows() == xv.rows() && mask->cols() == xv.cols(), "row_logsumexp: mask shape mismatch");
  const auto on = [&mask](std::size_t i, std::size_t j) { return !mask || (*mask)(i, j); };
  Matrix y(xv.rows(), 1);
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < xv.cols(); ++j)
      if (on(i, j)) m = std::max(m, xv(i, j));
    if (std::isinf(m)) {
      y(i, 0) = m;
      continue;
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < xv.cols(); ++j)
      if (on(i, j)) acc += std::exp(xv(i, j) - m);
    y(i, 0) = m + std::log(acc);
  }
  const std::size_t ix = x.id, out = t.size();
  return t.record(std::move(y), t.requires_grad(ix), [ix, out, mask](Tape& tp) {
    const Matrix& g = tp.grad(out);
    const Matrix& xv = tp.value(ix);
    const Matrix& yv = tp.value(out);
    Matrix& gx = tp.grad(ix);
    for (std::size_t i = 0; i < xv.rows(); ++i) {
      if (std::isinf(yv(i, 0))) continue;
      for (std::size_t j = 0; j < xv.cols(); ++j)
        if (!mask || (*mask)(i, j)) gx(i, j) += g(i, 0) * std::exp(xv(i, j) - yv(i, 0));
    }
  });
}

double grad_check(const std::function<Var(Tape&)>& f, const std::vector<Parameter*>& params, double eps) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var loss = f(tape);
    tape.backward(loss);
  }
  const auto evaluate = [&f]() {
    Tape tape;
    return f(tape).scalar();
  };
  double worst = 0.0;
  for (Parameter* p : params) {
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      double& slot = p->value.data()[k];
      const double saved = slot;
      slot = saved + eps;
      const double up = evaluate();
      slot = saved - eps;
      const double down = evaluate();
      slot = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double ad = p->grad.data()[k];
      worst = std::max(worst, std::abs(ad - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return worst;
}

}  // namespace hgcml
