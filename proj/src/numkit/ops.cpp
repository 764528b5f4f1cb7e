#include "flame/numkit/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace flame::nk {
namespace {

const Matrix* tangent_of(const Tensor& x) { return x.has_tangent() ? &x.tangent() : nullptr; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

void require_same_tape(const Tensor& a, const Tensor& b) {
  if (&a.tape() != &b.tape()) throw std::logic_error("tensors recorded on different tapes");
}

// Combines optional tangents of a binary op: ta_coef(ta) + tb_coef(tb).
template <typename FA, typename FB>
std::optional<Matrix> binary_tangent(const Tensor& a, const Tensor& b, FA fa, FB fb) {
  const Matrix* ta = tangent_of(a);
  const Matrix* tb = tangent_of(b);
  if (!ta && !tb) return std::nullopt;
  if (ta && tb) return Matrix(fa(*ta) + fb(*tb));
  if (ta) return Matrix(fa(*ta));
  return Matrix(fb(*tb));
}

// Elementwise unary op with pointwise derivative d(x).
template <typename F, typename D>
Tensor unary(const Tensor& x, F f, D d) {
  Matrix v = f(x.value());
  std::optional<Matrix> tan;
  if (const Matrix* tx = tangent_of(x)) tan = Matrix(d(x.value()).array() * tx->array());
  const std::size_t xi = x.id();
  return x.tape().record(std::move(v), std::move(tan), {x}, [xi, d](Tape& tape, const Matrix& g) {
    tape.accumulate_expr(xi, (g.array() * d(tape.value_of(xi)).array()).matrix());
  });
}

}  // namespace

Tensor operator+(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "add");
  auto tan = binary_tangent(a, b, [](const Matrix& t) { return t; }, [](const Matrix& t) { return t; });
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(a.value() + b.value(), std::move(tan), {a, b}, [ai, bi](Tape& tape, const Matrix& g) {
    tape.accumulate(ai, g);
    tape.accumulate(bi, g);
  });
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "sub");
  auto tan = binary_tangent(a, b, [](const Matrix& t) { return t; }, [](const Matrix& t) { return Matrix(-t); });
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(a.value() - b.value(), std::move(tan), {a, b}, [ai, bi](Tape& tape, const Matrix& g) {
    tape.accumulate(ai, g);
    tape.accumulate_expr(bi, -g);
  });
}

Tensor operator-(const Tensor& a) { return -1.0 * a; }

Tensor operator*(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "mul");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  auto tan = binary_tangent(
      a, b, [&](const Matrix& t) { return Matrix(t.array() * bv.array()); },
      [&](const Matrix& t) { return Matrix(t.array() * av.array()); });
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(Matrix(av.array() * bv.array()), std::move(tan), {a, b},
                         [ai, bi](Tape& tape, const Matrix& g) {
                           if (tape.needs_grad(ai)) tape.accumulate_expr(ai, (g.array() * tape.value_of(bi).array()).matrix());
                           if (tape.needs_grad(bi)) tape.accumulate_expr(bi, (g.array() * tape.value_of(ai).array()).matrix());
                         });
}

Tensor operator*(double c, const Tensor& a) {
  std::optional<Matrix> tan;
  if (const Matrix* ta = tangent_of(a)) tan = Matrix(c * *ta);
  const std::size_t ai = a.id();
  return a.tape().record(c * a.value(), std::move(tan), {a},
                         [ai, c](Tape& tape, const Matrix& g) { tape.accumulate_expr(ai, c * g); });
}

Tensor operator*(const Tensor& a, double c) { return c * a; }

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + ")");
  }
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  auto tan = binary_tangent(
      a, b, [&](const Matrix& t) { return Matrix(t * bv); }, [&](const Matrix& t) { return Matrix(av * t); });
  Matrix v(av.rows(), bv.cols());
  v.noalias() = av * bv;
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(std::move(v), std::move(tan), {a, b}, [ai, bi](Tape& tape, const Matrix& g) {
    if (tape.needs_grad(ai)) {
      Matrix ga(g.rows(), tape.value_of(bi).rows());
      ga.noalias() = g * tape.value_of(bi).transpose();
      tape.accumulate(ai, ga);
    }
    if (tape.needs_grad(bi)) {
      Matrix gb(tape.value_of(ai).cols(), g.cols());
      gb.noalias() = tape.value_of(ai).transpose() * g;
      tape.accumulate(bi, gb);
    }
  });
}

Tensor add_row(const Tensor& x, const Tensor& row) {
  require_same_tape(x, row);
  if (row.rows() != 1 || row.cols() != x.cols()) throw std::invalid_argument("add_row: row must be 1 x cols(x)");
  Matrix v = x.value().rowwise() + row.value().row(0);
  const Index n = x.rows();
  auto tan = binary_tangent(
      x, row, [](const Matrix& t) { return t; },
      [n](const Matrix& t) { return Matrix(t.replicate(n, 1)); });
  const std::size_t xi = x.id(), ri = row.id();
  return x.tape().record(std::move(v), std::move(tan), {x, row}, [xi, ri](Tape& tape, const Matrix& g) {
    tape.accumulate(xi, g);
    if (tape.needs_grad(ri)) tape.accumulate_expr(ri, g.colwise().sum());
  });
}

Tensor mul_col(const Tensor& x, const Tensor& col) {
  require_same_tape(x, col);
  if (col.cols() != 1 || col.rows() != x.rows()) throw std::invalid_argument("mul_col: col must be rows(x) x 1");
  const Matrix& xv = x.value();
  const Matrix& cv = col.value();
  Matrix v = xv.array().colwise() * cv.col(0).array();
  auto tan = binary_tangent(
      x, col, [&](const Matrix& t) { return Matrix(t.array().colwise() * cv.col(0).array()); },
      [&](const Matrix& t) { return Matrix(xv.array().colwise() * t.col(0).array()); });
  const std::size_t xi = x.id(), ci = col.id();
  return x.tape().record(std::move(v), std::move(tan), {x, col}, [xi, ci](Tape& tape, const Matrix& g) {
    if (tape.needs_grad(xi)) {
      tape.accumulate_expr(xi, (g.array().colwise() * tape.value_of(ci).col(0).array()).matrix());
    }
    if (tape.needs_grad(ci)) {
      tape.accumulate_expr(ci, (g.array() * tape.value_of(xi).array()).rowwise().sum().matrix());
    }
  });
}

Tensor square(const Tensor& x) {
  return unary(
      x, [](const Matrix& v) { return Matrix(v.array().square()); },
      [](const Matrix& v) { return Matrix(2.0 * v.array()); });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, [](const Matrix& v) { return Matrix(v.array().exp()); },
      [](const Matrix& v) { return Matrix(v.array().exp()); });
}

Tensor log(const Tensor& x) {
  return unary(
      x, [](const Matrix& v) { return Matrix(v.array().log()); },
      [](const Matrix& v) { return Matrix(v.array().inverse()); });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, [](const Matrix& v) { return Matrix(v.array().tanh()); },
      [](const Matrix& v) { return Matrix(1.0 - v.array().tanh().square()); });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, [](const Matrix& v) { return Matrix(v.array().max(0.0)); },
      [](const Matrix& v) { return Matrix((v.array() > 0.0).cast<double>()); });
}

void mish_inplace(Matrix& x) {
  // tanh(softplus(x)) = n / (n + 2) with n = e^x (e^x + 2); one exp per entry.
  auto e = x.array().min(20.0).exp();
  auto n = e * (e + 2.0);
  x.array() *= n / (n + 2.0);
}

Matrix mish_derivative(const Matrix& x) {
  using Array = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Array e = x.array().min(20.0).exp();
  Array n = e * (e + 2.0);
  Array th = n / (n + 2.0);
  Array sech2 = 4.0 * (n + 1.0) / (n + 2.0).square();
  Array sig = e / (1.0 + e);
  return (th + x.array() * sech2 * sig).matrix();
}

Tensor mish(const Tensor& x) {
  return unary(
      x,
      [](const Matrix& v) {
        Matrix out = v;
        mish_inplace(out);
        return out;
      },
      [](const Matrix& v) { return mish_derivative(v); });
}

Tensor sum(const Tensor& x) {
  Matrix v(1, 1);
  v(0, 0) = x.value().sum();
  std::optional<Matrix> tan;
  if (const Matrix* tx = tangent_of(x)) {
    tan = Matrix(1, 1);
    (*tan)(0, 0) = tx->sum();
  }
  const std::size_t xi = x.id();
  const Index r = x.rows(), c = x.cols();
  return x.tape().record(std::move(v), std::move(tan), {x}, [xi, r, c](Tape& tape, const Matrix& g) {
    tape.accumulate_expr(xi, Matrix::Constant(r, c, g(0, 0)));
  });
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.value().size());
  if (n == 0) throw std::invalid_argument("mean: empty tensor");
  return (1.0 / n) * sum(x);
}

Tensor row_sum(const Tensor& x) {
  Matrix v = x.value().rowwise().sum();
  std::optional<Matrix> tan;
  if (const Matrix* tx = tangent_of(x)) tan = Matrix(tx->rowwise().sum());
  const std::size_t xi = x.id();
  const Index c = x.cols();
  return x.tape().record(std::move(v), std::move(tan), {x},
                         [xi, c](Tape& tape, const Matrix& g) { tape.accumulate_expr(xi, g.replicate(1, c)); });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const Index rows = parts[0].rows();
  Index cols = 0;
  bool any_tangent = false;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row counts differ");
    require_same_tape(parts[0], p);
    cols += p.cols();
    any_tangent = any_tangent || p.has_tangent();
  }
  Matrix v(rows, cols);
  std::optional<Matrix> tan;
  if (any_tangent) tan = Matrix::Zero(rows, cols);
  std::vector<std::size_t> ids;
  std::vector<Index> offsets;
  Index off = 0;
  for (const auto& p : parts) {
    v.middleCols(off, p.cols()) = p.value();
    if (p.has_tangent()) tan->middleCols(off, p.cols()) = p.tangent();
    ids.push_back(p.id());
    offsets.push_back(off);
    off += p.cols();
  }
  return parts[0].tape().record(std::move(v), std::move(tan), parts,
                                [ids, offsets](Tape& tape, const Matrix& g) {
                                  for (std::size_t i = 0; i < ids.size(); ++i) {
                                    if (!tape.needs_grad(ids[i])) continue;
                                    tape.accumulate_expr(ids[i], g.middleCols(offsets[i], tape.value_of(ids[i]).cols()));
                                  }
                                });
}

Tensor sinusoidal(const Tensor& t, const Vector& freqs) {
  if (t.cols() != 1) throw std::invalid_argument("sinusoidal: expected a column of times");
  const Index k = freqs.size();
  const Matrix& tv = t.value();
  Matrix phase = tv * freqs.transpose();  // n x k
  Matrix v(tv.rows(), 2 * k);
  v.leftCols(k) = phase.array().sin().matrix();
  v.rightCols(k) = phase.array().cos().matrix();
  // d/dt [sin(w t), cos(w t)] = [w cos(w t), -w sin(w t)]
  Matrix dphase(tv.rows(), 2 * k);
  dphase.leftCols(k) = (v.rightCols(k).array().rowwise() * freqs.transpose().array()).matrix();
  dphase.rightCols(k) = -(v.leftCols(k).array().rowwise() * freqs.transpose().array()).matrix();
  std::optional<Matrix> tan;
  if (const Matrix* tt = tangent_of(t)) tan = Matrix(dphase.array().colwise() * tt->col(0).array());
  const std::size_t ti = t.id();
  return t.tape().record(std::move(v), std::move(tan), {t}, [ti, dphase](Tape& tape, const Matrix& g) {
    tape.accumulate_expr(ti, (g.array() * dphase.array()).rowwise().sum().matrix());
  });
}

Tensor stop_gradient(const Tensor& x) {
  std::optional<Matrix> tan;
  if (x.has_tangent()) tan = x.tangent();
  return x.tape().record(x.value(), std::move(tan), std::span<const Tensor>{}, nullptr);
}

}  // namespace flame::nk
