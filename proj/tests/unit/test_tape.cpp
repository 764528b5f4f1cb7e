#include <doctest.h>

#include <cmath>
#include <vector>

#include "fd.hpp"
#include "flame/netlib/mlp.hpp"
#include "flame/numkit/ops.hpp"
#include "flame/numkit/rng.hpp"

using namespace flame;
using flame::testing::fd_directional;
using flame::testing::fd_gradient;
using flame::testing::rel_err;

namespace {

Matrix row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) m(0, i++) = x;
  return m;
}

}  // namespace

TEST_CASE("backward of sum of squares") {
  nk::Tape tape;
  auto x = tape.variable(row({1, 2, 3}));
  auto loss = nk::sum(x * x);
  tape.backward(loss);
  CHECK(loss.item() == 14.0);
  CHECK(x.grad().isApprox(row({2, 4, 6})));
}

TEST_CASE("backward of a constant leaves zero gradients") {
  nk::Tape tape;
  auto x = tape.variable(row({1, 2}));
  nk::Parameter p("p", row({3.0}));
  p.zero_grad();
  auto c = tape.constant(row({5.0}));
  tape.backward(c);
  CHECK(x.grad().isZero());
  CHECK(p.grad.isZero());
}

TEST_CASE("backward rejects non-scalar loss") {
  nk::Tape tape;
  auto x = tape.variable(row({1, 2}));
  CHECK_THROWS_AS(tape.backward(x * x), std::invalid_argument);
}

TEST_CASE("repeated backward accumulates into parameters") {
  nk::Parameter p("w", row({2.0}));
  p.zero_grad();
  for (int k = 0; k < 2; ++k) {
    nk::Tape tape;
    auto w = tape.param(p);
    tape.backward(nk::sum(nk::square(w)));
  }
  CHECK(p.grad(0, 0) == doctest::Approx(8.0));
}

TEST_CASE("jvp of elementwise square and of a linear map") {
  const std::vector<Matrix> x{row({1, 2})};
  const std::vector<Matrix> v{row({1, 0})};
  auto r = nk::jvp([](nk::Tape&, std::span<const nk::Tensor> in) { return in[0] * in[0]; }, x, v);
  CHECK(r.tangent.isApprox(row({2, 0})));

  Matrix m(2, 3);
  m << 1, -2, 0.5, 3, 4, -1;
  const std::vector<Matrix> x2{row({0.3, -0.7})};
  const std::vector<Matrix> v2{row({2.0, 1.5})};
  auto lin = nk::jvp(
      [&](nk::Tape& t, std::span<const nk::Tensor> in) { return nk::matmul(in[0], t.constant(m)); }, x2, v2);
  CHECK(lin.tangent.isApprox(v2[0] * m));
}

TEST_CASE("jvp rejects mismatched tangent shapes") {
  const std::vector<Matrix> x{row({1, 2})};
  const std::vector<Matrix> v{row({1, 0, 0})};
  CHECK_THROWS_AS(nk::jvp([](nk::Tape&, std::span<const nk::Tensor> in) { return in[0]; }, x, v),
                  std::invalid_argument);
}

TEST_CASE("every op matches finite differences in both modes") {
  nk::Rng rng(11);
  const Matrix a = rng.normal(3, 4);
  const Matrix b = rng.normal(3, 4);
  const Matrix w = rng.normal(4, 2);
  const Matrix r = rng.normal(1, 4);
  const Matrix c = rng.normal(3, 1);
  const Matrix pos = rng.uniform(3, 4, 0.5, 2.0);
  const Matrix tcol = rng.uniform(3, 1, 0.0, 1.0);
  Vector freqs(3);
  freqs << 1.0, 4.0, 9.0;

  struct Case {
    const char* name;
    nk::TensorFn f;
    std::vector<Matrix> x;
  };
  // Each map ends in a weighted sum so the scalar output depends on every entry.
  auto weighted = [](const nk::Tensor& y) {
    Matrix wts(y.rows(), y.cols());
    for (Index i = 0; i < wts.size(); ++i) wts.data()[i] = 0.3 + 0.1 * static_cast<double>(i % 7);
    return nk::sum(y * y.tape().constant(wts));
  };
  std::vector<Case> cases{
      {"add", [&](nk::Tape&, auto in) { return weighted(in[0] + in[1]); }, {a, b}},
      {"sub", [&](nk::Tape&, auto in) { return weighted(in[0] - in[1]); }, {a, b}},
      {"neg", [&](nk::Tape&, auto in) { return weighted(-in[0]); }, {a}},
      {"mul", [&](nk::Tape&, auto in) { return weighted(in[0] * in[1]); }, {a, b}},
      {"scale", [&](nk::Tape&, auto in) { return weighted(2.5 * in[0] * 0.5); }, {a}},
      {"matmul", [&](nk::Tape&, auto in) { return weighted(nk::matmul(in[0], in[1])); }, {a, w}},
      {"add_row", [&](nk::Tape&, auto in) { return weighted(nk::add_row(in[0], in[1])); }, {a, r}},
      {"mul_col", [&](nk::Tape&, auto in) { return weighted(nk::mul_col(in[0], in[1])); }, {a, c}},
      {"square", [&](nk::Tape&, auto in) { return weighted(nk::square(in[0])); }, {a}},
      {"exp", [&](nk::Tape&, auto in) { return weighted(nk::exp(in[0])); }, {a}},
      {"log", [&](nk::Tape&, auto in) { return weighted(nk::log(in[0])); }, {pos}},
      {"tanh", [&](nk::Tape&, auto in) { return weighted(nk::tanh(in[0])); }, {a}},
      {"relu", [&](nk::Tape&, auto in) { return weighted(nk::relu(in[0])); }, {a}},
      {"mish", [&](nk::Tape&, auto in) { return weighted(nk::mish(in[0])); }, {a}},
      {"mean", [&](nk::Tape&, auto in) { return nk::mean(nk::square(in[0])); }, {a}},
      {"row_sum", [&](nk::Tape&, auto in) { return weighted(nk::row_sum(in[0])); }, {a}},
      {"concat", [&](nk::Tape&, auto in) {
         std::vector<nk::Tensor> parts{in[0], in[1]};
         return weighted(nk::concat_cols(parts));
       }, {a, c}},
      {"sinusoidal", [&](nk::Tape&, auto in) { return weighted(nk::sinusoidal(in[0], freqs)); }, {tcol}},
  };
  for (const auto& cs : cases) {
    CAPTURE(cs.name);
    const auto grads = nk::gradient(cs.f, cs.x);
    std::vector<Matrix> v;
    double dot = 0.0;
    for (std::size_t k = 0; k < cs.x.size(); ++k) {
      CHECK(rel_err(grads[k], fd_gradient(cs.f, cs.x, k)) < 1e-6);
      v.push_back(rng.normal(cs.x[k].rows(), cs.x[k].cols()));
      dot += grads[k].cwiseProduct(v.back()).sum();
    }
    const auto j = nk::jvp(cs.f, cs.x, v);
    CHECK(std::abs(j.tangent(0, 0) - dot) <= 1e-8 * std::max(1.0, std::abs(dot)));
  }
}

TEST_CASE("stop_gradient keeps the tangent but blocks the reverse sweep") {
  nk::Tape tape;
  auto x = tape.variable(row({1.0, 2.0}), row({1.0, 1.0}));
  auto y = nk::stop_gradient(x * x);
  CHECK(y.tangent().isApprox(row({2.0, 4.0})));
  tape.backward(nk::sum(y * x));
  // d/dx sum(sg(x^2) * x) = x^2
  CHECK(x.grad().isApprox(row({1.0, 4.0})));
}

TEST_CASE("MLP gradients and jvp agree with finite differences") {
  nk::Rng rng(3);
  for (auto act : {net::Activation::Mish, net::Activation::ReLU}) {
    net::MlpSpec spec{.input_dim = 3, .output_dim = 2, .hidden_layers = 2, .hidden_width = 8, .activation = act};
    net::Mlp mlp(spec, rng, "mlp");
    const Matrix x = rng.normal(5, 3);
    nk::TensorFn f = [&](nk::Tape& t, std::span<const nk::Tensor> in) { return nk::sum(nk::tanh(mlp.forward(t, in[0]))); };
    const auto g = nk::gradient(f, std::vector<Matrix>{x});
    CHECK(rel_err(g[0], fd_gradient(f, {x}, 0)) < 1e-4);

    // Parameter gradients: perturb a weight matrix directly.
    auto& w = mlp.parameters()[2];
    for (auto& p : mlp.parameters()) p.zero_grad();
    {
      nk::Tape tape;
      tape.backward(f(tape, std::vector<nk::Tensor>{tape.constant(x)}));
    }
    Matrix fd(w.value.rows(), w.value.cols());
    for (Index i = 0; i < fd.size(); ++i) {
      const double orig = w.value.data()[i];
      auto eval = [&] {
        nk::Tape t(nk::GradMode::Disabled);
        return f(t, std::vector<nk::Tensor>{t.constant(x)}).item();
      };
      w.value.data()[i] = orig + 1e-5;
      const double up = eval();
      w.value.data()[i] = orig - 1e-5;
      const double down = eval();
      w.value.data()[i] = orig;
      fd.data()[i] = (up - down) / 2e-5;
    }
    CHECK(rel_err(w.grad, fd) < 1e-4);

    nk::TensorFn out = [&](nk::Tape& t, std::span<const nk::Tensor> in) { return mlp.forward(t, in[0]); };
    const std::vector<Matrix> v{rng.normal(5, 3)};
    const auto j = nk::jvp(out, std::vector<Matrix>{x}, v);
    CHECK(rel_err(j.tangent, fd_directional(out, {x}, v)) < 1e-4);
    CHECK((mlp.eval(x) - j.value).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("Mish values") {
  Matrix x(1, 5);
  x << -2.0, -0.5, 0.0, 0.5, 30.0;
  Matrix y = x;
  nk::mish_inplace(y);
  for (Index i = 0; i < 5; ++i) {
    const double xi = x(0, i);
    CHECK(y(0, i) == doctest::Approx(xi * std::tanh(std::log1p(std::exp(xi)))).epsilon(1e-13));
  }
  CHECK(y(0, 2) == 0.0);
  double prev = 0.0;
  for (int k = 1; k <= 400; ++k) {
    Matrix z = Matrix::Constant(1, 1, 0.025 * k);
    nk::mish_inplace(z);
    CHECK(z(0, 0) > prev);
    prev = z(0, 0);
  }
}
