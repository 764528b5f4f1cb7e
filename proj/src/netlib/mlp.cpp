#include "flame/netlib/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "flame/numkit/ops.hpp"

namespace flame::net {

void MlpSpec::validate() const {
  if (input_dim <= 0 || output_dim <= 0) throw std::invalid_argument("MlpSpec: input and output dims must be positive");
  if (hidden_layers < 0) throw std::invalid_argument("MlpSpec: hidden_layers must be >= 0");
  if (hidden_layers > 0 && hidden_width <= 0) throw std::invalid_argument("MlpSpec: hidden_width must be positive");
}

Mlp::Mlp(const MlpSpec& spec, nk::Rng& rng, const std::string& name) : spec_(spec) {
  spec_.validate();
  std::vector<Index> dims{spec_.input_dim};
  for (int i = 0; i < spec_.hidden_layers; ++i) dims.push_back(spec_.hidden_width);
  dims.push_back(spec_.output_dim);
  const std::size_t layers = dims.size() - 1;
  params_.reserve(2 * layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const bool last = l + 1 == layers;
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    Matrix w = Matrix::Zero(dims[l], dims[l + 1]);
    Matrix b = Matrix::Zero(1, dims[l + 1]);
    if (!(last && spec_.zero_init_output)) {
      w = rng.uniform(dims[l], dims[l + 1], -bound, bound);
      b = rng.uniform(1, dims[l + 1], -bound, bound);
    }
    params_.emplace_back(name + ".l" + std::to_string(l) + ".weight", std::move(w));
    params_.emplace_back(name + ".l" + std::to_string(l) + ".bias", std::move(b));
  }
}

nk::Tensor Mlp::forward(nk::Tape& tape, const nk::Tensor& x) const {
  if (x.cols() != spec_.input_dim) {
    throw std::invalid_argument("Mlp::forward: expected " + std::to_string(spec_.input_dim) + " input columns, got " +
                                std::to_string(x.cols()));
  }
  nk::Tensor h = x;
  const std::size_t layers = params_.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    h = nk::add_row(nk::matmul(h, tape.param(params_[2 * l])), tape.param(params_[2 * l + 1]));
    if (l + 1 < layers) h = apply_activation(spec_.activation, h);
  }
  return h;
}

Matrix Mlp::eval(const Matrix& x) const {
  if (x.cols() != spec_.input_dim) throw std::invalid_argument("Mlp::eval: input width mismatch");
  Matrix h = x;
  const std::size_t layers = params_.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix next(h.rows(), params_[2 * l].value.cols());
    next.noalias() = h * params_[2 * l].value;
    next.rowwise() += params_[2 * l + 1].value.row(0);
    h = (l + 1 < layers) ? apply_activation(spec_.activation, std::move(next)) : std::move(next);
  }
  return h;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

}  // namespace flame::net
