#pragma once

#include <string>
#include <vector>

#include "flame/numkit/rng.hpp"
#include "flame/numkit/tape.hpp"

namespace flame::net {

enum class Activation { Mish, ReLU };

/// Mish(x) = x * tanh(softplus(x)), applied to plain matrices.
Matrix apply_activation(Activation act, Matrix x);
nk::Tensor apply_activation(Activation act, const nk::Tensor& x);
const char* to_string(Activation act);
Activation activation_from_string(const std::string& name);

struct MlpSpec {
  Index input_dim = 0;
  Index output_dim = 0;
  int hidden_layers = 3;
  Index hidden_width = 256;
  Activation activation = Activation::Mish;
  /// Zero the output layer so the network starts as the constant 0.
  bool zero_init_output = false;

  void validate() const;
};

/// Fully connected network. Weights are stored (in x out) so a batch (n x in)
/// maps to (n x out) with a single product per layer.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const MlpSpec& spec, nk::Rng& rng, const std::string& name);

  nk::Tensor forward(nk::Tape& tape, const nk::Tensor& x) const;
  /// Tape-free inference; agrees with forward() to rounding.
  Matrix eval(const Matrix& x) const;

  const MlpSpec& spec() const { return spec_; }
  std::vector<nk::Parameter>& parameters() { return params_; }
  const std::vector<nk::Parameter>& parameters() const { return params_; }
  std::size_t parameter_count() const;

 private:
  MlpSpec spec_;
  std::vector<nk::Parameter> params_;  // weight, bias per layer
};

}  // namespace flame::net
