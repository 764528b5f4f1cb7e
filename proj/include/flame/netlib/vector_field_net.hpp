#pragma once

#include "flame/netlib/mlp.hpp"
#include "flame/netlib/time_embedding.hpp"
#include "flame/netlib/vector_field.hpp"

namespace flame::net {

struct VectorFieldSpec {
  Index action_dim = 1;
  Index state_dim = 0;
  FieldMode mode = FieldMode::Instantaneous;
  int hidden_layers = 3;
  Index hidden_width = 256;
  Activation activation = Activation::Mish;
  TimeEmbedding embedding{};
  bool zero_init_output = true;
};

/// MLP over concat(a, embed(zeta) [MeanFlow only], embed(t), s).
class VectorFieldNet final : public VelocityField {
 public:
  VectorFieldNet() = default;
  VectorFieldNet(const VectorFieldSpec& spec, nk::Rng& rng, const std::string& name = "actor");

  FieldMode mode() const override { return spec_.mode; }
  Index action_dim() const override { return spec_.action_dim; }
  Index state_dim() const override { return spec_.state_dim; }

  nk::Tensor forward(nk::Tape& tape, const nk::Tensor& a, const std::optional<nk::Tensor>& zeta, const nk::Tensor& t,
                     const nk::Tensor& s) const override;
  Matrix eval(const Matrix& a, const std::optional<Matrix>& zeta, const Matrix& t, const Matrix& s) const override;

  const VectorFieldSpec& spec() const { return spec_; }
  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }
  std::vector<nk::Parameter>& parameters() { return mlp_.parameters(); }
  const std::vector<nk::Parameter>& parameters() const { return mlp_.parameters(); }

 private:
  VectorFieldSpec spec_;
  Mlp mlp_;
};

}  // namespace flame::net
