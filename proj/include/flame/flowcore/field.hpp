#pragma once

#include "flame/netlib/vector_field.hpp"

namespace flame::flow {

/// u(a) = A a, independent of time and state. Usable in either mode, in which
/// case it stands for a linear average-velocity field.
class LinearField final : public net::VelocityField {
 public:
  LinearField(Matrix a, net::FieldMode mode = net::FieldMode::Instantaneous, Index state_dim = 0);

  net::FieldMode mode() const override { return mode_; }
  Index action_dim() const override { return a_.rows(); }
  Index state_dim() const override { return state_dim_; }
  nk::Tensor forward(nk::Tape& tape, const nk::Tensor& a, const std::optional<nk::Tensor>& zeta, const nk::Tensor& t,
                     const nk::Tensor& s) const override;
  Matrix eval(const Matrix& a, const std::optional<Matrix>& zeta, const Matrix& t, const Matrix& s) const override;

  const Matrix& matrix() const { return a_; }

 private:
  Matrix a_;
  Matrix a_transposed_;
  net::FieldMode mode_;
  Index state_dim_;
};

/// u(a) = c everywhere.
class ConstantField final : public net::VelocityField {
 public:
  ConstantField(Vector c, net::FieldMode mode = net::FieldMode::Instantaneous, Index state_dim = 0);

  net::FieldMode mode() const override { return mode_; }
  Index action_dim() const override { return c_.size(); }
  Index state_dim() const override { return state_dim_; }
  nk::Tensor forward(nk::Tape& tape, const nk::Tensor& a, const std::optional<nk::Tensor>& zeta, const nk::Tensor& t,
                     const nk::Tensor& s) const override;
  Matrix eval(const Matrix& a, const std::optional<Matrix>& zeta, const Matrix& t, const Matrix& s) const override;

 private:
  Vector c_;
  net::FieldMode mode_;
  Index state_dim_;
};

}  // namespace flame::flow
