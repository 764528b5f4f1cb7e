#include "flame/flowcore/field.hpp"

#include <stdexcept>

#include "flame/numkit/ops.hpp"

namespace flame::flow {

LinearField::LinearField(Matrix a, net::FieldMode mode, Index state_dim)
    : a_(std::move(a)), a_transposed_(a_.transpose()), mode_(mode), state_dim_(state_dim) {
  if (a_.rows() != a_.cols() || a_.rows() == 0) throw std::invalid_argument("LinearField: matrix must be square");
}

nk::Tensor LinearField::forward(nk::Tape& tape, const nk::Tensor& a, const std::optional<nk::Tensor>&,
                                const nk::Tensor&, const nk::Tensor&) const {
  return nk::matmul(a, tape.constant(a_transposed_));
}

Matrix LinearField::eval(const Matrix& a, const std::optional<Matrix>&, const Matrix&, const Matrix&) const {
  return a * a_transposed_;
}

ConstantField::ConstantField(Vector c, net::FieldMode mode, Index state_dim)
    : c_(std::move(c)), mode_(mode), state_dim_(state_dim) {
  if (c_.size() == 0) throw std::invalid_argument("ConstantField: empty vector");
}

nk::Tensor ConstantField::forward(nk::Tape& tape, const nk::Tensor& a, const std::optional<nk::Tensor>& zeta,
                                  const nk::Tensor& t, const nk::Tensor& s) const {
  return tape.constant(eval(a.value(), zeta ? std::optional<Matrix>(zeta->value()) : std::nullopt, t.value(),
                            s.value()));
}

Matrix ConstantField::eval(const Matrix& a, const std::optional<Matrix>&, const Matrix&, const Matrix&) const {
  return c_.transpose().replicate(a.rows(), 1);
}

}  // namespace flame::flow
