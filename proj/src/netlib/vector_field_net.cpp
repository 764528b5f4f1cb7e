#include "flame/netlib/vector_field_net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "flame/numkit/ops.hpp"

namespace flame::net {

const char* to_string(FieldMode mode) { return mode == FieldMode::MeanFlow ? "meanflow" : "instantaneous"; }

Matrix VelocityField::eval(const Matrix& a, const std::optional<Matrix>& zeta, const Matrix& t, const Matrix& s) const {
  nk::Tape tape(nk::GradMode::Disabled);
  std::optional<nk::Tensor> z;
  if (zeta) z = tape.constant(*zeta);
  return forward(tape, tape.constant(a), z, tape.constant(t), tape.constant(s)).value();
}

void check_field_inputs(const VelocityField& field, const Matrix& a, const Matrix* zeta, const Matrix& t,
                        const Matrix& s) {
  const Index n = a.rows();
  if (a.cols() != field.action_dim()) {
    throw std::invalid_argument("velocity field: action has " + std::to_string(a.cols()) + " columns, expected " +
                                std::to_string(field.action_dim()));
  }
  if (t.rows() != n || t.cols() != 1) throw std::invalid_argument("velocity field: t must be an (n x 1) column");
  if (s.rows() != n || s.cols() != field.state_dim()) {
    throw std::invalid_argument("velocity field: state must be (n x " + std::to_string(field.state_dim()) + ")");
  }
  for (Index i = 0; i < n; ++i) {
    if (!(t(i, 0) >= 0.0 && t(i, 0) <= 1.0)) {
      throw std::invalid_argument("velocity field: t = " + std::to_string(t(i, 0)) + " outside [0, 1]");
    }
  }
  if (field.mode() == FieldMode::Instantaneous) {
    if (zeta) throw std::invalid_argument("velocity field: zeta supplied to an instantaneous field");
    return;
  }
  if (!zeta) throw std::invalid_argument("velocity field: MeanFlow field requires zeta");
  if (zeta->rows() != n || zeta->cols() != 1) throw std::invalid_argument("velocity field: zeta must be (n x 1)");
  for (Index i = 0; i < n; ++i) {
    if (!((*zeta)(i, 0) >= 0.0 && (*zeta)(i, 0) < t(i, 0))) {
      throw std::invalid_argument("velocity field: need 0 <= zeta < t, got zeta = " + std::to_string((*zeta)(i, 0)) +
                                  ", t = " + std::to_string(t(i, 0)));
    }
  }
}

nk::Tensor forward_field(const VelocityField& field, nk::Tape& tape, const nk::Tensor& a,
                         const std::optional<nk::Tensor>& zeta, const nk::Tensor& t, const nk::Tensor& s) {
  check_field_inputs(field, a.value(), zeta ? &zeta->value() : nullptr, t.value(), s.value());
  return field.forward(tape, a, zeta, t, s);
}

Matrix eval_field(const VelocityField& field, const Matrix& a, const std::optional<Matrix>& zeta, const Matrix& t,
                  const Matrix& s) {
  check_field_inputs(field, a, zeta ? &*zeta : nullptr, t, s);
  return field.eval(a, zeta, t, s);
}

VectorFieldNet::VectorFieldNet(const VectorFieldSpec& spec, nk::Rng& rng, const std::string& name) : spec_(spec) {
  if (spec_.action_dim <= 0) throw std::invalid_argument("VectorFieldSpec: action_dim must be positive");
  if (spec_.state_dim < 0) throw std::invalid_argument("VectorFieldSpec: state_dim must be >= 0");
  spec_.embedding.validate();
  const Index slots = spec_.mode == FieldMode::MeanFlow ? 2 : 1;
  MlpSpec mlp;
  mlp.input_dim = spec_.action_dim + slots * spec_.embedding.dim + spec_.state_dim;
  mlp.output_dim = spec_.action_dim;
  mlp.hidden_layers = spec_.hidden_layers;
  mlp.hidden_width = spec_.hidden_width;
  mlp.activation = spec_.activation;
  mlp.zero_init_output = spec_.zero_init_output;
  mlp_ = Mlp(mlp, rng, name);
}

nk::Tensor VectorFieldNet::forward(nk::Tape& tape, const nk::Tensor& a, const std::optional<nk::Tensor>& zeta,
                                   const nk::Tensor& t, const nk::Tensor& s) const {
  std::vector<nk::Tensor> parts{a};
  if (spec_.mode == FieldMode::MeanFlow) {
    if (!zeta) throw std::invalid_argument("VectorFieldNet: MeanFlow mode requires zeta");
    parts.push_back(spec_.embedding.embed(*zeta));
  }
  parts.push_back(spec_.embedding.embed(t));
  if (spec_.state_dim > 0) parts.push_back(s);
  return mlp_.forward(tape, nk::concat_cols(parts));
}

Matrix VectorFieldNet::eval(const Matrix& a, const std::optional<Matrix>& zeta, const Matrix& t,
                            const Matrix& s) const {
  const Index n = a.rows();
  const Index e = spec_.embedding.dim;
  Matrix x(n, mlp_.spec().input_dim);
  Index col = 0;
  x.leftCols(spec_.action_dim) = a;
  col += spec_.action_dim;
  if (spec_.mode == FieldMode::MeanFlow) {
    if (!zeta) throw std::invalid_argument("VectorFieldNet: MeanFlow mode requires zeta");
    x.middleCols(col, e) = spec_.embedding.embed(*zeta);
    col += e;
  }
  x.middleCols(col, e) = spec_.embedding.embed(t);
  col += e;
  if (spec_.state_dim > 0) x.rightCols(spec_.state_dim) = s;
  return mlp_.eval(x);
}

}  // namespace flame::net
