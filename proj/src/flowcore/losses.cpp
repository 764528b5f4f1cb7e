#include "flame/flowcore/losses.hpp"

#include <stdexcept>

#include "flame/flowcore/path.hpp"
#include "flame/numkit/ops.hpp"

namespace flame::flow {

nk::Tensor batch_squared_error(const nk::Tensor& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("batch_squared_error: shape mismatch");
  }
  auto diff = pred - pred.tape().constant(target);
  return nk::sum(nk::square(diff)) * (1.0 / static_cast<double>(pred.rows()));
}

nk::Tensor cfm_loss(const net::VelocityField& field, nk::Tape& tape, const Matrix& s, const Matrix& a1, nk::Rng& rng) {
  if (field.mode() != net::FieldMode::Instantaneous) throw std::invalid_argument("cfm_loss: needs an instantaneous field");
  const Index n = a1.rows();
  const Matrix a0 = rng.normal(n, a1.cols());
  return cfm_loss_at(field, tape, s, a0, a1, sample_times(n, rng));
}

nk::Tensor cfm_loss_at(const net::VelocityField& field, nk::Tape& tape, const Matrix& s, const Matrix& a0,
                       const Matrix& a1, const Matrix& t) {
  const OtPoint p = ot_interpolate(a0, a1, t);
  auto pred = net::forward_field(field, tape, tape.constant(p.a_t), std::nullopt, tape.constant(t), tape.constant(s));
  return batch_squared_error(pred, p.u_cond);
}

Matrix meanflow_target(const net::VelocityField& field, const Matrix& a, const Matrix& zeta, const Matrix& t,
                       const Matrix& s, const Matrix& u_cond) {
  if (field.mode() != net::FieldMode::MeanFlow) throw std::invalid_argument("meanflow_target: needs a MeanFlow field");
  net::check_field_inputs(field, a, &zeta, t, s);
  if (u_cond.rows() != a.rows() || u_cond.cols() != a.cols()) {
    throw std::invalid_argument("meanflow_target: u_cond shape mismatch");
  }
  nk::Tape tape(nk::GradMode::Disabled);
  auto out = field.forward(tape, tape.constant(a, u_cond), tape.constant(zeta, Matrix::Ones(zeta.rows(), 1)),
                           tape.constant(t), tape.constant(s));
  const Matrix gap = t - zeta;
  return u_cond + Matrix(nk::tangent_or_zero(out).array().colwise() * gap.col(0).array());
}

nk::Tensor meanflow_loss(const net::VelocityField& field, nk::Tape& tape, const Matrix& s, const Matrix& a1,
                         nk::Rng& rng) {
  if (field.mode() != net::FieldMode::MeanFlow) throw std::invalid_argument("meanflow_loss: needs a MeanFlow field");
  const Index n = a1.rows();
  const Matrix a0 = rng.normal(n, a1.cols());
  const TimePair tp = sample_time_pairs(n, rng);
  return meanflow_loss_at(field, tape, s, a0, a1, tp.zeta, tp.t);
}

nk::Tensor meanflow_loss_at(const net::VelocityField& field, nk::Tape& tape, const Matrix& s, const Matrix& a0,
                            const Matrix& a1, const Matrix& zeta, const Matrix& t) {
  const OtPoint p = ot_interpolate(a0, a1, zeta);
  const Matrix target = meanflow_target(field, p.a_t, zeta, t, s, p.u_cond);
  auto pred =
      net::forward_field(field, tape, tape.constant(p.a_t), tape.constant(zeta), tape.constant(t), tape.constant(s));
  return batch_squared_error(pred, target);
}

Matrix MeanFlowLinearization::target(const Matrix& c, const Matrix& zeta, const Matrix& t) const {
  Matrix jc = dzeta;
  for (std::size_t j = 0; j < jacobian_cols.size(); ++j) {
    jc += Matrix(jacobian_cols[j].array().colwise() * c.col(static_cast<Index>(j)).array());
  }
  const Matrix gap = t - zeta;
  return c + Matrix(jc.array().colwise() * gap.col(0).array());
}

MeanFlowLinearization linearize_meanflow(const net::VelocityField& field, const Matrix& a, const Matrix& zeta,
                                         const Matrix& t, const Matrix& s) {
  if (field.mode() != net::FieldMode::MeanFlow) throw std::invalid_argument("linearize_meanflow: needs a MeanFlow field");
  net::check_field_inputs(field, a, &zeta, t, s);
  const Index n = a.rows();
  const Index d = a.cols();
  const Index blocks = d + 1;
  // Block j < d carries tangent e_j on a; the last block carries tangent 1 on zeta.
  Matrix a_rep = a.replicate(blocks, 1);
  Matrix a_tan = Matrix::Zero(n * blocks, d);
  Matrix z_tan = Matrix::Zero(n * blocks, 1);
  for (Index j = 0; j < d; ++j) a_tan.block(j * n, j, n, 1).setOnes();
  z_tan.bottomRows(n).setOnes();
  nk::Tape tape(nk::GradMode::Disabled);
  auto out = field.forward(tape, tape.constant(std::move(a_rep), std::move(a_tan)),
                           tape.constant(zeta.replicate(blocks, 1), std::move(z_tan)), tape.constant(t.replicate(blocks, 1)),
                           tape.constant(s.replicate(blocks, 1)));
  MeanFlowLinearization lin;
  lin.value = out.value().topRows(n);
  const Matrix tan = nk::tangent_or_zero(out);
  for (Index j = 0; j < d; ++j) lin.jacobian_cols.push_back(tan.middleRows(j * n, n));
  lin.dzeta = tan.bottomRows(n);
  return lin;
}

}  // namespace flame::flow
