#include "flame/flowcore/likelihood.hpp"

#include <stdexcept>

#include "flame/flowcore/integrate.hpp"
#include "flame/numkit/stats.hpp"

namespace flame::flow {

DivergenceMode DivergenceMode::hutchinson(int n_probes) {
  if (n_probes < 1) throw std::invalid_argument("Hutchinson divergence needs at least one probe");
  return {Kind::Hutchinson, n_probes};
}

DivergenceMode DivergenceMode::automatic(Index action_dim, Index max_exact_dim) {
  return action_dim <= max_exact_dim ? exact() : hutchinson(1);
}

std::string DivergenceMode::describe() const {
  return kind == Kind::ExactTrace ? "exact" : "hutchinson(" + std::to_string(probes) + ")";
}

Vector divergence(const net::VelocityField& field, const Matrix& a, const std::optional<Matrix>& zeta, const Matrix& t,
                  const Matrix& s, const DivergenceMode& mode, nk::Rng* rng) {
  net::check_field_inputs(field, a, zeta ? &*zeta : nullptr, t, s);
  const Index n = a.rows();
  const Index d = a.cols();
  Index blocks = 0;
  Matrix tangent;
  if (mode.kind == DivergenceMode::Kind::ExactTrace) {
    blocks = d;
    tangent = Matrix::Zero(n * d, d);
    for (Index j = 0; j < d; ++j) tangent.block(j * n, j, n, 1).setOnes();
  } else {
    if (mode.probes < 1) throw std::invalid_argument("divergence: n_probes must be >= 1");
    if (rng == nullptr) throw std::invalid_argument("divergence: Hutchinson mode needs an rng");
    blocks = mode.probes;
    tangent = rng->rademacher(n * blocks, d);
  }
  nk::Tape tape(nk::GradMode::Disabled);
  std::optional<nk::Tensor> z;
  if (zeta) z = tape.constant(zeta->replicate(blocks, 1));
  auto out = field.forward(tape, tape.constant(a.replicate(blocks, 1), tangent), z, tape.constant(t.replicate(blocks, 1)),
                           tape.constant(s.replicate(blocks, 1)));
  const Matrix jv = nk::tangent_or_zero(out);
  Vector div = Vector::Zero(n);
  if (mode.kind == DivergenceMode::Kind::ExactTrace) {
    for (Index j = 0; j < d; ++j) div += jv.block(j * n, j, n, 1);
  } else {
    const Vector quad = jv.cwiseProduct(tangent).rowwise().sum();
    for (Index b = 0; b < blocks; ++b) div += quad.segment(b * n, n);
    div /= static_cast<double>(blocks);
  }
  return div;
}

LogProbResult log_prob_augmented(const net::VelocityField& field, const Matrix& a0, const Matrix& s,
                                 const IntegrationSchedule& schedule, const DivergenceMode& mode, nk::Rng* rng) {
  if (schedule.n_steps() < 1) throw std::invalid_argument("log_prob_augmented: empty schedule");
  const Index n = a0.rows();
  LogProbResult res{a0, nk::standard_normal_log_pdf(a0), mode};
  for (int k = 0; k < schedule.n_steps(); ++k) {
    const Matrix t0 = Matrix::Constant(n, 1, schedule.time(k));
    Vector div;
    if (field.mode() == net::FieldMode::MeanFlow) {
      div = divergence(field, res.a1, t0, Matrix::Constant(n, 1, schedule.time(k + 1)), s, mode, rng);
    } else {
      div = divergence(field, res.a1, std::nullopt, t0, s, mode, rng);
    }
    res.a1 += euler_increment(field, res.a1, s, schedule, k);
    res.log_prob -= schedule.dt(k) * div;
    if (!res.a1.allFinite() || !res.log_prob.allFinite()) {
      throw IntegrationError("log_prob_augmented: non-finite state after step " + std::to_string(k + 1));
    }
  }
  return res;
}

}  // namespace flame::flow
