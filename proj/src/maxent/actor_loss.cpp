#include "flame/maxent/actor_loss.hpp"

#include <stdexcept>

#include "flame/flowcore/integrate.hpp"
#include "flame/flowcore/losses.hpp"
#include "flame/maxent/snis.hpp"
#include "flame/numkit/ops.hpp"

namespace flame::maxent {

const char* to_string(ProposalKind kind) { return kind == ProposalKind::UniformBox ? "uniform" : "last_policy"; }

ProposalKind proposal_from_string(const std::string& name) {
  if (name == "uniform") return ProposalKind::UniformBox;
  if (name == "last_policy") return ProposalKind::LastPolicy;
  throw std::invalid_argument("unknown proposal '" + name + "' (expected uniform or last_policy)");
}

Matrix proposal_sample(const Proposal& proposal, const Matrix& s, const Matrix& t, const ActionBox& box,
                       nk::Rng& rng) {
  const Index n = s.rows();
  if (proposal.kind == ProposalKind::UniformBox) return box.sample_uniform(n, rng);
  if (proposal.policy_old == nullptr) throw std::invalid_argument("proposal_sample: LastPolicy needs a policy");
  const Matrix a1 = flow::generate(*proposal.policy_old, rng.normal(n, box.dim()), s, proposal.schedule);
  const Matrix a0 = rng.normal(n, box.dim());
  return flow::ot_interpolate(a0, a1, t).a_t;
}

Matrix WeightedCandidates::weighted_velocity() const {
  const Index n = a1.rows() / k;
  Matrix out = Matrix::Zero(n, a1.cols());
  for (Index b = 0; b < n; ++b) {
    for (Index i = 0; i < k; ++i) {
      const Index r = b * k + i;
      out.row(b) += weights(r) * (a1.row(r) - a0.row(r));
    }
  }
  return out;
}

double WeightedCandidates::effective_sample_size() const {
  const Index n = a1.rows() / k;
  double total = 0.0;
  for (Index b = 0; b < n; ++b) total += 1.0 / weights.segment(b * k, k).squaredNorm();
  return total / static_cast<double>(n);
}

WeightedCandidates weighted_candidates(const Matrix& s, const Matrix& a_t, const Matrix& t, const QScorer& score,
                                       const ActorLossConfig& config, nk::Rng& rng) {
  const Index n = s.rows();
  const Index k = config.k;
  const Index d = config.box.dim();
  WeightedCandidates wc{Matrix(n * k, d), Matrix(n * k, d), Vector(n * k), Vector(), k};
  for (Index b = 0; b < n; ++b) {
    auto c = reverse_sample_candidates(a_t.row(b).transpose(), t(b, 0), k, config.box, rng);
    wc.a1.middleRows(b * k, k) = c.a1;
    wc.a0.middleRows(b * k, k) = c.a0;
  }
  Matrix s_rep(n * k, s.cols());
  for (Index b = 0; b < n; ++b) s_rep.middleRows(b * k, k) = s.row(b).replicate(k, 1);
  wc.q = score(s_rep, wc.a1);
  if (wc.q.size() != n * k) throw std::logic_error("weighted_candidates: scorer returned the wrong number of values");
  for (Index b = 0; b < n; ++b) wc.weights.segment(b * k, k) = snis_weights(wc.q.segment(b * k, k), config.alpha);
  return wc;
}

namespace {

void check_inputs(const net::VelocityField& actor, const Matrix& s, const ActorLossConfig& config) {
  config.box.validate();
  if (config.k < 1) throw std::invalid_argument("actor loss: K must be >= 1");
  if (actor.action_dim() != config.box.dim()) throw std::invalid_argument("actor loss: box/actor dimension mismatch");
  if (s.rows() == 0) throw std::invalid_argument("actor loss: empty batch");
}

}  // namespace

ActorLoss qrfm_loss(const net::VelocityField& actor, nk::Tape& tape, const Matrix& s, const QScorer& score,
                    const ActorLossConfig& config, const Proposal& proposal, nk::Rng& rng) {
  if (actor.mode() != net::FieldMode::Instantaneous) throw std::invalid_argument("qrfm_loss: needs an instantaneous field");
  check_inputs(actor, s, config);
  const Index n = s.rows();
  const Matrix t = flow::sample_times(n, rng, flow::kTimeEpsilon, 1.0 - flow::kTimeEpsilonHigh);
  const Matrix a_t = proposal_sample(proposal, s, t, config.box, rng);
  const auto wc = weighted_candidates(s, a_t, t, score, config, rng);
  const Matrix mean_velocity = wc.weighted_velocity();

  // sum_i w_i ||u - c_i||^2 = ||u - c_bar||^2 + sum_i w_i ||c_i - c_bar||^2; the
  // second term does not depend on the actor.
  double spread = 0.0;
  for (Index b = 0; b < n; ++b) {
    for (Index i = 0; i < config.k; ++i) {
      const Index r = b * config.k + i;
      spread += wc.weights(r) * (wc.a1.row(r) - wc.a0.row(r) - mean_velocity.row(b)).squaredNorm();
    }
  }
  auto pred = net::forward_field(actor, tape, tape.constant(a_t), std::nullopt, tape.constant(t), tape.constant(s));
  auto loss = flow::batch_squared_error(pred, mean_velocity) +
              tape.constant(Matrix::Constant(1, 1, spread / static_cast<double>(n)));
  return {loss, wc.q.mean(), wc.effective_sample_size()};
}

ActorLoss qrmf_loss(const net::VelocityField& actor, nk::Tape& tape, const Matrix& s, const QScorer& score,
                    const ActorLossConfig& config, const Proposal& proposal, nk::Rng& rng) {
  if (actor.mode() != net::FieldMode::MeanFlow) throw std::invalid_argument("qrmf_loss: needs a MeanFlow field");
  check_inputs(actor, s, config);
  const Index n = s.rows();
  const Index d = config.box.dim();
  const auto tp = flow::sample_time_pairs(n, rng);
  const Matrix a_z = proposal_sample(proposal, s, tp.zeta, config.box, rng);
  const auto wc = weighted_candidates(s, a_z, tp.zeta, score, config, rng);
  const Matrix mean_velocity = wc.weighted_velocity();

  // Each target is affine in its conditional velocity: M_b c_i + (t - zeta) dzeta
  // with M_b = I + (t - zeta) J_b, so the weighted loss splits as in qrfm_loss.
  const auto lin = flow::linearize_meanflow(actor, a_z, tp.zeta, tp.t, s);
  const Matrix target = lin.target(mean_velocity, tp.zeta, tp.t);
  double spread = 0.0;
  Matrix m(d, d);
  for (Index b = 0; b < n; ++b) {
    const double gap = tp.t(b, 0) - tp.zeta(b, 0);
    for (Index j = 0; j < d; ++j) m.col(j) = gap * lin.jacobian_cols[static_cast<std::size_t>(j)].row(b).transpose();
    m += Matrix::Identity(d, d);
    for (Index i = 0; i < config.k; ++i) {
      const Index r = b * config.k + i;
      const Vector dev = (wc.a1.row(r) - wc.a0.row(r) - mean_velocity.row(b)).transpose();
      spread += wc.weights(r) * (m * dev).squaredNorm();
    }
  }
  auto pred = net::forward_field(actor, tape, tape.constant(a_z), tape.constant(tp.zeta), tape.constant(tp.t),
                                 tape.constant(s));
  auto loss = flow::batch_squared_error(pred, target) +
              tape.constant(Matrix::Constant(1, 1, spread / static_cast<double>(n)));
  return {loss, wc.q.mean(), wc.effective_sample_size()};
}

}  // namespace flame::maxent
