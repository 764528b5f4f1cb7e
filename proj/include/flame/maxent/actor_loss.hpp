#pragma once

#include <functional>

#include "flame/flowcore/path.hpp"
#include "flame/maxent/reverse_kernel.hpp"
#include "flame/netlib/vector_field.hpp"

namespace flame::maxent {

/// Scores (s, a) pairs row by row; used for candidate weighting.
using QScorer = std::function<Vector(const Matrix& s, const Matrix& a)>;

enum class ProposalKind { UniformBox, LastPolicy };

const char* to_string(ProposalKind kind);
ProposalKind proposal_from_string(const std::string& name);

/// Source of the intermediate point a_t that candidates are drawn around.
struct Proposal {
  ProposalKind kind = ProposalKind::UniformBox;
  /// Slow copy of the actor; required for LastPolicy.
  const net::VelocityField* policy_old = nullptr;
  /// Generation schedule for policy_old.
  flow::IntegrationSchedule schedule = flow::IntegrationSchedule::uniform(1);
};

/// UniformBox: a_t ~ U(box). LastPolicy: a1' ~ pi_old(.|s), a0 ~ N(0, I),
/// a_t = t a1' + (1 - t) a0. One row per state; t is (n x 1).
Matrix proposal_sample(const Proposal& proposal, const Matrix& s, const Matrix& t, const ActionBox& box,
                       nk::Rng& rng);

struct ActorLossConfig {
  Index k = 300;
  /// Temperature in the weights exp(Q / alpha); 0 selects the argmax.
  double alpha = 0.2;
  ActionBox box;
};

/// Reverse-sampled candidates for a batch of (a_t, t) points with their
/// normalised weights. Row b * K + i holds candidate i of state b.
struct WeightedCandidates {
  Matrix a1;
  Matrix a0;
  Vector weights;
  Vector q;
  Index k = 0;

  /// sum_i w_i (a1_i - a0_i) per state (n x d).
  Matrix weighted_velocity() const;
  /// Mean over states of 1 / sum_i w_i^2.
  double effective_sample_size() const;
};

WeightedCandidates weighted_candidates(const Matrix& s, const Matrix& a_t, const Matrix& t, const QScorer& score,
                                       const ActorLossConfig& config, nk::Rng& rng);

struct ActorLoss {
  nk::Tensor loss;
  double mean_q = 0.0;
  double effective_sample_size = 0.0;
};

/// Q-reweighted flow matching: t ~ U[eps, 1 - eps_hi], a_t from the proposal,
/// K candidates per state, loss = mean_b sum_i w_i ||u(a_t, t, s) - (a1_i - a0_i)||^2.
ActorLoss qrfm_loss(const net::VelocityField& actor, nk::Tape& tape, const Matrix& s, const QScorer& score,
                    const ActorLossConfig& config, const Proposal& proposal, nk::Rng& rng);

/// Q-reweighted MeanFlow: (zeta, t) pairs, the shared point at time zeta, and
/// per-candidate targets from the MeanFlow identity with u_cond = a1_i - a0_i.
ActorLoss qrmf_loss(const net::VelocityField& actor, nk::Tape& tape, const Matrix& s, const QScorer& score,
                    const ActorLossConfig& config, const Proposal& proposal, nk::Rng& rng);

}  // namespace flame::maxent
