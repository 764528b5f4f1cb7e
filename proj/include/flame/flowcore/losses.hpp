#pragma once

#include <vector>

#include "flame/netlib/vector_field.hpp"
#include "flame/numkit/rng.hpp"

namespace flame::flow {

/// (1/n) * sum of squared row errors between pred and a fixed target.
nk::Tensor batch_squared_error(const nk::Tensor& pred, const Matrix& target);

/// Conditional flow matching on the OT path: a0 ~ N(0, I), t ~ U[eps, 1],
/// regress u(a_t, t, s) onto a1 - a0. Returns the loss node on `tape`.
nk::Tensor cfm_loss(const net::VelocityField& field, nk::Tape& tape, const Matrix& s, const Matrix& a1, nk::Rng& rng);
/// cfm_loss with the noise and times supplied.
nk::Tensor cfm_loss_at(const net::VelocityField& field, nk::Tape& tape, const Matrix& s, const Matrix& a0,
                       const Matrix& a1, const Matrix& t);

/// Regression target for the average velocity at a point a on the path at
/// time zeta, over [zeta, t]:
///
///   u_tgt = u_cond + (t - zeta) * (d/dzeta) u_bar(a_zeta, zeta, t, s)
///
/// where the total derivative moves a along u_cond (one jvp with tangent
/// (u_cond, 1) on (a, zeta), none on t). Returned as a plain matrix, so it
/// carries no gradient.
Matrix meanflow_target(const net::VelocityField& field, const Matrix& a, const Matrix& zeta, const Matrix& t,
                       const Matrix& s, const Matrix& u_cond);

/// MeanFlow identity loss: (zeta, t) from sample_time_pairs, a at time zeta on
/// the OT path, prediction regressed onto meanflow_target.
nk::Tensor meanflow_loss(const net::VelocityField& field, nk::Tape& tape, const Matrix& s, const Matrix& a1,
                         nk::Rng& rng);
nk::Tensor meanflow_loss_at(const net::VelocityField& field, nk::Tape& tape, const Matrix& s, const Matrix& a0,
                            const Matrix& a1, const Matrix& zeta, const Matrix& t);

/// First-order expansion of u_bar around (a, zeta) at fixed t:
/// jacobian_cols[j] holds d u_bar / d a_j for every row (n x d), and
/// dzeta holds d u_bar / d zeta (n x d).
struct MeanFlowLinearization {
  Matrix value;
  std::vector<Matrix> jacobian_cols;
  Matrix dzeta;

  /// u_tgt for conditional velocity c (n x d): c + (t - zeta) (J c + dzeta).
  Matrix target(const Matrix& c, const Matrix& zeta, const Matrix& t) const;
};

MeanFlowLinearization linearize_meanflow(const net::VelocityField& field, const Matrix& a, const Matrix& zeta,
                                         const Matrix& t, const Matrix& s);

}  // namespace flame::flow
