#pragma once

#include "flame/numkit/rng.hpp"

namespace flame::maxent {

/// Axis-aligned action box lo <= a <= hi.
struct ActionBox {
  Vector lo;
  Vector hi;

  static ActionBox symmetric(Index dim, double bound);
  Index dim() const { return lo.size(); }
  /// Throws std::invalid_argument unless lo < hi elementwise.
  void validate() const;
  Matrix clip(const Matrix& a) const;
  Matrix sample_uniform(Index n, nk::Rng& rng) const;
};

/// log p_t(a_t | a1) for the OT path: N(a_t; t a1, (1 - t)^2 I).
double forward_kernel_log_pdf(const Vector& a_t, const Vector& a1, double t);
/// log phi_{1|t}(a1 | a_t) = log N(a1; a_t / t, ((1 - t) / t)^2 I).
double reverse_kernel_log_pdf(const Vector& a1, const Vector& a_t, double t);

struct Candidates {
  Matrix a1;  // K x d, inside the box
  Matrix a0;  // K x d, with t a1 + (1 - t) a0 = a_t
};

/// Draws K terminal actions from the reverse kernel at (a_t, t), truncated to
/// the box, and recovers the matching base points. Requires
/// t in [kTimeEpsilon, 1 - kTimeEpsilonHigh].
Candidates reverse_sample_candidates(const Vector& a_t, double t, Index k, const ActionBox& box, nk::Rng& rng);

}  // namespace flame::maxent
