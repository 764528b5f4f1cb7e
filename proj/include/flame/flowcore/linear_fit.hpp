#pragma once

#include "flame/numkit/rng.hpp"

namespace flame::flow {

/// argmin_theta sum_i w_i (features_i . theta - y_i)^2, solved through a
/// column-pivoted QR of the sqrt(w)-scaled system. Weights must be positive.
Vector weighted_least_squares(const Matrix& features, const Vector& targets, const Vector& weights);
Vector least_squares(const Matrix& features, const Vector& targets);

/// Two-point target on the line: a1 = +1 or -1 with equal mass, a0 ~ N(0, 1),
/// a_t = t a1 + (1 - t) a0. Its marginal field is
///   u_t(x) = (tanh(x t / (1 - t)^2) - x) / (1 - t),
/// which is linear in the features [tanh(x t / (1 - t)^2), x].
Matrix two_point_features(const Vector& x, double t);
/// Coefficients of the marginal field in two_point_features: (1, -1) / (1 - t).
Vector two_point_marginal_coefficients(double t);
/// Least-squares fit of the conditional targets a1 - a0 on n samples at time t.
Vector two_point_cfm_fit(double t, Index n_samples, nk::Rng& rng);

}  // namespace flame::flow
