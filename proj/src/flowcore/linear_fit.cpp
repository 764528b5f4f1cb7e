#include "flame/flowcore/linear_fit.hpp"

#include <cmath>
#include <stdexcept>

namespace flame::flow {

Vector weighted_least_squares(const Matrix& features, const Vector& targets, const Vector& weights) {
  if (features.rows() != targets.size() || weights.size() != targets.size()) {
    throw std::invalid_argument("weighted_least_squares: size mismatch");
  }
  if ((weights.array() <= 0.0).any()) throw std::invalid_argument("weighted_least_squares: weights must be positive");
  const Vector sw = weights.array().sqrt();
  const Eigen::MatrixXd a = sw.asDiagonal() * features;
  const Vector b = sw.cwiseProduct(targets);
  return a.colPivHouseholderQr().solve(b);
}

Vector least_squares(const Matrix& features, const Vector& targets) {
  return weighted_least_squares(features, targets, Vector::Ones(targets.size()));
}

Matrix two_point_features(const Vector& x, double t) {
  if (!(t >= 0.0 && t < 1.0)) throw std::invalid_argument("two_point_features: t must lie in [0, 1)");
  const double k = t / ((1 - t) * (1 - t));
  Matrix phi(x.size(), 2);
  phi.col(0) = (k * x.array()).tanh().matrix();
  phi.col(1) = x;
  return phi;
}

Vector two_point_marginal_coefficients(double t) {
  Vector c(2);
  c << 1.0 / (1.0 - t), -1.0 / (1.0 - t);
  return c;
}

Vector two_point_cfm_fit(double t, Index n_samples, nk::Rng& rng) {
  Vector x(n_samples), y(n_samples);
  for (Index i = 0; i < n_samples; ++i) {
    const double a1 = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double a0 = rng.normal();
    x(i) = t * a1 + (1 - t) * a0;
    y(i) = a1 - a0;
  }
  return least_squares(two_point_features(x, t), y);
}

}  // namespace flame::flow
