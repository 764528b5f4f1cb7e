#include "flame/envs/gmm.hpp"

#include <cmath>
#include <stdexcept>

#include "flame/numkit/stats.hpp"

namespace flame::env {

Gmm2d::Gmm2d() : means_(4, 2), sigma_(0.5) { means_ << 1, 1, 1, -1, -1, 1, -1, -1; }

Gmm2d::Gmm2d(Matrix means, double sigma) : means_(std::move(means)), sigma_(sigma) {
  if (means_.cols() != 2 || means_.rows() == 0) throw std::invalid_argument("Gmm2d: means must be (k x 2)");
  if (!(sigma_ > 0.0)) throw std::invalid_argument("Gmm2d: sigma must be positive");
}

double Gmm2d::log_density(double x, double y) const {
  const Index k = means_.rows();
  Vector terms(k);
  const double log_norm = -std::log(2 * M_PI * sigma_ * sigma_) - std::log(static_cast<double>(k));
  for (Index i = 0; i < k; ++i) {
    const double dx = x - means_(i, 0), dy = y - means_(i, 1);
    terms(i) = log_norm - (dx * dx + dy * dy) / (2 * sigma_ * sigma_);
  }
  return nk::logsumexp(terms);
}

Vector Gmm2d::log_density(const Matrix& x) const {
  if (x.cols() != 2) throw std::invalid_argument("Gmm2d::log_density: expected (n x 2)");
  Vector out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) out(i) = log_density(x(i, 0), x(i, 1));
  return out;
}

Matrix Gmm2d::sample(Index n, nk::Rng& rng) const {
  Matrix out(n, 2);
  for (Index i = 0; i < n; ++i) {
    const auto c = static_cast<Index>(rng.below(static_cast<std::uint64_t>(means_.rows())));
    out(i, 0) = means_(c, 0) + sigma_ * rng.normal();
    out(i, 1) = means_(c, 1) + sigma_ * rng.normal();
  }
  return out;
}

Gmm2d::PathVelocity Gmm2d::path_velocity(const Matrix& x, double t) const {
  if (x.cols() != 2) throw std::invalid_argument("Gmm2d::path_velocity: expected (n x 2)");
  if (!(t >= 0.0 && t < 1.0)) throw std::invalid_argument("Gmm2d::path_velocity: t must lie in [0, 1)");
  const Index k = means_.rows();
  // Given component j, a_t ~ N(t mu_j, s2 I) and E[a1 - a0 | a_t, j] = mu_j + beta (a_t - t mu_j).
  const double s2 = t * t * sigma_ * sigma_ + (1.0 - t) * (1.0 - t);
  const double beta = (t * sigma_ * sigma_ - (1.0 - t)) / s2;
  PathVelocity out{Matrix(x.rows(), 2), Vector(x.rows())};
  Vector logn(k), r(k);
  Matrix diff(k, 2), m(k, 2);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < k; ++j) {
      diff.row(j) = x.row(i) - t * means_.row(j);
      logn(j) = -0.5 * diff.row(j).squaredNorm() / s2;
    }
    r = (logn.array() - nk::logsumexp(logn)).exp();
    m = means_ + beta * diff;
    out.u.row(i) = r.transpose() * m;
    // div = sum_j r_j tr(beta I) + sum_j grad(r_j) . m_j, grad r_j = r_j (g_j - sum_l r_l g_l), g_j = -diff_j / s2.
    const Matrix g = -diff / s2;
    const Eigen::RowVector2d gbar = r.transpose() * g;
    double div = 2.0 * beta;
    for (Index j = 0; j < k; ++j) div += r(j) * (g.row(j) - gbar).dot(m.row(j));
    out.divergence(i) = div;
  }
  return out;
}

}  // namespace flame::env
