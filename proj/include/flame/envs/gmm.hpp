#pragma once

#include "flame/numkit/rng.hpp"

namespace flame::env {

/// Equal-weight mixture of four isotropic Gaussians at (+-1, +-1), sigma 0.5.
class Gmm2d {
 public:
  Gmm2d();
  Gmm2d(Matrix means, double sigma);

  double log_density(double x, double y) const;
  /// Row-wise log density of an (n x 2) matrix.
  Vector log_density(const Matrix& x) const;
  Matrix sample(Index n, nk::Rng& rng) const;

  struct PathVelocity {
    Matrix u;
    Vector divergence;
  };
  /// Exact marginal velocity E[a1 - a0 | a_t = x] of the path t a1 + (1 - t) a0
  /// with a0 ~ N(0, I), a1 from the mixture, and its divergence in x.
  PathVelocity path_velocity(const Matrix& x, double t) const;

  const Matrix& means() const { return means_; }
  double sigma() const { return sigma_; }

 private:
  Matrix means_;
  double sigma_;
};

}  // namespace flame::env
