#pragma once

#include "flame/numkit/tape.hpp"

namespace flame::net {

/// Sinusoidal embedding of a scalar time: [sin(w_k t), cos(w_k t)] for
/// half = dim/2 geometrically spaced frequencies w_k = max_frequency * base^(-k/half).
struct TimeEmbedding {
  int dim = 64;
  double base = 1e4;
  double max_frequency = 20.0;

  void validate() const;
  Vector frequencies() const;
  nk::Tensor embed(const nk::Tensor& t) const;
  /// t is (n x 1); returns (n x dim).
  Matrix embed(const Matrix& t) const;
};

}  // namespace flame::net
