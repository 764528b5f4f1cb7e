#include "flame/netlib/time_embedding.hpp"

#include <cmath>
#include <stdexcept>

#include "flame/numkit/ops.hpp"

namespace flame::net {

void TimeEmbedding::validate() const {
  if (dim <= 0 || dim % 2 != 0) throw std::invalid_argument("TimeEmbedding: dim must be a positive even integer");
  if (!(base > 1.0)) throw std::invalid_argument("TimeEmbedding: base must exceed 1");
  if (!(max_frequency > 0.0)) throw std::invalid_argument("TimeEmbedding: max_frequency must be positive");
}

Vector TimeEmbedding::frequencies() const {
  validate();
  const int half = dim / 2;
  Vector w(half);
  for (int k = 0; k < half; ++k) w(k) = max_frequency * std::pow(base, -static_cast<double>(k) / half);
  return w;
}

nk::Tensor TimeEmbedding::embed(const nk::Tensor& t) const { return nk::sinusoidal(t, frequencies()); }

Matrix TimeEmbedding::embed(const Matrix& t) const {
  if (t.cols() != 1) throw std::invalid_argument("TimeEmbedding::embed: expected a column of times");
  const Vector w = frequencies();
  const Index half = w.size();
  Matrix phase = t * w.transpose();
  Matrix out(t.rows(), 2 * half);
  out.leftCols(half) = phase.array().sin().matrix();
  out.rightCols(half) = phase.array().cos().matrix();
  return out;
}

}  // namespace flame::net
