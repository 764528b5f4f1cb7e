#include "flame/maxent/snis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "flame/numkit/stats.hpp"

namespace flame::maxent {

Vector snis_weights(const Vector& q, double alpha) {
  if (q.size() == 0) throw std::invalid_argument("snis_weights: empty candidate set");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("snis_weights: alpha must be finite and >= 0");
  for (Index i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q(i))) {
      throw std::domain_error("snis_weights: Q value " + std::to_string(q(i)) + " at candidate " + std::to_string(i) +
                              " of " + std::to_string(q.size()));
    }
  }
  if (alpha == 0.0) {
    const double best = q.maxCoeff();
    Vector w = (q.array() == best).cast<double>();
    return w / w.sum();
  }
  const Vector scaled = q / alpha;
  const double lse = nk::logsumexp(scaled);
  Vector w = (scaled.array() - lse).exp();
  // Renormalise away the last ulp of drift.
  return w / w.sum();
}

}  // namespace flame::maxent
