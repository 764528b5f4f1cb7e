#pragma once

#include "flame/numkit/types.hpp"

namespace flame::maxent {

/// Self-normalised importance weights w_i = exp(q_i / alpha - LSE(q / alpha)).
/// alpha = 0 is the zero-temperature limit: uniform over the argmax set.
/// Throws std::domain_error naming the first non-finite entry.
Vector snis_weights(const Vector& q, double alpha);

}  // namespace flame::maxent
