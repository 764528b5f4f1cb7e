#pragma once

#include <span>

#include "flame/numkit/rng.hpp"
#include "flame/numkit/types.hpp"

namespace flame::nk {

/// log(sum(exp(q))), shifted by max(q). Throws on empty input.
double logsumexp(std::span<const double> q);
double logsumexp(const Vector& q);

double normal_cdf(double x);
/// log N(x; mean, std^2) summed over coordinates.
double gaussian_log_pdf(const Vector& x, const Vector& mean, double std);
/// Standard normal log-density of each row of a (n x d), summed over columns.
Vector standard_normal_log_pdf(const Matrix& a);

struct TruncatedNormalSpec {
  Vector mean;
  Vector std;
  Vector lo;
  Vector hi;

  /// Throws std::invalid_argument on size mismatch, std <= 0 or lo >= hi.
  void validate() const;
};

/// Inverse-CDF draw from N(0,1) conditioned on [lo, hi]; never rejects, and
/// stays exact in the far tails by working with upper-tail probabilities.
double sample_truncated_standard_normal(double lo, double hi, Rng& rng);
Vector sample_truncated_normal(const TruncatedNormalSpec& spec, Rng& rng);
/// CDF of N(mean, std^2) conditioned on [lo, hi].
double truncated_normal_cdf(double x, double mean, double std, double lo, double hi);

}  // namespace flame::nk
