#include "flame/numkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>

namespace flame::nk {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kLog2Pi = 1.8378770664093454836;

// Q(x) = P(Z > x).
double upper_tail(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double upper_tail_inverse(double q) { return kSqrt2 * boost::math::erfc_inv(2.0 * q); }

// Draw from N(0,1) restricted to [a, b] with 0 <= a < b (b may be +inf).
double sample_upper_tail(double a, double b, Rng& rng) {
  const double u = rng.uniform();
  const double qa = upper_tail(a);
  const double qb = std::isinf(b) ? 0.0 : upper_tail(b);
  if (qa > 1e-280) {
    double q = qa - u * (qa - qb);
    q = std::max(q, std::numeric_limits<double>::min());
    return std::clamp(upper_tail_inverse(q), a, b);
  }
  // Past ~36 sigma erfc underflows; the density is then x e^{-x^2/2} to
  // within a relative O(1/a^2), which inverts in closed form.
  const double span = std::isinf(b) ? 1.0 : -std::expm1(-0.5 * (b * b - a * a));
  const double x = std::sqrt(a * a - 2.0 * std::log1p(-u * span));
  return std::clamp(x, a, b);
}

}  // namespace

double logsumexp(std::span<const double> q) {
  if (q.empty()) throw std::invalid_argument("logsumexp: empty input");
  const double m = *std::max_element(q.begin(), q.end());
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double v : q) s += std::exp(v - m);
  return m + std::log(s);
}

double logsumexp(const Vector& q) { return logsumexp(std::span<const double>(q.data(), static_cast<std::size_t>(q.size()))); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double gaussian_log_pdf(const Vector& x, const Vector& mean, double std) {
  const double d = static_cast<double>(x.size());
  return -0.5 * d * kLog2Pi - d * std::log(std) - 0.5 * (x - mean).squaredNorm() / (std * std);
}

Vector standard_normal_log_pdf(const Matrix& a) {
  const double d = static_cast<double>(a.cols());
  return (-0.5 * d * kLog2Pi - 0.5 * a.rowwise().squaredNorm().array()).matrix();
}

void TruncatedNormalSpec::validate() const {
  const Index d = mean.size();
  if (std.size() != d || lo.size() != d || hi.size() != d) {
    throw std::invalid_argument("TruncatedNormalSpec: mean/std/lo/hi sizes differ");
  }
  for (Index j = 0; j < d; ++j) {
    if (!(std(j) > 0.0)) throw std::invalid_argument("TruncatedNormalSpec: std must be positive at coordinate " + std::to_string(j));
    if (!(lo(j) < hi(j))) throw std::invalid_argument("TruncatedNormalSpec: lo >= hi at coordinate " + std::to_string(j));
  }
}

double sample_truncated_standard_normal(double lo, double hi, Rng& rng) {
  if (!(lo < hi)) throw std::invalid_argument("sample_truncated_standard_normal: lo must be < hi");
  if (lo >= 0.0) return sample_upper_tail(lo, hi, rng);
  if (hi <= 0.0) return -sample_upper_tail(-hi, -lo, rng);
  // Interval straddles zero, so its mass is bounded away from the tails.
  const double plo = upper_tail(-lo);        // Phi(lo)
  const double phi_hi = 1.0 - upper_tail(hi);  // Phi(hi)
  const double p = plo + rng.uniform() * (phi_hi - plo);
  const double x = p < 0.5 ? -upper_tail_inverse(std::max(p, std::numeric_limits<double>::min()))
                           : upper_tail_inverse(std::max(1.0 - p, std::numeric_limits<double>::min()));
  return std::clamp(x, lo, hi);
}

Vector sample_truncated_normal(const TruncatedNormalSpec& spec, Rng& rng) {
  spec.validate();
  Vector out(spec.mean.size());
  for (Index j = 0; j < out.size(); ++j) {
    const double a = (spec.lo(j) - spec.mean(j)) / spec.std(j);
    const double b = (spec.hi(j) - spec.mean(j)) / spec.std(j);
    const double z = sample_truncated_standard_normal(a, b, rng);
    out(j) = std::clamp(spec.mean(j) + spec.std(j) * z, spec.lo(j), spec.hi(j));
  }
  return out;
}

double truncated_normal_cdf(double x, double mean, double std, double lo, double hi) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const double a = (lo - mean) / std;
  const double b = (hi - mean) / std;
  const double z = (x - mean) / std;
  if (a >= 0.0) {
    const double qa = upper_tail(a), qb = upper_tail(b);
    return (qa - upper_tail(z)) / (qa - qb);
  }
  return (normal_cdf(z) - normal_cdf(a)) / (normal_cdf(b) - normal_cdf(a));
}

}  // namespace flame::nk
