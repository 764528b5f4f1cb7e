#include "flame/maxent/reverse_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "flame/flowcore/path.hpp"
#include "flame/numkit/stats.hpp"

namespace flame::maxent {

ActionBox ActionBox::symmetric(Index dim, double bound) {
  return ActionBox{Vector::Constant(dim, -bound), Vector::Constant(dim, bound)};
}

void ActionBox::validate() const {
  if (lo.size() != hi.size() || lo.size() == 0) throw std::invalid_argument("ActionBox: lo/hi size mismatch");
  for (Index j = 0; j < lo.size(); ++j) {
    if (!(lo(j) < hi(j))) throw std::invalid_argument("ActionBox: need lo < hi in coordinate " + std::to_string(j));
  }
}

Matrix ActionBox::clip(const Matrix& a) const {
  return a.cwiseMax(lo.transpose().replicate(a.rows(), 1)).cwiseMin(hi.transpose().replicate(a.rows(), 1));
}

Matrix ActionBox::sample_uniform(Index n, nk::Rng& rng) const {
  Matrix out(n, dim());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < dim(); ++j) out(i, j) = rng.uniform(lo(j), hi(j));
  return out;
}

double forward_kernel_log_pdf(const Vector& a_t, const Vector& a1, double t) {
  return nk::gaussian_log_pdf(a_t, t * a1, 1.0 - t);
}

double reverse_kernel_log_pdf(const Vector& a1, const Vector& a_t, double t) {
  return nk::gaussian_log_pdf(a1, a_t / t, (1.0 - t) / t);
}

Candidates reverse_sample_candidates(const Vector& a_t, double t, Index k, const ActionBox& box, nk::Rng& rng) {
  if (!(t >= flow::kTimeEpsilon && t <= 1.0 - flow::kTimeEpsilonHigh)) {
    throw std::invalid_argument("reverse_sample_candidates: t = " + std::to_string(t) + " outside [eps, 1 - eps_hi]");
  }
  if (k < 1) throw std::invalid_argument("reverse_sample_candidates: K must be >= 1");
  box.validate();
  const Index d = box.dim();
  if (a_t.size() != d) throw std::invalid_argument("reverse_sample_candidates: a_t dimension mismatch");
  const double s = 1.0 - t;
  Candidates c{Matrix(k, d), Matrix(k, d)};
  for (Index j = 0; j < d; ++j) {
    // a1 = (a_t + (1 - t) z) / t lies in [lo, hi] iff z lies in [zlo, zhi].
    const double zlo = (t * box.lo(j) - a_t(j)) / s;
    const double zhi = (t * box.hi(j) - a_t(j)) / s;
    for (Index i = 0; i < k; ++i) {
      const double z = nk::sample_truncated_standard_normal(zlo, zhi, rng);
      c.a1(i, j) = std::clamp((a_t(j) + s * z) / t, box.lo(j), box.hi(j));
    }
  }
  c.a0 = (a_t.transpose().replicate(k, 1) - t * c.a1) / s;
  return c;
}

}  // namespace flame::maxent
