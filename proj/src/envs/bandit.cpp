#include "flame/envs/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flame::env {

double SoftBandit::q(double a) {
  return std::exp(-(a - 0.5) * (a - 0.5) / 0.02) + std::exp(-(a + 0.5) * (a + 0.5) / 0.02);
}

Vector SoftBandit::q(const Matrix& a) {
  if (a.cols() != 1) throw std::invalid_argument("SoftBandit::q: expected (n x 1) actions");
  Vector out(a.rows());
  for (Index i = 0; i < a.rows(); ++i) out(i) = q(a(i, 0));
  return out;
}

Vector SoftBandit::reset(nk::Rng&) { return Vector::Zero(1); }

StepResult SoftBandit::step(const Vector& action) {
  if (action.size() != 1) throw std::invalid_argument("SoftBandit::step: action must have 1 entry");
  StepResult res;
  res.state = Vector::Zero(1);
  res.reward = q(std::clamp(action(0), -1.0, 1.0));
  res.terminated = true;
  return res;
}

double BanditOracle::entropy() const {
  const double h = grid(1) - grid(0);
  double e = 0.0;
  for (Index i = 0; i < grid.size(); ++i) {
    const double p = density(i);
    const double f = p > 0.0 ? -p * std::log(p) : 0.0;
    e += (i == 0 || i + 1 == grid.size() ? 0.5 : 1.0) * f * h;
  }
  return e;
}

double BanditOracle::mass_between(double lo, double hi) const {
  auto cdf_at = [&](double x) {
    const double h = grid(1) - grid(0);
    const double pos = std::clamp((x - grid(0)) / h, 0.0, static_cast<double>(grid.size() - 1));
    const auto i = static_cast<Index>(std::floor(pos));
    if (i + 1 >= grid.size()) return cdf(grid.size() - 1);
    const double frac = pos - static_cast<double>(i);
    return cdf(i) + frac * (cdf(i + 1) - cdf(i));
  };
  return cdf_at(hi) - cdf_at(lo);
}

BanditOracle boltzmann_oracle(const std::function<double(double)>& q, double alpha, Index grid_n) {
  if (grid_n < 1000) throw std::invalid_argument("boltzmann_oracle: grid_n must be >= 1000");
  if (!(alpha > 0.0)) throw std::invalid_argument("boltzmann_oracle: alpha must be positive");
  BanditOracle o;
  o.grid = Vector::LinSpaced(grid_n, -1.0, 1.0);
  Vector logits(grid_n);
  for (Index i = 0; i < grid_n; ++i) logits(i) = q(o.grid(i)) / alpha;
  o.density = (logits.array() - logits.maxCoeff()).exp();
  const double h = o.grid(1) - o.grid(0);
  o.cdf = Vector::Zero(grid_n);
  for (Index i = 1; i < grid_n; ++i) o.cdf(i) = o.cdf(i - 1) + 0.5 * h * (o.density(i - 1) + o.density(i));
  const double z = o.cdf(grid_n - 1);
  o.density /= z;
  o.cdf /= z;
  return o;
}

BanditOracle soft_bandit_oracle(double alpha, Index grid_n) {
  return boltzmann_oracle([](double a) { return SoftBandit::q(a); }, alpha, grid_n);
}

double wasserstein1(const Vector& samples, const BanditOracle& oracle) {
  if (samples.size() == 0) throw std::invalid_argument("wasserstein1: no samples");
  std::vector<double> xs(samples.data(), samples.data() + samples.size());
  const double lo = oracle.grid(0), hi = oracle.grid(oracle.grid.size() - 1);
  for (auto& x : xs) x = std::clamp(x, lo, hi);
  std::sort(xs.begin(), xs.end());
  // Integrate |F_n - F| over each grid cell at the cell midpoint.
  double w = 0.0;
  std::size_t below = 0;
  const double n = static_cast<double>(xs.size());
  for (Index i = 0; i + 1 < oracle.grid.size(); ++i) {
    const double mid = 0.5 * (oracle.grid(i) + oracle.grid(i + 1));
    while (below < xs.size() && xs[below] <= mid) ++below;
    const double f = 0.5 * (oracle.cdf(i) + oracle.cdf(i + 1));
    w += std::abs(static_cast<double>(below) / n - f) * (oracle.grid(i + 1) - oracle.grid(i));
  }
  return w;
}

}  // namespace flame::env
