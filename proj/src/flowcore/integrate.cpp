#include "flame/flowcore/integrate.hpp"

#include <sstream>

namespace flame::flow {

namespace {

void check_finite(const Matrix& a, const IntegrationSchedule& schedule, int k) {
  if (a.allFinite()) return;
  Index bad = 0;
  while (bad < a.rows() && a.row(bad).allFinite()) ++bad;
  std::ostringstream msg;
  msg << "flow integration diverged after step " << k + 1 << " of " << schedule.n_steps() << " (t = "
      << schedule.time(k + 1) << "), first non-finite row " << bad;
  throw IntegrationError(msg.str());
}

}  // namespace

Matrix euler_increment(const net::VelocityField& field, const Matrix& a, const Matrix& s,
                       const IntegrationSchedule& schedule, int k) {
  const Index n = a.rows();
  const Matrix t0 = Matrix::Constant(n, 1, schedule.time(k));
  if (field.mode() == net::FieldMode::MeanFlow) {
    const Matrix t1 = Matrix::Constant(n, 1, schedule.time(k + 1));
    return schedule.dt(k) * net::eval_field(field, a, t0, t1, s);
  }
  return schedule.dt(k) * net::eval_field(field, a, std::nullopt, t0, s);
}

Matrix integrate_flow(const net::VelocityField& field, const Matrix& a0, const Matrix& s,
                      const IntegrationSchedule& schedule) {
  if (field.mode() != net::FieldMode::Instantaneous) {
    throw std::invalid_argument("integrate_flow: needs an instantaneous field");
  }
  return generate(field, a0, s, schedule);
}

Matrix integrate_mean_flow(const net::VelocityField& field, const Matrix& a0, const Matrix& s,
                           const IntegrationSchedule& schedule) {
  if (field.mode() != net::FieldMode::MeanFlow) throw std::invalid_argument("integrate_mean_flow: needs a MeanFlow field");
  return generate(field, a0, s, schedule);
}

Matrix generate(const net::VelocityField& field, const Matrix& a0, const Matrix& s, const IntegrationSchedule& schedule) {
  Matrix a = a0;
  for (int k = 0; k < schedule.n_steps(); ++k) {
    a += euler_increment(field, a, s, schedule, k);
    check_finite(a, schedule, k);
  }
  return a;
}

}  // namespace flame::flow
