#pragma once

#include "flame/flowcore/path.hpp"
#include "flame/netlib/vector_field.hpp"

namespace flame::flow {

/// Thrown when the integrated state stops being finite.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One Euler displacement from grid point k: dt * u(a, t_k) for instantaneous
/// fields, dt * u_bar(a, t_k, t_{k+1}) for MeanFlow fields.
Matrix euler_increment(const net::VelocityField& field, const Matrix& a, const Matrix& s,
                       const IntegrationSchedule& schedule, int k);

/// Explicit Euler over the schedule; instantaneous fields only.
Matrix integrate_flow(const net::VelocityField& field, const Matrix& a0, const Matrix& s,
                      const IntegrationSchedule& schedule);
/// a_{k+1} = a_k + (t_{k+1} - t_k) u_bar(a_k, t_k, t_{k+1}, s); MeanFlow fields only.
Matrix integrate_mean_flow(const net::VelocityField& field, const Matrix& a0, const Matrix& s,
                           const IntegrationSchedule& schedule);
/// Dispatches on the field's mode.
Matrix generate(const net::VelocityField& field, const Matrix& a0, const Matrix& s, const IntegrationSchedule& schedule);

}  // namespace flame::flow
