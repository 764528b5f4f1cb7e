#pragma once

#include <optional>

#include "flame/numkit/tape.hpp"

namespace flame::net {

enum class FieldMode { Instantaneous, MeanFlow };

const char* to_string(FieldMode mode);

/// A velocity field over actions. Instantaneous fields are u(a, t, s); MeanFlow
/// fields are the interval-averaged velocity u_bar(a, zeta, t, s), where a is
/// the point at the start time zeta and the displacement over [zeta, t] is
/// (t - zeta) * u_bar.
///
/// All times are per-row columns (n x 1) so a batch can mix time points.
class VelocityField {
 public:
  virtual ~VelocityField() = default;

  virtual FieldMode mode() const = 0;
  virtual Index action_dim() const = 0;
  virtual Index state_dim() const = 0;

  virtual nk::Tensor forward(nk::Tape& tape, const nk::Tensor& a, const std::optional<nk::Tensor>& zeta,
                             const nk::Tensor& t, const nk::Tensor& s) const = 0;
  /// Gradient-free evaluation. The default runs forward() on a scratch tape.
  virtual Matrix eval(const Matrix& a, const std::optional<Matrix>& zeta, const Matrix& t, const Matrix& s) const;
};

/// Checked entry point: validates shapes, t in [0, 1], and that zeta is given
/// exactly in MeanFlow mode with zeta < t row-wise.
nk::Tensor forward_field(const VelocityField& field, nk::Tape& tape, const nk::Tensor& a,
                         const std::optional<nk::Tensor>& zeta, const nk::Tensor& t, const nk::Tensor& s);
Matrix eval_field(const VelocityField& field, const Matrix& a, const std::optional<Matrix>& zeta, const Matrix& t,
                  const Matrix& s);

/// Throws std::invalid_argument if the inputs violate the field contract.
void check_field_inputs(const VelocityField& field, const Matrix& a, const Matrix* zeta, const Matrix& t,
                        const Matrix& s);

}  // namespace flame::net
