#pragma once

#include <span>

#include "flame/numkit/tape.hpp"

// Differentiable operations on Tensors. Every op records its value, propagates
// tangents when any input carries one, and registers a backward rule.
namespace flame::nk {

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a);
/// Elementwise product.
Tensor operator*(const Tensor& a, const Tensor& b);
Tensor operator*(double c, const Tensor& a);
Tensor operator*(const Tensor& a, double c);

Tensor matmul(const Tensor& a, const Tensor& b);
/// x (n x m) plus a 1 x m row broadcast over rows.
Tensor add_row(const Tensor& x, const Tensor& row);
/// Scales each row of x (n x m) by the matching entry of col (n x 1).
Tensor mul_col(const Tensor& x, const Tensor& col);

Tensor square(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);
/// x * tanh(softplus(x)).
Tensor mish(const Tensor& x);

/// Sum of all entries, 1 x 1.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Per-row sum, n x 1.
Tensor row_sum(const Tensor& x);

Tensor concat_cols(std::span<const Tensor> parts);

/// For a column t (n x 1) and frequencies w (k), returns [sin(w t), cos(w t)] (n x 2k).
Tensor sinusoidal(const Tensor& t, const Vector& freqs);

/// Identity in value and tangent; blocks the reverse sweep.
Tensor stop_gradient(const Tensor& x);

// Plain-matrix kernels shared with the tape-free inference path.
void mish_inplace(Matrix& x);
Matrix mish_derivative(const Matrix& x);

}  // namespace flame::nk
