#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flame/numkit/types.hpp"

namespace flame::nk {

/// Named trainable array. The value is owned here; tapes only hold references.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Matrix value);

  std::string name;
  Matrix value;
  // Written through const references held by tapes during backward().
  mutable Matrix grad;

  void zero_grad() const { grad.setZero(value.rows(), value.cols()); }
};

enum class GradMode { Enabled, Disabled };

class Tape;

/// Lightweight handle to a node recorded on a Tape. Copying a Tensor never
/// copies data; the handle is valid for the lifetime of the tape (until clear()).
class Tensor {
 public:
  Tensor() = default;

  const Matrix& value() const;
  /// Accumulated gradient; zeros if backward never reached this node.
  Matrix grad() const;
  bool has_tangent() const;
  /// Forward-mode directional derivative carried alongside the value.
  const Matrix& tangent() const;
  bool requires_grad() const;

  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  double item() const;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records operations in creation order, which is a valid topological order,
/// so the reverse sweep is a plain backwards loop. Tangents are propagated
/// eagerly at record time, giving forward mode on the same op set.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  explicit Tape(GradMode mode = GradMode::Enabled) : mode_(mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = delete;
  Tape& operator=(Tape&&) = delete;

  GradMode mode() const { return mode_; }
  bool grad_enabled() const { return mode_ == GradMode::Enabled; }

  Tensor constant(Matrix value);
  Tensor constant(Matrix value, Matrix tangent);
  /// Leaf whose gradient is kept on the tape (inputs under test, etc.).
  Tensor variable(Matrix value);
  Tensor variable(Matrix value, Matrix tangent);
  /// Leaf bound to a Parameter; backward() accumulates into Parameter::grad.
  Tensor param(const Parameter& p);

  /// Reverse sweep from a 1x1 tensor. Interior gradients are reset on every
  /// call; leaf and Parameter gradients accumulate.
  void backward(const Tensor& loss);
  void clear();
  std::size_t size() const { return nodes_.size(); }

  // Op-author interface.
  Tensor record(Matrix value, std::optional<Matrix> tangent, std::initializer_list<Tensor> inputs,
                BackwardFn backward);
  Tensor record(Matrix value, std::optional<Matrix> tangent, std::span<const Tensor> inputs,
                BackwardFn backward);
  const Matrix& value_of(std::size_t id) const { return nodes_[id].value; }
  /// Adds `delta` to the gradient buffer of node `id` if that node needs one.
  void accumulate(std::size_t id, const Matrix& delta);
  template <typename Expr>
  void accumulate_expr(std::size_t id, const Expr& delta) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
      n.grad = delta;
    } else {
      n.grad += delta;
    }
  }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

 private:
  friend class Tensor;

  enum class Kind { Constant, Variable, Param, Op };
  struct Node {
    Kind kind = Kind::Constant;
    Matrix value;
    Matrix grad;
    std::optional<Matrix> tangent;
    bool needs_grad = false;
    BackwardFn backward;
    const Parameter* param = nullptr;
  };

  Tensor push(Node node);

  GradMode mode_;
  std::vector<Node> nodes_;
};

/// The tangent of x, or zeros if none reached it (x does not depend on any
/// input that carried a tangent).
Matrix tangent_or_zero(const Tensor& x);

/// Result of a forward-mode evaluation.
struct JvpResult {
  Matrix value;
  Matrix tangent;
};

using TensorFn = std::function<Tensor(Tape&, std::span<const Tensor>)>;

/// Evaluates f at x and its directional derivative along v in forward mode.
/// Parameters referenced inside f carry zero tangent.
JvpResult jvp(const TensorFn& f, std::span<const Matrix> x, std::span<const Matrix> v);

/// Reverse-mode gradient of a scalar-valued f with respect to each input.
std::vector<Matrix> gradient(const TensorFn& f, std::span<const Matrix> x);

}  // namespace flame::nk
