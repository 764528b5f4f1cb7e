#include "flame/numkit/tape.hpp"

#include <stdexcept>
#include <utility>

namespace flame::nk {

Parameter::Parameter(std::string name_, Matrix value_)
    : name(std::move(name_)), value(std::move(value_)), grad(Matrix::Zero(value.rows(), value.cols())) {}

const Matrix& Tensor::value() const {
  if (tape_ == nullptr) throw std::logic_error("Tensor: use of an empty handle");
  return tape_->nodes_[id_].value;
}

Matrix Tensor::grad() const {
  const auto& n = tape_->nodes_[id_];
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

bool Tensor::has_tangent() const { return tape_->nodes_[id_].tangent.has_value(); }

const Matrix& Tensor::tangent() const {
  const auto& n = tape_->nodes_[id_];
  if (!n.tangent) throw std::logic_error("Tensor: no tangent recorded for this node");
  return *n.tangent;
}

bool Tensor::requires_grad() const { return tape_->nodes_[id_].needs_grad; }

double Tensor::item() const {
  const Matrix& v = value();
  if (v.size() != 1) throw std::invalid_argument("Tensor::item: tensor is not a scalar");
  return v(0, 0);
}

Tensor Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Tensor(this, nodes_.size() - 1);
}

Tensor Tape::constant(Matrix value) {
  Node n;
  n.kind = Kind::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Tensor Tape::constant(Matrix value, Matrix tangent) {
  if (value.rows() != tangent.rows() || value.cols() != tangent.cols()) {
    throw std::invalid_argument("Tape::constant: tangent shape does not match value shape");
  }
  Node n;
  n.kind = Kind::Constant;
  n.value = std::move(value);
  n.tangent = std::move(tangent);
  return push(std::move(n));
}

Tensor Tape::variable(Matrix value) {
  Node n;
  n.kind = Kind::Variable;
  n.value = std::move(value);
  n.needs_grad = grad_enabled();
  return push(std::move(n));
}

Tensor Tape::variable(Matrix value, Matrix tangent) {
  if (value.rows() != tangent.rows() || value.cols() != tangent.cols()) {
    throw std::invalid_argument("Tape::variable: tangent shape does not match value shape");
  }
  Node n;
  n.kind = Kind::Variable;
  n.value = std::move(value);
  n.tangent = std::move(tangent);
  n.needs_grad = grad_enabled();
  return push(std::move(n));
}

Tensor Tape::param(const Parameter& p) {
  Node n;
  n.kind = Kind::Param;
  n.value = p.value;
  n.param = &p;
  n.needs_grad = grad_enabled();
  return push(std::move(n));
}

Tensor Tape::record(Matrix value, std::optional<Matrix> tangent, std::initializer_list<Tensor> inputs,
                    BackwardFn backward) {
  return record(std::move(value), std::move(tangent), std::span<const Tensor>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Tensor Tape::record(Matrix value, std::optional<Matrix> tangent, std::span<const Tensor> inputs,
                    BackwardFn backward) {
  Node n;
  n.kind = Kind::Op;
  n.value = std::move(value);
  n.tangent = std::move(tangent);
  if (grad_enabled()) {
    for (const auto& in : inputs) {
      if (in.tape_ != this) throw std::logic_error("Tape::record: input belongs to a different tape");
      n.needs_grad = n.needs_grad || nodes_[in.id_].needs_grad;
    }
  }
  if (n.needs_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

void Tape::accumulate(std::size_t id, const Matrix& delta) { accumulate_expr(id, delta); }

void Tape::backward(const Tensor& loss) {
  if (loss.tape_ != this) throw std::invalid_argument("Tape::backward: tensor belongs to a different tape");
  if (nodes_[loss.id_].value.size() != 1) {
    throw std::invalid_argument("Tape::backward: loss must be a scalar (1x1) tensor");
  }
  for (auto& n : nodes_) {
    if (n.kind != Kind::Variable) n.grad.resize(0, 0);
  }
  if (!nodes_[loss.id_].needs_grad) return;
  accumulate(loss.id_, Matrix::Ones(1, 1));
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    // Inputs always precede their consumers, so the callback never touches n.grad.
    if (n.backward) n.backward(*this, n.grad);
    if (n.kind == Kind::Param) n.param->grad += n.grad;
  }
}

void Tape::clear() { nodes_.clear(); }

JvpResult jvp(const TensorFn& f, std::span<const Matrix> x, std::span<const Matrix> v) {
  if (x.size() != v.size()) throw std::invalid_argument("jvp: tangent count does not match input count");
  Tape tape(GradMode::Disabled);
  std::vector<Tensor> inputs;
  inputs.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].rows() != v[i].rows() || x[i].cols() != v[i].cols()) {
      throw std::invalid_argument("jvp: tangent " + std::to_string(i) + " shape does not match its input");
    }
    inputs.push_back(tape.constant(x[i], v[i]));
  }
  Tensor out = f(tape, inputs);
  JvpResult r;
  r.value = out.value();
  r.tangent = out.has_tangent() ? out.tangent() : Matrix::Zero(out.rows(), out.cols());
  return r;
}

std::vector<Matrix> gradient(const TensorFn& f, std::span<const Matrix> x) {
  Tape tape;
  std::vector<Tensor> inputs;
  inputs.reserve(x.size());
  for (const auto& xi : x) inputs.push_back(tape.variable(xi));
  Tensor out = f(tape, inputs);
  tape.backward(out);
  std::vector<Matrix> grads;
  grads.reserve(inputs.size());
  for (const auto& in : inputs) grads.push_back(in.grad());
  return grads;
}

Matrix tangent_or_zero(const Tensor& x) {
  if (x.has_tangent()) return x.tangent();
  return Matrix::Zero(x.rows(), x.cols());
}

}  // namespace flame::nk
