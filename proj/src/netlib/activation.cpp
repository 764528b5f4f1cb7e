#include <stdexcept>

#include "flame/netlib/mlp.hpp"
#include "flame/numkit/ops.hpp"

namespace flame::net {

Matrix apply_activation(Activation act, Matrix x) {
  switch (act) {
    case Activation::Mish:
      nk::mish_inplace(x);
      return x;
    case Activation::ReLU:
      x = x.array().max(0.0).matrix();
      return x;
  }
  throw std::logic_error("unknown activation");
}

nk::Tensor apply_activation(Activation act, const nk::Tensor& x) {
  switch (act) {
    case Activation::Mish:
      return nk::mish(x);
    case Activation::ReLU:
      return nk::relu(x);
  }
  throw std::logic_error("unknown activation");
}

const char* to_string(Activation act) { return act == Activation::Mish ? "mish" : "relu"; }

Activation activation_from_string(const std::string& name) {
  if (name == "mish") return Activation::Mish;
  if (name == "relu") return Activation::ReLU;
  throw std::invalid_argument("unknown activation '" + name + "' (expected mish or relu)");
}

}  // namespace flame::net
