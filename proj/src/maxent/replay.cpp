#include "flame/maxent/replay.hpp"

#include <stdexcept>

namespace flame::maxent {

ReplayBuffer::ReplayBuffer(std::size_t capacity, Index state_dim, Index action_dim)
    : capacity_(capacity),
      s_(static_cast<Index>(capacity), state_dim),
      a_(static_cast<Index>(capacity), action_dim),
      a0_(static_cast<Index>(capacity), action_dim),
      s_next_(static_cast<Index>(capacity), state_dim),
      r_(static_cast<Index>(capacity)),
      done_(static_cast<Index>(capacity)) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(const Transition& tr) {
  if (tr.s.size() != s_.cols() || tr.s_next.size() != s_.cols() || tr.a.size() != a_.cols() ||
      tr.a0.size() != a_.cols()) {
    throw std::invalid_argument("ReplayBuffer::push: transition shape mismatch");
  }
  if (!tr.a0.allFinite()) throw std::invalid_argument("ReplayBuffer::push: non-finite base noise");
  const auto i = static_cast<Index>(next_);
  s_.row(i) = tr.s.transpose();
  a_.row(i) = tr.a.transpose();
  a0_.row(i) = tr.a0.transpose();
  s_next_.row(i) = tr.s_next.transpose();
  r_(i) = tr.r;
  done_(i) = tr.done ? 1.0 : 0.0;
  next_ = (next_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

Batch ReplayBuffer::sample(Index n, nk::Rng& rng) const {
  if (size_ == 0) throw std::logic_error("ReplayBuffer::sample: buffer is empty");
  Batch b{Matrix(n, s_.cols()), Matrix(n, a_.cols()), Matrix(n, a_.cols()), Matrix(n, s_.cols()), Vector(n), Vector(n)};
  for (Index k = 0; k < n; ++k) {
    const auto i = static_cast<Index>(rng.below(size_));
    b.s.row(k) = s_.row(i);
    b.a.row(k) = a_.row(i);
    b.a0.row(k) = a0_.row(i);
    b.s_next.row(k) = s_next_.row(i);
    b.r(k) = r_(i);
    b.done(k) = done_(i);
  }
  return b;
}

}  // namespace flame::maxent
