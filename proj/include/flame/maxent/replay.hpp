#pragma once

#include <cstddef>

#include "flame/numkit/rng.hpp"

namespace flame::maxent {

struct Transition {
  Vector s;
  Vector a;
  /// Base noise that generated a.
  Vector a0;
  double r = 0.0;
  Vector s_next;
  /// Terminal (not time-limit) transition: the bootstrap term is dropped.
  bool done = false;
};

struct Batch {
  Matrix s, a, a0, s_next;
  Vector r, done;
  Index size() const { return s.rows(); }
};

/// Fixed-capacity ring buffer with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, Index state_dim, Index action_dim);

  void push(const Transition& tr);
  Batch sample(Index n, nk::Rng& rng) const;
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t next_ = 0;
  Matrix s_, a_, a0_, s_next_;
  Vector r_, done_;
};

}  // namespace flame::maxent
