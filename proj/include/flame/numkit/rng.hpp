#pragma once

#include <array>
#include <cstdint>

#include "flame/numkit/types.hpp"

namespace flame::nk {

/// xoshiro256** seeded through splitmix64. Output depends only on the seed,
/// the stream id and the call sequence, never on the platform's <random>.
///
/// `split(id)` derives an independent child from the parent's key (not its
/// current position), so components can own their streams without caring how
/// much the parent has consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  Rng split(std::uint64_t stream_id) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// +1 or -1 with equal probability.
  double rademacher();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  Matrix normal(Index rows, Index cols);
  Matrix uniform(Index rows, Index cols, double lo, double hi);
  Matrix rademacher(Index rows, Index cols);

  struct State {
    std::array<std::uint64_t, 4> s;
    std::uint64_t key;
    bool has_spare;
    double spare;
  };
  State state() const;
  void set_state(const State& st);

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t key_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace flame::nk
