#pragma once

#include <optional>
#include <string>

#include "flame/flowcore/path.hpp"
#include "flame/netlib/vector_field.hpp"

namespace flame::flow {

struct DivergenceMode {
  enum class Kind { ExactTrace, Hutchinson };
  Kind kind = Kind::ExactTrace;
  int probes = 1;

  static DivergenceMode exact() { return {Kind::ExactTrace, 0}; }
  static DivergenceMode hutchinson(int n_probes);
  /// Exact trace up to max_exact_dim, otherwise Hutchinson with one probe.
  static DivergenceMode automatic(Index action_dim, Index max_exact_dim = 16);
  std::string describe() const;
};

/// Per-row divergence of the field with respect to a (n values). Exact mode
/// runs one jvp per coordinate; Hutchinson averages v^T J v over Rademacher
/// probes drawn from rng. All jvps of one call share a single stacked forward.
Vector divergence(const net::VelocityField& field, const Matrix& a, const std::optional<Matrix>& zeta, const Matrix& t,
                  const Matrix& s, const DivergenceMode& mode, nk::Rng* rng = nullptr);

struct LogProbResult {
  Matrix a1;
  Vector log_prob;
  DivergenceMode mode;
};

/// Euler co-integration of (a, l) from a0 with l_0 = log N(a0; 0, I):
/// a <- a + dt u, l <- l - dt div(u). For MeanFlow fields each substep uses
/// u_bar(a_k, t_k, t_{k+1}) and its trace in a_k. The returned a1 is bitwise
/// identical to generate() on the same schedule.
LogProbResult log_prob_augmented(const net::VelocityField& field, const Matrix& a0, const Matrix& s,
                                 const IntegrationSchedule& schedule, const DivergenceMode& mode,
                                 nk::Rng* rng = nullptr);

}  // namespace flame::flow
