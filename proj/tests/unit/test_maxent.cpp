#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "flame/flowcore/integrate.hpp"
#include "flame/flowcore/losses.hpp"
#include "flame/maxent/actor_loss.hpp"
#include "flame/maxent/agent.hpp"
#include "flame/maxent/critic.hpp"
#include "flame/maxent/replay.hpp"
#include "flame/maxent/reverse_kernel.hpp"
#include "flame/maxent/snis.hpp"

using namespace flame;
using namespace flame::maxent;

namespace {

net::VectorFieldNet small_actor(net::FieldMode mode, Index d, Index m, nk::Rng& rng) {
  net::VectorFieldSpec spec;
  spec.action_dim = d;
  spec.state_dim = m;
  spec.mode = mode;
  spec.hidden_layers = 2;
  spec.hidden_width = 16;
  spec.embedding.dim = 8;
  spec.zero_init_output = false;
  return net::VectorFieldNet(spec, rng);
}

Vector bumpy_q(const Matrix& s, const Matrix& a) {
  Vector q(a.rows());
  for (Index i = 0; i < a.rows(); ++i) q(i) = std::sin(3.0 * a(i, 0)) + a.row(i).squaredNorm() + 0.1 * s(i, 0);
  return q;
}

FlameConfig tiny_config(Variant v) {
  FlameConfig c;
  c.variant = v;
  c.k = 8;
  c.n_gen_train = 4;
  c.n_est = 3;
  c.batch_size = 16;
  c.actor_layers = 1;
  c.actor_width = 16;
  c.critic_layers = 1;
  c.critic_width = 16;
  c.embedding.dim = 8;
  return c;
}

ReplayBuffer filled_buffer(Index m, Index d, nk::Rng& rng, std::size_t n = 64) {
  ReplayBuffer buf(1000, m, d);
  for (std::size_t i = 0; i < n; ++i) {
    Transition tr;
    tr.s = rng.normal(m, 1);
    tr.a = rng.uniform(d, 1, -1.0, 1.0);
    tr.a0 = rng.normal(d, 1);
    tr.r = rng.uniform();
    tr.s_next = rng.normal(m, 1);
    tr.done = i % 7 == 0;
    buf.push(tr);
  }
  return buf;
}

}  // namespace

TEST_CASE("forward and reverse kernels satisfy the density relation") {
  nk::Rng rng(11);
  for (Index d : {1, 2, 4}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const double t = rng.uniform(0.05, 0.95);
      const Vector a1 = rng.uniform(d, 1, -1.0, 1.0);
      const Vector a_t = t * a1 + (1.0 - t) * Vector(rng.normal(d, 1));
      const double lhs = forward_kernel_log_pdf(a_t, a1, t);
      const double rhs = -static_cast<double>(d) * std::log(t) + reverse_kernel_log_pdf(a1, a_t, t);
      CHECK(std::abs(std::exp(lhs) - std::exp(rhs)) / std::exp(lhs) < 1e-10);
    }
  }
  // d = 1, t = 0.6, a_t = 0.3, a1 = 0.5: both sides equal N(0.3; 0.3, 0.16).
  Vector a_t(1), a1(1);
  a_t << 0.3;
  a1 << 0.5;
  const double expected = -0.5 * std::log(2.0 * M_PI * 0.16);
  CHECK(forward_kernel_log_pdf(a_t, a1, 0.6) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(reverse_kernel_log_pdf(a1, a_t, 0.6) - std::log(0.6) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("reverse-sampled candidates recover a_t and stay in the box") {
  nk::Rng rng(3);
  const auto box = ActionBox::symmetric(3, 1.0);
  for (double t : {1e-3, 0.2, 0.5, 0.9, 1.0 - 1e-3}) {
    const Vector a_t = rng.uniform(3, 1, -1.5, 1.5);
    const auto c = reverse_sample_candidates(a_t, t, 200, box, rng);
    for (Index i = 0; i < 200; ++i) {
      const Vector back = t * c.a1.row(i).transpose() + (1.0 - t) * c.a0.row(i).transpose();
      CHECK((back - a_t).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(c.a1.row(i).cwiseAbs().maxCoeff() <= 1.0);
    }
  }
  CHECK_THROWS_AS(reverse_sample_candidates(Vector::Zero(3), 1.0, 4, box, rng), std::invalid_argument);
  CHECK_THROWS_AS(reverse_sample_candidates(Vector::Zero(3), 0.0, 4, box, rng), std::invalid_argument);
}

TEST_CASE("reverse kernel matches its Gaussian when the box is far away") {
  nk::Rng rng(5);
  const auto box = ActionBox::symmetric(1, 100.0);
  Vector a_t(1);
  a_t << 0.4;
  const double t = 0.5;
  const auto c = reverse_sample_candidates(a_t, t, 200000, box, rng);
  const double mean = c.a1.mean();
  const double var = (c.a1.array() - mean).square().mean();
  CHECK(mean == doctest::Approx(0.8).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("SNIS weights normalise and respect shift and joint scaling") {
  nk::Rng rng(8);
  const Vector q = rng.normal(50, 1) * 3.0;
  const Vector w = snis_weights(q, 0.2);
  CHECK(std::abs(w.sum() - 1.0) < 1e-12);
  CHECK((w - snis_weights((q.array() + 1e3).matrix(), 0.2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((w - snis_weights(q * 7.0, 1.4)).cwiseAbs().maxCoeff() < 1e-12);

  Vector ties(4);
  ties << 1.0, 3.0, 3.0, -2.0;
  const Vector arg = snis_weights(ties, 0.0);
  CHECK(arg(0) == 0.0);
  CHECK(arg(1) == 0.5);
  CHECK(arg(2) == 0.5);
  const Vector huge = snis_weights(ties * 1e6, 1e-3);
  CHECK(std::isfinite(huge.sum()));
  CHECK(huge(1) == doctest::Approx(0.5));

  Vector bad = ties;
  bad(2) = NAN;
  CHECK_THROWS_AS(snis_weights(bad, 0.2), std::domain_error);
}

TEST_CASE("replay buffer wraps around and samples stored transitions") {
  ReplayBuffer buf(3, 1, 1);
  for (int i = 0; i < 5; ++i) {
    Transition tr{Vector::Constant(1, i), Vector::Constant(1, -i), Vector::Zero(1), double(i),
                  Vector::Constant(1, i + 1), false};
    buf.push(tr);
  }
  CHECK(buf.size() == 3);
  nk::Rng rng(1);
  const auto b = buf.sample(100, rng);
  for (Index i = 0; i < 100; ++i) {
    CHECK(b.s(i, 0) >= 2.0);
    CHECK(b.a(i, 0) == -b.s(i, 0));
    CHECK(b.s_next(i, 0) == b.s(i, 0) + 1.0);
  }
}

TEST_CASE("soft TD target") {
  Batch b;
  b.s = Matrix::Zero(3, 1);
  b.r = Vector::Constant(3, 1.0);
  b.done = Vector::Zero(3);
  b.done(2) = 1.0;
  Vector q(3), logp(3);
  q << 4.0, -2.0, 100.0;
  logp << -1.0, 0.5, 3.0;
  SUBCASE("gamma 0 returns the reward") { CHECK(soft_td_target(b, q, logp, 0.2, 0.0) == Vector::Constant(3, 1.0)); }
  SUBCASE("entropy bonus and terminal masking") {
    const Vector y = soft_td_target(b, q, logp, 0.2, 0.9);
    CHECK(y(0) == doctest::Approx(1.0 + 0.9 * 4.2));
    CHECK(y(1) == doctest::Approx(1.0 + 0.9 * -2.1));
    CHECK(y(2) == 1.0);
  }
  SUBCASE("tabular fixed point") {
    Batch one;
    one.s = Matrix::Zero(1, 1);
    one.r = Vector::Constant(1, 1.0);
    one.done = Vector::Zero(1);
    Vector v = Vector::Zero(1);
    for (int i = 0; i < 2000; ++i) v = soft_td_target(one, v, Vector::Zero(1), 0.0, 0.9);
    CHECK(v(0) == doctest::Approx(10.0).epsilon(1e-9));
  }
  SUBCASE("non-finite inputs are reported") {
    q(1) = INFINITY;
    CHECK_THROWS_AS(soft_td_target(b, q, logp, 0.2, 0.9), std::domain_error);
  }
}

TEST_CASE("temperature follows the target entropy") {
  SUBCASE("stationary at the target") {
    Temperature temp({0.2, 1e-2, -2.0, true});
    temp.update(Vector::Constant(8, 2.0));
    CHECK(temp.alpha() == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("low entropy raises alpha monotonically") {
    Temperature temp({0.2, 1e-3, -2.0, true});
    double prev = temp.alpha();
    for (int i = 0; i < 100; ++i) {
      temp.update(Vector::Constant(8, 3.0));
      CHECK(temp.alpha() > prev);
      prev = temp.alpha();
    }
  }
  SUBCASE("high entropy lowers alpha") {
    Temperature temp({0.2, 1e-3, -2.0, true});
    temp.update(Vector::Constant(8, 0.0));
    CHECK(temp.alpha() < 0.2);
  }
  SUBCASE("zero init is fixed") {
    Temperature temp({0.0, 1e-3, -2.0, true});
    temp.update(Vector::Constant(8, 3.0));
    CHECK(temp.alpha() == 0.0);
    CHECK_FALSE(temp.config().learnable);
  }
}

TEST_CASE("QRFM loss equals the explicit weighted regression") {
  nk::Rng init(21);
  const auto actor = small_actor(net::FieldMode::Instantaneous, 2, 1, init);
  const Matrix s = init.normal(5, 1);
  ActorLossConfig cfg{16, 0.3, ActionBox::symmetric(2, 1.0)};
  nk::Rng rng(99);
  nk::Rng replay = rng;
  nk::Tape tape;
  const auto loss = qrfm_loss(actor, tape, s, bumpy_q, cfg, Proposal{}, rng);

  const Matrix t = flow::sample_times(5, replay, flow::kTimeEpsilon, 1.0 - flow::kTimeEpsilonHigh);
  const Matrix a_t = cfg.box.sample_uniform(5, replay);
  const auto wc = weighted_candidates(s, a_t, t, bumpy_q, cfg, replay);
  const Matrix u = net::eval_field(actor, a_t, std::nullopt, t, s);
  double direct = 0.0;
  for (Index b = 0; b < 5; ++b)
    for (Index i = 0; i < cfg.k; ++i) {
      const Index r = b * cfg.k + i;
      direct += wc.weights(r) * (u.row(b) - (wc.a1.row(r) - wc.a0.row(r))).squaredNorm();
    }
  CHECK(loss.loss.value()(0, 0) == doctest::Approx(direct / 5.0).epsilon(1e-12));
  CHECK(loss.effective_sample_size >= 1.0);
  CHECK(loss.effective_sample_size <= 16.0);
}

TEST_CASE("QRMF loss equals the explicit weighted MeanFlow regression") {
  nk::Rng init(22);
  const auto actor = small_actor(net::FieldMode::MeanFlow, 2, 1, init);
  const Matrix s = init.normal(4, 1);
  ActorLossConfig cfg{12, 0.5, ActionBox::symmetric(2, 1.0)};
  nk::Rng rng(7);
  nk::Rng replay = rng;
  nk::Tape tape;
  const auto loss = qrmf_loss(actor, tape, s, bumpy_q, cfg, Proposal{}, rng);

  const auto tp = flow::sample_time_pairs(4, replay);
  const Matrix a_z = cfg.box.sample_uniform(4, replay);
  const auto wc = weighted_candidates(s, a_z, tp.zeta, bumpy_q, cfg, replay);
  const Matrix u = net::eval_field(actor, a_z, tp.zeta, tp.t, s);
  double direct = 0.0;
  for (Index b = 0; b < 4; ++b) {
    const Matrix rep_a = a_z.row(b).replicate(cfg.k, 1);
    const Matrix rep_s = s.row(b).replicate(cfg.k, 1);
    const Matrix rep_z = Matrix::Constant(cfg.k, 1, tp.zeta(b, 0));
    const Matrix rep_t = Matrix::Constant(cfg.k, 1, tp.t(b, 0));
    const Matrix c = wc.a1.middleRows(b * cfg.k, cfg.k) - wc.a0.middleRows(b * cfg.k, cfg.k);
    const Matrix target = flow::meanflow_target(actor, rep_a, rep_z, rep_t, rep_s, c);
    for (Index i = 0; i < cfg.k; ++i) direct += wc.weights(b * cfg.k + i) * (u.row(b) - target.row(i)).squaredNorm();
  }
  CHECK(loss.loss.value()(0, 0) == doctest::Approx(direct / 4.0).epsilon(1e-10));
}

TEST_CASE("last-policy proposal interpolates policy actions") {
  nk::Rng init(2);
  const auto old = small_actor(net::FieldMode::Instantaneous, 2, 1, init);
  Proposal p{ProposalKind::LastPolicy, &old, flow::IntegrationSchedule::uniform(3)};
  const Matrix s = init.normal(6, 1);
  nk::Rng rng(4);
  nk::Rng replay = rng;
  const Matrix a_t = proposal_sample(p, s, Matrix::Ones(6, 1), ActionBox::symmetric(2, 1.0), rng);
  const Matrix a1 = flow::generate(old, replay.normal(6, 2), s, p.schedule);
  CHECK((a_t - a1).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(proposal_from_string("last_policy") == ProposalKind::LastPolicy);
  CHECK_THROWS(proposal_from_string("prior"));
}

TEST_CASE("agent train step") {
  for (Variant v : {Variant::R, Variant::M}) {
    const std::string variant = to_string(v);
    CAPTURE(variant);
    nk::Rng rng(5);
    auto buf = filled_buffer(3, 2, rng);
    FlameAgent agent(3, ActionBox::symmetric(2, 1.0), tiny_config(v), 17);
    const auto batch = buf.sample(16, rng);

    SUBCASE("metrics are finite and parameters move") {
      // Only the zero-initialised output layer receives gradient on the first step.
      const Matrix before = agent.actor().parameters().back().value;
      const auto m = agent.train_step(batch, rng);
      CHECK(std::isfinite(m.critic_loss));
      CHECK(std::isfinite(m.actor_loss));
      CHECK(std::isfinite(m.entropy));
      CHECK(m.alpha > 0.0);
      CHECK((agent.actor().parameters().back().value - before).norm() > 0.0);
      CHECK(agent.updates() == 1);
    }
    SUBCASE("zero learning rates leave online parameters untouched") {
      auto cfg = tiny_config(v);
      cfg.actor_lr = {0.0, 0.0, 0};
      cfg.critic_lr = 0.0;
      cfg.alpha_lr = 0.0;
      FlameAgent frozen(3, ActionBox::symmetric(2, 1.0), cfg, 17);
      const auto actor_before = frozen.actor().parameters();
      const auto critic_before = frozen.critics().q(0).parameters();
      const double alpha_before = frozen.temperature().alpha();
      const auto m = frozen.train_step(batch, rng);
      CHECK(std::isfinite(m.actor_loss));
      for (std::size_t i = 0; i < actor_before.size(); ++i)
        CHECK(frozen.actor().parameters()[i].value == actor_before[i].value);
      for (std::size_t i = 0; i < critic_before.size(); ++i)
        CHECK(frozen.critics().q(0).parameters()[i].value == critic_before[i].value);
      CHECK(frozen.temperature().alpha() == alpha_before);
    }
    SUBCASE("actions lie in the box and use the eval schedule") {
      const auto act = agent.act(rng.normal(50, 3), rng, true);
      CHECK(act.a.cwiseAbs().maxCoeff() <= 1.0);
      CHECK(act.a0.rows() == 50);
    }
    SUBCASE("checkpoint round trip restores behaviour") {
      for (int i = 0; i < 3; ++i) agent.train_step(batch, rng);
      net::Checkpoint ckpt;
      agent.save(ckpt);
      const auto path = std::filesystem::temp_directory_path() / "flame_agent_roundtrip.ckpt";
      ckpt.save(path);
      FlameAgent restored(3, ActionBox::symmetric(2, 1.0), tiny_config(v), 999);
      restored.load(net::Checkpoint::load(path));
      std::filesystem::remove(path);
      CHECK(restored.updates() == agent.updates());
      CHECK(restored.temperature().alpha() == agent.temperature().alpha());
      nk::Rng r1(3), r2(3);
      const auto m1 = agent.train_step(batch, r1);
      const auto m2 = restored.train_step(batch, r2);
      CHECK(m1.actor_loss == m2.actor_loss);
      CHECK(m1.critic_loss == m2.critic_loss);
    }
  }
}

TEST_CASE("entropy-free configuration uses argmax weights and no bonus") {
  auto cfg = tiny_config(Variant::R);
  cfg.entropy_bonus = false;
  FlameAgent agent(3, ActionBox::symmetric(2, 1.0), cfg, 1);
  nk::Rng rng(2);
  auto buf = filled_buffer(3, 2, rng);
  const auto m = agent.train_step(buf.sample(16, rng), rng);
  CHECK(m.alpha == 0.0);
  CHECK(m.effective_sample_size == doctest::Approx(1.0));
}
