#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "reachsched/error_model.hpp"
#include "reachsched/errors.hpp"
#include "reachsched/reference_planner.hpp"
#include "reachsched/simulator.hpp"

using namespace reachsched;
using namespace reachsched::testing;

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(GStep, ToyBranches) {
  const ErrorBoundModel m = toy_model();
  EXPECT_NEAR(g_step(m, 5.0, 1, 0.1), 3.1, 1e-12);
  EXPECT_NEAR(g_step(m, 5.0, 0, 0.1), 6.1, 1e-12);
  EXPECT_EQ(g_step(m, 0.0, 1, 0.0), 0.0);
  EXPECT_EQ(g_step(m, kInf, 1, 0.1), kInf);
  EXPECT_EQ(g_step(m, kInf, 0, 0.1), kInf);
}

TEST(GStep, FromClfMatchesToy) {
  const SystemModel sys = toy_system();
  const ErrorBoundModel m = ErrorBoundModel::from_clf(toy_clf(sys), sys, 10.0);
  EXPECT_NEAR(m.g(5.0, 1, 0.1), 3.1, 1e-12);
  EXPECT_NEAR(m.g(5.0, 0, 0.1), 6.1, 1e-12);
  EXPECT_FALSE(m.alpha2_clamped());
}

TEST(GStep, Monotone) {
  const auto cfg = load_scenario("pendulum.json");
  const ErrorBoundModel models[] = {toy_model(), ErrorBoundModel::from_clf(cfg.clf, cfg.system, 0.05)};
  std::mt19937_64 rng(4);
  for (const auto& m : models) {
    std::uniform_real_distribution<double> V(0.0, m.horizon());
    std::uniform_real_distribution<double> W(0.0, 0.2);
    for (int i = 0; i < 10000; ++i) {
      double v = V(rng), vp = V(rng), w = W(rng), wp = W(rng);
      if (v > vp) std::swap(v, vp);
      if (w > wp) std::swap(w, wp);
      const int c = static_cast<int>(rng() & 1u);
      ASSERT_LE(m.g(v, c, w), m.g(vp, c, w));
      ASSERT_LE(m.g(vp, c, w), m.g(vp, c, wp));
    }
  }
}

TEST(GStep, ContractionBranchClampedWhenNotMonotone) {
  // alpha2 = 1.5 r makes r - alpha2(r) decreasing
  ErrorBoundModel::Parts p{ClassKFunction::linear(1.5), ClassKFunction::linear(1.0), ClassKFunction::linear(1.0),
                           ClassKFunction::linear(1.0), ClassKFunction::linear(1.0), ClassKFunction::linear(1.0),
                           1.0, 1.0, 0.0, 1.0};
  const ErrorBoundModel m(p, 2.0);
  EXPECT_TRUE(m.alpha2_clamped());
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = m.g(2.0 * i / 1000.0, 1, 0.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(PropagateBounds, ToyChain) {
  const auto b = propagate_bounds(toy_model(), 5.0, {1, 0});
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0], 5.0);
  EXPECT_NEAR(b[1], 3.1, 1e-12);
  EXPECT_NEAR(b[2], 3.82, 1e-12);
}

TEST(PropagateBounds, ZeroFixedPoint) {
  for (double v : propagate_bounds(toy_model(0.0), 0.0, {0, 0, 0, 0})) EXPECT_EQ(v, 0.0);
}

TEST(PropagateBounds, SingleStep) {
  const ErrorBoundModel m = toy_model();
  EXPECT_EQ(propagate_bounds(m, 2.5, {0})[1], g_step(m, 2.5, 0, m.w_max()));
}

TEST(Envelope, NormClfDistance) {
  const SystemModel sys = toy_system();
  ReferenceTrajectory ref;
  ref.states = {Eigen::Vector2d(-5, 0), Eigen::Vector2d(8, 0), Eigen::Vector2d(5, 0)};
  ref.controls = {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
  const SafetyEnvelope env = safety_envelope(toy_clf(sys), sys, ref);
  EXPECT_NEAR(env.v_max[0], 5.0, 1e-12);
  EXPECT_NEAR(env.v_max[1], 2.0, 1e-12);
  EXPECT_NEAR(env.v_init, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(env.v_final, 1.0, 1e-12);
}

TEST(Envelope, QuadraticClf) {
  const auto cfg = load_scenario("pendulum.json");
  const ReferenceTrajectory ref = plan_rrt(cfg.system, cfg.epsilon, cfg.rrt, cfg.rrt_seed);
  const SafetyEnvelope env = safety_envelope(cfg.clf, cfg.system, ref);
  const double lmin = cfg.clf.alpha_lower().eval(1.0);
  EXPECT_NEAR(lmin, 0.3165, 1e-4);
  for (int k = 0; k <= ref.horizon(); ++k) {
    const double d = signed_distance(cfg.system.free_space(), ref.states[k]);
    EXPECT_NEAR(env.v_max[k], lmin * d * d, 1e-15);
  }
}

TEST(Envelope, VehicleInitialBound) {
  const auto cfg = load_scenario("vehicle.json");
  const ReferenceTrajectory ref = plan_rrt(cfg.system, cfg.epsilon, cfg.rrt, cfg.rrt_seed);
  const SafetyEnvelope env = safety_envelope(cfg.clf, cfg.system, ref);
  // W only mixes position with velocity, which is zero on X_I
  EXPECT_NEAR(env.v_init, std::sqrt(2.0), 1e-9);
}

TEST(Envelope, ReferenceOutsideTargetThrows) {
  const SystemModel sys = toy_system();
  ReferenceTrajectory ref;
  ref.states = {Eigen::Vector2d(-5, 0), Eigen::Vector2d(0, 0)};
  ref.controls = {Eigen::Vector2d::Zero()};
  EXPECT_THROW(safety_envelope(toy_clf(sys), sys, ref), ContractViolation);
}

TEST(Envelope, Soundness) {
  // every state with V(x, x̂_k) <= v_max[k] lies in X
  for (const char* name : {"vehicle.json", "pendulum.json"}) {
    const auto cfg = load_scenario(name);
    const ReferenceTrajectory ref = plan_rrt(cfg.system, cfg.epsilon, cfg.rrt, cfg.rrt_seed);
    const SafetyEnvelope env = safety_envelope(cfg.clf, cfg.system, ref);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const int n = cfg.system.state_dim();
    int accepted = 0;
    for (int k = 0; k <= ref.horizon(); ++k) {
      const double r = cfg.clf.alpha_lower().invert(env.v_max[k]);
      for (int i = 0; i < 1000; ++i) {
        Vec dir(n);
        for (int j = 0; j < n; ++j) dir(j) = N(rng);
        const Vec x = ref.states[k] + dir.normalized() * r * 1.5 * U(rng);
        if (cfg.clf.value(x, ref.states[k]) > env.v_max[k]) continue;
        ++accepted;
        ASSERT_TRUE(cfg.system.free_space().contains(x)) << name << " k=" << k;
      }
    }
    EXPECT_GT(accepted, 0);
  }
}

TEST(Envelope, InitialBoundSound) {
  for (const char* name : {"vehicle.json", "pendulum.json"}) {
    const auto cfg = load_scenario(name);
    const ReferenceTrajectory ref = plan_rrt(cfg.system, cfg.epsilon, cfg.rrt, cfg.rrt_seed);
    const SafetyEnvelope env = safety_envelope(cfg.clf, cfg.system, ref);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
      const Vec x0 = sample_in_polytope(cfg.system.initial_set(), rng);
      ASSERT_LE(cfg.clf.value(x0, ref.states.front()), env.v_init + 1e-12);
    }
  }
}

TEST(CheckConditions, AllOnesInSafeCorridor) {
  const ErrorBoundModel m = toy_model();
  // fixed point of the contraction branch is 0.25
  const ConditionReport r = check_c1_c4(m, flat_envelope(6, 10.0, 2.0, 1.0), flat_reference(6), {1, 1, 1, 1, 1, 1});
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.bounds.front(), 2.0);
}

TEST(CheckConditions, AllZerosCrossesEnvelope) {
  const ErrorBoundModel m = toy_model(0.0);
  // v̄_k = 1.2^k, first k with 1.2^k > 1.7 is k = 3
  const ConditionReport r = check_c1_c4(m, flat_envelope(6, 1.7, 1.0, 5.0), flat_reference(6), {0, 0, 0, 0, 0, 0});
  EXPECT_FALSE(r.c2);
  ASSERT_TRUE(r.c2_first_failure.has_value());
  EXPECT_EQ(*r.c2_first_failure, 3);
}

TEST(CheckConditions, EmptyHorizon) {
  const ConditionReport r = check_c1_c4(toy_model(), flat_envelope(0, 1.0, 0.5, 0.7), flat_reference(0), {});
  EXPECT_TRUE(r.c2);
  EXPECT_TRUE(r.c3);
}

TEST(CheckConditions, InputBound) {
  const ErrorBoundModel m = toy_model(0.1, 2.0);
  // alpha_u(v) + |u| = 1.5 + 1 > 2 at k = 0
  const ConditionReport r = check_c1_c4(m, flat_envelope(2, 10.0, 1.5, 2.0), flat_reference(2, 1.0), {1, 1});
  EXPECT_FALSE(r.c4);
  ASSERT_TRUE(r.c4_first_failure.has_value());
  EXPECT_EQ(*r.c4_first_failure, 0);
}

TEST(CheckConditions, InitialWarning) {
  const ConditionReport r = check_c1_c4(toy_model(), flat_envelope(1, 1.0, 1.5, 2.0), flat_reference(1), {1});
  EXPECT_TRUE(r.k0_warning);
}
