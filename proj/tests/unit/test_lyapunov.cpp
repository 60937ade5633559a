#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "reachsched/errors.hpp"
#include "reachsched/lyapunov.hpp"

using namespace reachsched;
using namespace reachsched::testing;

TEST(ClfValue, NormFamily) {
  const SystemModel sys = toy_system();
  const DeltaIssClf clf = toy_clf(sys);
  const Eigen::Vector2d y(1.0, -2.0);
  EXPECT_EQ(clf_value(clf, y, y), 0.0);
  EXPECT_DOUBLE_EQ(clf_value(clf, y + Eigen::Vector2d(3, 4), y), 5.0);
}

TEST(ClfValue, QuadraticFamily) {
  EXPECT_DOUBLE_EQ(clf_value(pendulum_clf(), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0)), 2.1);
}

TEST(ClfValue, SymmetricAndDefinite) {
  const SystemModel sys = toy_system();
  const DeltaIssClf clfs[] = {toy_clf(sys), pendulum_clf()};
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  for (const auto& clf : clfs) {
    for (int i = 0; i < 500; ++i) {
      const Eigen::Vector2d x(N(rng), N(rng));
      const Eigen::Vector2d y(N(rng), N(rng));
      EXPECT_NEAR(clf.value(x, y), clf.value(y, x), 1e-14);
      EXPECT_GT(clf.value(x, y), 0.0);
      EXPECT_EQ(clf.value(x, x), 0.0);
    }
  }
}

TEST(ClfFeedback, ZeroErrorGivesReference) {
  const SystemModel sys = toy_system();
  const Eigen::Vector2d x(0.4, 0.1);
  const Eigen::Vector2d u(1.0, -2.0);
  EXPECT_EQ((clf_feedback(toy_clf(sys), x, x, u) - u).norm(), 0.0);
  EXPECT_EQ(clf_feedback(pendulum_clf(), x, x, Vec::Constant(1, 0.3))(0), 0.3);
}

TEST(ClfFeedback, LinearFamily) {
  const SystemModel sys = toy_system();
  const Eigen::Vector2d e(0.5, -1.0);
  const Eigen::Vector2d u(1.0, 1.0);
  const Vec k = clf_feedback(toy_clf(sys), e, Eigen::Vector2d::Zero(), u);
  EXPECT_NEAR((k - (u - 0.6 * e)).norm(), 0.0, 1e-15);
}

TEST(ClfFeedback, PendulumFamily) {
  const Vec k = clf_feedback(pendulum_clf(), Eigen::Vector2d(0.1, -0.05), Eigen::Vector2d::Zero(), Vec::Zero(1));
  EXPECT_NEAR(k(0), -0.19, 1e-15);
}

TEST(ClfFamilies, QuadraticClassK) {
  const auto [lo, hi] = symmetric_eigenvalues_2x2((Mat(2, 2) << 2.1, 0.45, 0.45, 0.43).finished());
  const DeltaIssClf clf = pendulum_clf();
  EXPECT_NEAR(lo, 0.3165, 1e-4);
  EXPECT_NEAR(clf.alpha_lower().eval(0.2), lo * 0.04, 1e-15);
  EXPECT_NEAR(clf.alpha_upper().eval(0.2), hi * 0.04, 1e-15);
  EXPECT_NEAR(clf.alpha().eval(0.2), 0.29 * 0.04, 1e-15);
  EXPECT_NEAR(clf.rho().eval(0.02), 0.070064, 1e-15);
}

TEST(ClfFamilies, LinearContraction) {
  const SystemModel sys = toy_system();
  const DeltaIssClf clf = toy_clf(sys);
  const auto& fam = std::get<LinearGainFamily>(clf.family());
  EXPECT_NEAR(fam.contraction, 0.6, 1e-12);
  const Mat A = 1.2 * Mat::Identity(2, 2);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N(0.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector2d x(N(rng), N(rng));
    const Eigen::Vector2d y(N(rng), N(rng));
    const Eigen::Vector2d u(N(rng), N(rng));
    const Vec xp = A * x + clf.feedback(x, y, u);
    const Vec yp = A * y + u;
    EXPECT_LE(clf.value(xp, yp), fam.contraction * clf.value(x, y) + 1e-12);
  }
}

TEST(ClfFamilies, NonContractingGainRejected) {
  const SystemModel sys = toy_system();
  EXPECT_THROW(DeltaIssClf::linear_gain(sys, 0.1 * Mat::Identity(2, 2)), ContractViolation);
}

TEST(VerifyClf, LinearFamilyPasses) {
  const SystemModel sys = toy_system();
  const VerificationReport r = verify_clf_on_grid(toy_clf(sys), sys, 21);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.grid_points, 19u * 19u);  // boundary rows excluded
  EXPECT_GT(r.decrease.evaluated, 0u);
}

TEST(VerifyClf, BundledPendulumCertificatePasses) {
  const auto cfg = load_scenario("pendulum.json");
  const VerificationReport r = verify_clf_on_grid(cfg.clf, cfg.system, 21);
  EXPECT_EQ(r.sandwich.violations, 0u);
  EXPECT_EQ(r.decrease.violations, 0u);
  EXPECT_EQ(r.input.violations, 0u);
}

TEST(VerifyClf, SlightlySmallerQPassesWithLinearRho) {
  const auto cfg = load_scenario("pendulum.json");
  const VerificationReport r = verify_clf_on_grid(pendulum_clf(0.26), cfg.system.with_w_max(0.01), 21);
  EXPECT_TRUE(r.ok());
}

TEST(VerifyClf, BrokenFamilyIsFalsified) {
  const auto cfg = load_scenario("pendulum.json");
  const VerificationReport r = verify_clf_on_grid(pendulum_clf(2.9), cfg.system.with_w_max(0.01), 21);
  EXPECT_GT(r.decrease.violations, 0u);
  ASSERT_TRUE(r.decrease.first_violation.has_value());
  EXPECT_LT(r.decrease.first_violation->slack, 0.0);
}

TEST(VerifyClf, DensityPrecondition) {
  const SystemModel sys = toy_system();
  EXPECT_THROW(verify_clf_on_grid(toy_clf(sys), sys, 1), ContractViolation);
}
