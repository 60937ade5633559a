#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <thread>

#include "fixtures.hpp"
#include "reachsched/errors.hpp"
#include "reachsched/simulator.hpp"

using namespace reachsched;
using namespace reachsched::testing;

TEST(Disturbance, KindNames) {
  for (auto k : {DisturbanceKind::kZero, DisturbanceKind::kWorstCase, DisturbanceKind::kUniformBall}) {
    EXPECT_EQ(parse_disturbance_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_disturbance_kind("gaussian"), ConfigError);
}

TEST(Disturbance, ZeroAndWorstCase) {
  std::mt19937_64 rng(1);
  const DisturbanceModel z(DisturbanceKind::kZero, 3, 0.5);
  const DisturbanceModel w(DisturbanceKind::kWorstCase, 3, 0.5);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(z.sample(rng).norm(), 0.0);
    EXPECT_NEAR(w.sample(rng).norm(), 0.5, 1e-12);
  }
  EXPECT_THROW(DisturbanceModel(DisturbanceKind::kZero, 0, 0.5), ContractViolation);
  EXPECT_THROW(DisturbanceModel(DisturbanceKind::kZero, 2, -1.0), ContractViolation);
}

TEST(Disturbance, UniformBallMeanNorm) {
  // |w| has density n r^(n-1) / w^n on [0, w]
  for (int n : {1, 2, 4}) {
    const double wmax = 0.3;
    const DisturbanceModel dm(DisturbanceKind::kUniformBall, n, wmax);
    std::mt19937_64 rng(17 + n);
    const int N = 100000;
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
      const double r = dm.sample(rng).norm();
      ASSERT_LE(r, wmax + 1e-12);
      sum += r;
    }
    const double mean = n / (n + 1.0) * wmax;
    const double var = (n / (n + 2.0) - std::pow(n / (n + 1.0), 2)) * wmax * wmax;
    EXPECT_NEAR(sum / N, mean, 3.0 * std::sqrt(var / N)) << "n=" << n;
  }
}

TEST(Sampling, PolytopeAndSeeds) {
  std::mt19937_64 rng(3);
  const HPolytope box = HPolytope::box(Eigen::Vector2d(-1, 2), Eigen::Vector2d(0, 3));
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(box.contains(sample_in_polytope(box, rng), 0.0));
  EXPECT_NE(run_seed(1, 0), run_seed(1, 1));
  EXPECT_NE(run_seed(1, 0), run_seed(2, 0));
  EXPECT_EQ(run_seed(5, 9), run_seed(5, 9));
}

TEST(Realize, IdenticalAcrossCalls) {
  const Pipeline& p = vehicle_pipeline();
  const DisturbanceModel dm(DisturbanceKind::kUniformBall, 4, p.cfg.system.w_max());
  const RunRealization a = realize(p.cfg.system, dm, 42, 30);
  const RunRealization b = realize(p.cfg.system, dm, 42, 30);
  EXPECT_EQ(a.x0, b.x0);
  ASSERT_EQ(a.disturbances.size(), 30u);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(a.disturbances[i], b.disturbances[i]);
  EXPECT_TRUE(p.cfg.system.initial_set().contains(a.x0, 0.0));
}

TEST(Validity, DetectsEachViolation) {
  const Pipeline& p = vehicle_pipeline();
  const SystemModel& sys = p.cfg.system;
  const int L = p.ref.horizon();
  const std::vector<Vec> w(static_cast<std::size_t>(L), Vec::Zero(4));
  const ExecutionTrace good = run_offline(sys, p.cfg.clf, p.ref, p.schedule.schedule, p.ref.states.front(), w);
  const ValidityReport ok = check_validity(sys, good);
  EXPECT_TRUE(ok.valid());
  EXPECT_EQ(ok.comm_count, p.schedule.cost);
  EXPECT_GT(ok.min_slack, 0.0);

  ExecutionTrace bad = good;
  bad.states[L] = Eigen::Vector4d(0, 0, 0, 0);
  const ValidityReport r1 = check_validity(sys, bad);
  EXPECT_FALSE(r1.reachability_ok);
  EXPECT_FALSE(r1.dynamics_ok);

  bad = good;
  bad.states[5](0) += 0.5;
  const ValidityReport r2 = check_validity(sys, bad);
  EXPECT_FALSE(r2.dynamics_ok);
  ASSERT_TRUE(r2.first_dynamics_violation.has_value());
  EXPECT_EQ(*r2.first_dynamics_violation, 4);

  // step inside the first obstacle box [-6, -3] x [-2, 1], dynamics ignored
  bad = good;
  bad.states[3] = Eigen::Vector4d(-4.5, -0.5, 0, 0);
  const ValidityReport r3 = check_validity(sys, bad);
  EXPECT_FALSE(r3.safety_ok);
  EXPECT_EQ(r3.first_unsafe.value_or(-1), 3);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
  const Pipeline& p = vehicle_pipeline();
  const Scenario sc = p.scenario();
  setenv("REACHSCHED_THREADS", "1", 1);
  const CampaignStats a = monte_carlo(sc, RuntimeMode::kOnline, 12, DisturbanceKind::kUniformBall, 7);
  setenv("REACHSCHED_THREADS", "3", 1);
  const CampaignStats b = monte_carlo(sc, RuntimeMode::kOnline, 12, DisturbanceKind::kUniformBall, 7);
  unsetenv("REACHSCHED_THREADS");
  ASSERT_EQ(a.runs.size(), 12u);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].index, static_cast<int>(i));
    EXPECT_EQ(a.runs[i].comm_count, b.runs[i].comm_count);
    EXPECT_EQ(a.runs[i].valid, b.runs[i].valid);
    EXPECT_EQ(a.runs[i].min_slack, b.runs[i].min_slack);
  }
  EXPECT_EQ(a.comm_mean, b.comm_mean);
}

TEST(MonteCarlo, ThreadEnvironment) {
  const int hw = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  setenv("REACHSCHED_THREADS", "2", 1);
  EXPECT_EQ(worker_threads(), std::min(hw, 2));
  unsetenv("REACHSCHED_THREADS");
  EXPECT_GE(worker_threads(), 1);
}

TEST(MonteCarlo, OfflineCampaignStats) {
  const Pipeline& p = vehicle_pipeline();
  const CampaignStats s = monte_carlo(p.scenario(), RuntimeMode::kOffline, 30, DisturbanceKind::kWorstCase, 2);
  EXPECT_EQ(s.valid_runs, 30);
  EXPECT_DOUBLE_EQ(s.validity_rate, 1.0);
  EXPECT_EQ(s.comm_min, p.schedule.cost);
  EXPECT_EQ(s.comm_max, p.schedule.cost);
  EXPECT_THROW(monte_carlo(p.scenario(), RuntimeMode::kOffline, 0, DisturbanceKind::kZero, 1), ContractViolation);
  Scenario no_sched = p.scenario();
  no_sched.schedule = nullptr;
  EXPECT_THROW(monte_carlo(no_sched, RuntimeMode::kOffline, 2, DisturbanceKind::kZero, 1), ContractViolation);
}

TEST(MonteCarlo, OnlineReplansAlwaysFeasible) {
  const Pipeline& p = vehicle_pipeline();
  const CampaignStats s = monte_carlo(p.scenario(), RuntimeMode::kOnline, 1000, DisturbanceKind::kUniformBall, 11);
  int replans_ok = 0;
  for (const RunSummary& r : s.runs) {
    replans_ok += r.replans_ok ? 1 : 0;
    EXPECT_TRUE(r.error.empty()) << r.error;
  }
  EXPECT_EQ(replans_ok, 1000);
  EXPECT_EQ(s.valid_runs, 1000);
}
