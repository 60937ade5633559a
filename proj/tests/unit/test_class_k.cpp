#include <gtest/gtest.h>

#include <cmath>

#include "reachsched/class_k.hpp"
#include "reachsched/errors.hpp"

using namespace reachsched;

TEST(ClassK, LinearEval) { EXPECT_DOUBLE_EQ(ClassKFunction::linear(0.6).eval(5.0), 3.0); }

TEST(ClassK, ZeroAtZero) {
  const ClassKFunction fs[] = {ClassKFunction::linear(2.0), ClassKFunction::power(0.3, 2.0),
                               ClassKFunction::polynomial({{3.5, 1.0}, {0.16, 2.0}}),
                               ClassKFunction::compose(ClassKFunction::linear(2.0), ClassKFunction::power(1.0, 0.5)),
                               ClassKFunction::min_identity(ClassKFunction::linear(3.0), 1e-6)};
  for (const auto& f : fs) {
    EXPECT_EQ(f.eval(0.0), 0.0);
    EXPECT_EQ(f.invert(0.0), 0.0);
  }
}

TEST(ClassK, PolynomialEval) {
  EXPECT_NEAR(ClassKFunction::polynomial({{3.5, 1.0}, {0.16, 2.0}}).eval(0.02), 0.070064, 1e-15);
}

TEST(ClassK, NegativeArgumentThrows) {
  EXPECT_THROW(ClassKFunction::linear(1.0).eval(-1e-3), ContractViolation);
}

TEST(ClassK, LinearInverse) { EXPECT_DOUBLE_EQ(ClassKFunction::linear(2.0).invert(6.0), 3.0); }

TEST(ClassK, PowerInverse) {
  const double lmin = 0.5 * (2.53 - std::sqrt(1.67 * 1.67 + 4 * 0.45 * 0.45));
  EXPECT_NEAR(lmin, 0.3165, 1e-4);
  EXPECT_NEAR(ClassKFunction::power(lmin, 2.0).invert(lmin), 1.0, 1e-12);
}

TEST(ClassK, BisectionInverseTolerance) {
  const auto f = ClassKFunction::polynomial({{3.5, 1.0}, {0.16, 2.0}});
  for (double y : {1e-6, 0.07, 1.0, 25.0, 1e4}) {
    EXPECT_LE(std::abs(f.eval(f.invert(y)) - y), 1e-10 * std::max(1.0, y)) << y;
  }
}

TEST(ClassK, RoundTripOnGrid) {
  const ClassKFunction fs[] = {ClassKFunction::linear(0.7), ClassKFunction::power(2.2, 2.0),
                               ClassKFunction::polynomial({{1.0, 1.0}, {7.2, 2.0}}),
                               ClassKFunction::polynomial({{3.5, 1.0}, {0.16, 2.0}}),
                               ClassKFunction::compose(ClassKFunction::power(0.29, 2.0),
                                                       ClassKFunction::power(2.21, 2.0).inverse()),
                               ClassKFunction::min_identity(ClassKFunction::linear(2.0), 1e-6)};
  for (const auto& f : fs) {
    for (int i = 0; i <= 1000; ++i) {
      const double r = 4.0 * i / 1000.0;
      EXPECT_NEAR(f.invert(f.eval(r)), r, 1e-8) << f.describe() << " r=" << r;
    }
  }
}

TEST(ClassK, StrictlyIncreasing) {
  const auto f = ClassKFunction::compose(ClassKFunction::linear(1.3), ClassKFunction::power(0.5, 1.5));
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = f.eval(i * 0.01);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(ClassK, ComposePowers) {
  const auto f = ClassKFunction::compose(ClassKFunction::power(0.29, 2.0), ClassKFunction::power(2.21, 2.0).inverse());
  ASSERT_TRUE(f.linear_coefficient().has_value());
  EXPECT_NEAR(*f.linear_coefficient(), 0.29 / 2.21, 1e-12);
}

TEST(ClassK, MinIdentity) {
  const auto f = ClassKFunction::min_identity(ClassKFunction::linear(3.0), 1e-6);
  EXPECT_NEAR(f.eval(2.0), 2.0 * (1 - 1e-6), 1e-15);
  const auto g = ClassKFunction::min_identity(ClassKFunction::linear(0.5), 1e-6);
  EXPECT_DOUBLE_EQ(g.eval(2.0), 1.0);
}

TEST(ClassK, HorizonLimitsInverse) {
  const auto f = ClassKFunction::power(1.0, 3.0).with_horizon(2.0);
  EXPECT_NEAR(f.invert(8.0), 2.0, 1e-9);
  EXPECT_THROW(f.invert(8.5), OutOfRange);
}
