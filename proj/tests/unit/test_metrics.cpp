#include <cspr/metrics.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"

namespace {

using cspr::ErrorKind;

TEST(Metrics, PerfectPrediction) {
  const std::vector<double> t{1.0, 2.5, -3.0, 4.0};
  EXPECT_DOUBLE_EQ(cspr::rmse(t, t), 0.0);
  EXPECT_NEAR(cspr::cc(t, t), 1.0, 1e-15);
}

TEST(Metrics, HandExample) {
  const std::vector<double> pred{1.0, 2.0};
  const std::vector<double> truth{1.0, 4.0};
  EXPECT_NEAR(cspr::rmse(pred, truth), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(cspr::cc(pred, truth), 1.0, 1e-15);
}

TEST(Metrics, NegatedPredictionHasCorrelationMinusOne) {
  const std::vector<double> t{0.3, -1.0, 2.0, 7.0, 1.5};
  std::vector<double> neg(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) neg[i] = -t[i];
  EXPECT_NEAR(cspr::cc(neg, t), -1.0, 1e-15);
}

TEST(Metrics, CorrelationMatchesTwoPassFormula) {
  const std::vector<double> a{1, 5, 2, 8, 3, 3, 9};
  const std::vector<double> b{2, 4, 4, 9, 1, 2, 7};
  EXPECT_NEAR(cspr::cc(a, b), cspr::test::pearson(a, b), 1e-14);
}

TEST(Metrics, ConstantInputIsDegenerate) {
  const std::vector<double> c{2.0, 2.0, 2.0};
  const std::vector<double> t{1.0, 2.0, 3.0};
  EXPECT_CSPR_ERROR(cspr::cc(c, t), ErrorKind::Degenerate);
  EXPECT_CSPR_ERROR(cspr::cc(t, c), ErrorKind::Degenerate);
  EXPECT_NEAR(cspr::rmse(c, t), std::sqrt(2.0 / 3.0), 1e-15);
}

TEST(Metrics, LengthMismatchThrows) {
  const std::vector<double> a{1.0, 2.0};
  const std::vector<double> b{1.0, 2.0, 3.0};
  EXPECT_CSPR_ERROR(cspr::rmse(a, b), ErrorKind::Dimension);
  EXPECT_CSPR_ERROR(cspr::cc(a, b), ErrorKind::Dimension);
  EXPECT_CSPR_ERROR(cspr::rmse(std::vector<double>{}, std::vector<double>{}), ErrorKind::Dimension);
}

}  // namespace
