#include <cspr/fuzzy.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "test_support.hpp"

namespace {

using cspr::ErrorKind;
using cspr::FuzzyPartition;
using cspr::MembershipShape;

std::vector<double> one_to_nine() {
  std::vector<double> v(9);
  std::iota(v.begin(), v.end(), 1.0);
  return v;
}

std::vector<double> random_targets(std::size_t n, std::uint64_t seed) {
  auto rng = cspr::make_rng(seed, {1});
  std::lognormal_distribution<double> dist(0.0, 0.6);
  std::vector<double> y(n);
  for (auto& v : y) v = dist(rng);
  return y;
}

TEST(PercentilePoints, EvenlySpacedLevels) {
  EXPECT_EQ(cspr::percentile_points(3), (std::vector<double>{25.0, 50.0, 75.0}));
  const auto p2 = cspr::percentile_points(2);
  ASSERT_EQ(p2.size(), 2u);
  EXPECT_NEAR(p2[0], 100.0 / 3.0, 1e-12);
  EXPECT_NEAR(p2[1], 200.0 / 3.0, 1e-12);
  EXPECT_EQ(cspr::percentile_points(7).size(), 7u);
  EXPECT_DOUBLE_EQ(cspr::percentile_points(7)[3], 50.0);
  EXPECT_CSPR_ERROR(cspr::percentile_points(1), ErrorKind::InvalidArgument);
}

TEST(EmpiricalPercentile, LinearInterpolation) {
  const std::vector<double> v{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(cspr::empirical_percentile(v, 50.0), 2.5);
  EXPECT_DOUBLE_EQ(cspr::empirical_percentile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(cspr::empirical_percentile(v, 100.0), 4.0);
  EXPECT_DOUBLE_EQ(cspr::empirical_percentile(one_to_nine(), 25.0), 3.0);
  EXPECT_CSPR_ERROR(cspr::empirical_percentile(std::vector<double>{}, 50.0), ErrorKind::Degenerate);
  EXPECT_CSPR_ERROR(cspr::empirical_percentile(v, 101.0), ErrorKind::InvalidArgument);
}

TEST(FuzzyPartition, TriangularHandExample) {
  const auto y = one_to_nine();
  const auto p = FuzzyPartition::build(y, 3, MembershipShape::Triangular);
  EXPECT_EQ(p.peaks(), (std::vector<double>{3.0, 5.0, 7.0}));

  auto expect_mu = [&](double t, std::vector<double> want) {
    const auto got = p.memberships(t);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < want.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-15) << "y=" << t;
  };
  expect_mu(4.0, {0.5, 0.5, 0.0});
  expect_mu(5.0, {0.0, 1.0, 0.0});
  expect_mu(6.0, {0.0, 0.5, 0.5});
  expect_mu(0.0, {1.0, 0.0, 0.0});
  expect_mu(100.0, {0.0, 0.0, 1.0});
}

TEST(FuzzyPartition, PeaksHaveFullMembership) {
  for (auto shape : {MembershipShape::Triangular, MembershipShape::Gaussian}) {
    const auto p = FuzzyPartition::build(random_targets(300, 3), 5, shape);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(p.membership(k, p.peaks()[k]), 1.0);
  }
}

TEST(FuzzyPartition, TriangularMembershipsSumToOne) {
  const auto p = FuzzyPartition::build(random_targets(200, 4), 4, MembershipShape::Triangular);
  const double lo = p.peaks().front() - 1.0;
  const double hi = p.peaks().back() + 1.0;
  for (int i = 0; i <= 2000; ++i) {
    const double y = lo + (hi - lo) * i / 2000.0;
    const auto mu = p.memberships(y);
    EXPECT_NEAR(std::accumulate(mu.begin(), mu.end(), 0.0), 1.0, 1e-12) << "y=" << y;
    for (double m : mu) {
      EXPECT_GE(m, 0.0);
      EXPECT_LE(m, 1.0);
    }
  }
}

TEST(FuzzyPartition, GaussianNeighboursCrossAtHalfMidway) {
  const auto p = FuzzyPartition::build(random_targets(500, 5), 4, MembershipShape::Gaussian);
  const auto& peaks = p.peaks();
  const double factor = 2.0 * std::sqrt(2.0 * std::log(2.0));
  for (std::size_t k = 0; k + 1 < peaks.size(); ++k) {
    const double mid = 0.5 * (peaks[k] + peaks[k + 1]);
    EXPECT_NEAR(p.membership(k, mid), 0.5, 1e-12);
    EXPECT_NEAR(p.membership(k + 1, mid), 0.5, 1e-12);
    const double gap = peaks[k + 1] - peaks[k];
    EXPECT_NEAR(p.right_spreads()[k], gap / factor, 1e-12);
    EXPECT_NEAR(p.left_spreads()[k + 1], gap / factor, 1e-12);
  }
}

TEST(FuzzyPartition, GaussianOuterFlanksAreShoulders) {
  const auto p = FuzzyPartition::build(random_targets(200, 6), 3, MembershipShape::Gaussian);
  EXPECT_DOUBLE_EQ(p.membership(0, p.peaks().front() - 50.0), 1.0);
  EXPECT_DOUBLE_EQ(p.membership(2, p.peaks().back() + 50.0), 1.0);
  EXPECT_LT(p.membership(0, p.peaks().front() + 1e-3), 1.0);
}

TEST(FuzzyPartition, ArgmaxIsMonotoneInTarget) {
  for (auto shape : {MembershipShape::Triangular, MembershipShape::Gaussian}) {
    const auto p = FuzzyPartition::build(random_targets(300, 7), 5, shape);
    std::size_t prev = 0;
    for (int i = 0; i <= 3000; ++i) {
      const double y = p.peaks().front() - 0.5 + (p.peaks().back() - p.peaks().front() + 1.0) * i / 3000.0;
      const auto mu = p.memberships(y);
      const auto arg = static_cast<std::size_t>(std::max_element(mu.begin(), mu.end()) - mu.begin());
      EXPECT_GE(arg, prev) << "y=" << y;
      prev = arg;
    }
  }
}

TEST(FuzzyPartition, AffineTargetTransformPreservesMemberships) {
  const auto y = random_targets(250, 8);
  for (auto shape : {MembershipShape::Triangular, MembershipShape::Gaussian}) {
    const auto p = FuzzyPartition::build(y, 3, shape);
    for (auto [a, b] : {std::pair{3.7, -12.25}, std::pair{0.01, 400.0}}) {
      std::vector<double> z(y.size());
      std::transform(y.begin(), y.end(), z.begin(), [&](double v) { return a * v + b; });
      const auto q = FuzzyPartition::build(z, 3, shape);
      for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
          EXPECT_NEAR(q.membership(k, z[i]), p.membership(k, y[i]), 1e-9);
        }
      }
    }
  }
}

TEST(FuzzyPartition, DyadicScalingIsExact) {
  const auto y = one_to_nine();
  std::vector<double> z(y.size());
  std::transform(y.begin(), y.end(), z.begin(), [](double v) { return 4.0 * v + 8.0; });
  const auto p = FuzzyPartition::build(y, 3, MembershipShape::Triangular);
  const auto q = FuzzyPartition::build(z, 3, MembershipShape::Triangular);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(q.memberships(z[i]), p.memberships(y[i]));
}

TEST(FuzzyPartition, CoincidentPeaksAreDegenerate) {
  std::vector<double> y(20, 1.0);
  y.push_back(5.0);
  EXPECT_CSPR_ERROR(FuzzyPartition::build(y, 3, MembershipShape::Triangular), ErrorKind::Degenerate);
  EXPECT_CSPR_ERROR(FuzzyPartition::build(std::vector<double>{1.0, 2.0}, 3, MembershipShape::Gaussian),
                    ErrorKind::Degenerate);
}

TEST(FuzzyPartition, ClassIndexOutOfRangeThrows) {
  const auto p = FuzzyPartition::build(one_to_nine(), 3, MembershipShape::Triangular);
  EXPECT_CSPR_ERROR(p.membership(3, 1.0), ErrorKind::InvalidArgument);
}

TEST(FuzzyPartition, JsonRoundTrip) {
  for (auto shape : {MembershipShape::Triangular, MembershipShape::Gaussian}) {
    const auto p = FuzzyPartition::build(random_targets(100, 9), 4, shape);
    const auto q = FuzzyPartition::from_json(p.to_json());
    EXPECT_EQ(q.shape(), p.shape());
    EXPECT_EQ(q.peaks(), p.peaks());
    EXPECT_EQ(q.left_spreads(), p.left_spreads());
    EXPECT_EQ(q.right_spreads(), p.right_spreads());
  }
  EXPECT_CSPR_ERROR(FuzzyPartition::from_json(nlohmann::json{{"shape", "boxcar"}}), ErrorKind::Format);
}

TEST(MembershipShape, NamesRoundTrip) {
  EXPECT_EQ(cspr::parse_membership_shape("triangular"), MembershipShape::Triangular);
  EXPECT_EQ(cspr::parse_membership_shape(cspr::to_string(MembershipShape::Gaussian)),
            MembershipShape::Gaussian);
  EXPECT_CSPR_ERROR(cspr::parse_membership_shape("box"), ErrorKind::InvalidArgument);
}

}  // namespace
