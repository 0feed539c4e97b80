#include <cspr/regression.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "test_support.hpp"

namespace {

using cspr::ErrorKind;
using cspr::Matrix;
using cspr::Vector;
using cspr::test::random_matrix;

Matrix centered(Matrix x) {
  x.rowwise() -= x.colwise().mean();
  return x;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

TEST(Standardizer, ZeroMeanUnitVariance) {
  Matrix x = random_matrix(30, 4, 1);
  x.col(1) = 5.0 * x.col(1).array() + 3.0;
  const auto s = cspr::standardize_fit(x);
  const Matrix z = s.transform(x);
  for (Eigen::Index j = 0; j < 4; ++j) {
    EXPECT_NEAR(z.col(j).mean(), 0.0, 1e-13);
    EXPECT_NEAR((z.col(j).array() - z.col(j).mean()).square().sum() / 29.0, 1.0, 1e-12);
  }
  EXPECT_TRUE(s.inverse(z).isApprox(x, 1e-13));
}

TEST(Standardizer, ConstantColumnIsFlagged) {
  Matrix x = random_matrix(10, 3, 2);
  x.col(2).setConstant(4.0);
  const auto s = cspr::standardize_fit(x);
  EXPECT_TRUE(s.constant[2]);
  EXPECT_FALSE(s.constant[0]);
  EXPECT_EQ(s.stds(2), 1.0);
  EXPECT_TRUE(s.transform(x).col(2).isZero(0.0));
  EXPECT_CSPR_ERROR(cspr::standardize_fit(Matrix::Ones(1, 3)), ErrorKind::Degenerate);
  EXPECT_CSPR_ERROR(s.transform(Matrix::Ones(2, 2)), ErrorKind::Dimension);
}

TEST(SoftThreshold, Examples) {
  EXPECT_EQ(cspr::soft_threshold(3.0, 1.0), 2.0);
  EXPECT_EQ(cspr::soft_threshold(-0.5, 1.0), 0.0);
  EXPECT_EQ(cspr::soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(cspr::soft_threshold(1.0, 1.0), 0.0);
}

TEST(LassoObjective, HandValue) {
  Matrix x(2, 1);
  x << 1, -1;
  Vector y(2);
  y << 2, 0;
  Vector w(1);
  w << 1;
  // residuals (2 - 1 - 0.5, 0 + 1 - 0.5) = (0.5, 0.5)
  EXPECT_NEAR(cspr::lasso_objective(x, y, w, 0.5, 0.3), 0.25 / 2.0 + 0.3, 1e-15);
}

TEST(LassoCoordinateDescent, ZeroPenaltyMatchesNormalEquations) {
  cspr::CoordinateDescentOptions opt;
  opt.tolerance = 1e-13;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = centered(random_matrix(20, 8, 100 + seed));
    const Vector y = random_matrix(20, 1, 200 + seed).col(0);
    const Vector ols = (x.transpose() * x).ldlt().solve(x.transpose() * (y.array() - y.mean()).matrix());
    const auto r = cspr::lasso_coordinate_descent(x, y, 0.0, opt);
    EXPECT_TRUE(r.converged);
    EXPECT_LE((r.weights - ols).cwiseAbs().maxCoeff(), 1e-6) << "seed " << seed;
    EXPECT_NEAR(r.intercept, y.mean(), 1e-9);
  }
}

TEST(LassoCoordinateDescent, LambdaMaxGivesExactZeros) {
  const Matrix x = centered(random_matrix(40, 6, 3));
  const Vector y = x * Vector::LinSpaced(6, 1.0, 2.0) + random_matrix(40, 1, 4).col(0);
  const double lmax = cspr::lasso_lambda_max(x, y);
  for (double scale : {1.0, 1.5, 10.0}) {
    const auto r = cspr::lasso_coordinate_descent(x, y, scale * lmax);
    for (Eigen::Index j = 0; j < 6; ++j) EXPECT_EQ(r.weights(j), 0.0);
  }
  const auto below = cspr::lasso_coordinate_descent(x, y, 0.9 * lmax);
  EXPECT_GT(below.weights.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LassoCoordinateDescent, ObjectiveNeverIncreasesAcrossSweeps) {
  cspr::CoordinateDescentOptions opt;
  opt.record_objective = true;
  opt.tolerance = 1e-12;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Matrix x = random_matrix(50, 12, 300 + seed);
    x.col(1) = x.col(0) + 0.05 * x.col(1);  // correlated pair slows convergence
    x = centered(x);
    const Vector y = x.col(0) - 2.0 * x.col(3) + random_matrix(50, 1, 400 + seed).col(0);
    const double lmax = cspr::lasso_lambda_max(x, y);
    for (double frac : {0.01, 0.1, 0.5}) {
      const auto r = cspr::lasso_coordinate_descent(x, y, frac * lmax, opt);
      ASSERT_GE(r.objective_history.size(), 2u);
      for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
        EXPECT_LE(r.objective_history[i], r.objective_history[i - 1] * (1.0 + 1e-14));
      }
      EXPECT_NEAR(r.objective_history.back(), cspr::lasso_objective(x, y, r.weights, r.intercept, frac * lmax), 1e-12);
    }
  }
}

TEST(LassoCoordinateDescent, L1NormShrinksAlongThePath) {
  const Matrix x = centered(random_matrix(60, 10, 5));
  const Vector y = x * Vector::LinSpaced(10, -1.0, 1.0) + 0.5 * random_matrix(60, 1, 6).col(0);
  const double lmax = cspr::lasso_lambda_max(x, y);
  cspr::CoordinateDescentOptions opt;
  opt.tolerance = 1e-12;
  double prev = -1.0;
  for (int i = 0; i <= 20; ++i) {
    const double lambda = lmax * std::pow(1e-3, 1.0 - i / 20.0);  // ascending
    const double l1 = cspr::lasso_coordinate_descent(x, y, lambda, opt).weights.lpNorm<1>();
    if (prev >= 0.0) {
      EXPECT_LE(l1, prev + 1e-9);
    }
    prev = l1;
  }
  EXPECT_EQ(prev, 0.0);
}

TEST(LassoCoordinateDescent, InvalidInputs) {
  const Matrix x = random_matrix(5, 2, 7);
  const Vector y = Vector::Ones(5);
  EXPECT_CSPR_ERROR(cspr::lasso_coordinate_descent(x, y, -1.0), ErrorKind::InvalidArgument);
  EXPECT_CSPR_ERROR(cspr::lasso_coordinate_descent(x, Vector::Ones(4), 0.1), ErrorKind::Dimension);
  Matrix bad = x;
  bad(0, 0) = std::nan("");
  EXPECT_CSPR_ERROR(cspr::lasso_coordinate_descent(bad, y, 0.1), ErrorKind::InvalidArgument);
}

TEST(LassoCv, RecoversExactLinearTarget) {
  const Matrix x = random_matrix(80, 6, 8);
  Vector w(6);
  w << 1.5, 0, -2, 0, 0.5, 0;
  const Vector y = x * w;
  cspr::LassoCvOptions opt;
  const auto fit = cspr::lasso_cv_fit(x, to_std(y), opt);
  EXPECT_EQ(fit.grid.size(), 50u);
  for (std::size_t i = 1; i < fit.grid.size(); ++i) EXPECT_LT(fit.grid[i], fit.grid[i - 1]);
  const Matrix xt = random_matrix(40, 6, 9);
  const Vector pred = fit.model.predict(xt);
  const Vector truth = xt * w;
  EXPECT_LE(std::sqrt((pred - truth).squaredNorm() / 40.0), 0.01 * std::sqrt(truth.squaredNorm() / 40.0));
}

TEST(LassoCv, PureNoiseTargetShrinksWeights) {
  int shrunk = 0;
  for (std::uint64_t s = 0; s < 12; ++s) {
    const Matrix x = random_matrix(100, 10, 10 + 2 * s);
    const Vector y = random_matrix(100, 1, 11 + 2 * s).col(0);
    const auto fit = cspr::lasso_cv_fit(x, to_std(y));
    const auto dense = cspr::lasso_fit(x, to_std(y), 0.0);
    if (fit.model.weights.norm() < 0.5 * dense.weights.norm()) ++shrunk;
  }
  EXPECT_GE(shrunk, 9);
}

TEST(LassoCv, DeterministicAndValidated) {
  const Matrix x = random_matrix(30, 4, 12);
  const Vector y = x.col(0) + 0.3 * random_matrix(30, 1, 13).col(0);
  cspr::LassoCvOptions opt;
  opt.seed = 5;
  const auto a = cspr::lasso_cv_fit(x, to_std(y), opt);
  const auto b = cspr::lasso_cv_fit(x, to_std(y), opt);
  EXPECT_EQ(a.model.weights, b.model.weights);
  EXPECT_EQ(a.mean_rmse, b.mean_rmse);
  opt.folds = 31;
  EXPECT_CSPR_ERROR(cspr::lasso_cv_fit(x, to_std(y), opt), ErrorKind::InvalidArgument);
}

TEST(LassoModel, JsonRoundTrip) {
  const Matrix x = random_matrix(30, 3, 14);
  const Vector y = x.col(2);
  const auto m = cspr::lasso_fit(x, to_std(y), 0.01);
  const auto back = cspr::LassoModel::from_json(m.to_json());
  EXPECT_EQ(back.predict(x), m.predict(x));
}

TEST(Knn, SingleNeighbourReturnsTrainingTarget) {
  const Matrix x = random_matrix(25, 3, 15);
  std::vector<double> y(25);
  std::iota(y.begin(), y.end(), 0.0);
  const auto m = cspr::KnnModel::fit(x, y, 1);
  const Vector pred = m.predict(x);
  for (Eigen::Index i = 0; i < 25; ++i) EXPECT_EQ(pred(i), y[static_cast<std::size_t>(i)]);
}

TEST(Knn, AllNeighboursGiveGlobalMean) {
  const Matrix x = random_matrix(12, 2, 16);
  std::vector<double> y(12);
  for (std::size_t i = 0; i < 12; ++i) y[i] = std::sin(static_cast<double>(i));
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 12.0;
  const auto m = cspr::KnnModel::fit(x, y, 12);
  const Vector pred = m.predict(random_matrix(5, 2, 17));
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(pred(i), mean, 1e-14);
}

TEST(Knn, PlantedNeighbours) {
  // Two tight clusters; a query near one must average that cluster only.
  Matrix x(10, 2);
  std::vector<double> y(10);
  for (int i = 0; i < 5; ++i) {
    x.row(i) << 0.01 * i, 0.0;
    x.row(i + 5) << 10.0 + 0.01 * i, 10.0;
    y[static_cast<std::size_t>(i)] = 1.0 + i;
    y[static_cast<std::size_t>(i + 5)] = 100.0;
  }
  const auto m = cspr::KnnModel::fit(x, y, 5);
  Matrix q(2, 2);
  q << 0.0, 0.0, 10.0, 10.0;
  const Vector pred = m.predict(q);
  EXPECT_NEAR(pred(0), 3.0, 1e-14);
  EXPECT_NEAR(pred(1), 100.0, 1e-14);
}

TEST(Knn, DistanceTiesGoToLowerIndex) {
  Matrix x(4, 1);
  x << -1, 1, -1, 1;
  const std::vector<double> y{10, 20, 30, 40};
  auto m = cspr::KnnModel::fit(x, y, 1);
  Matrix q(1, 1);
  q << 0.0;
  EXPECT_EQ(m.predict(q)(0), 10.0);
  m = cspr::KnnModel::fit(x, y, 2);
  EXPECT_EQ(m.predict(q)(0), 15.0);
  m = cspr::KnnModel::fit(x, y, 3);
  EXPECT_EQ(m.predict(q)(0), 20.0);
}

TEST(Knn, UsesStandardizedDistance) {
  // Column 1 has a huge scale; without standardization it would dominate.
  Matrix x(4, 2);
  x << 0, 0,
       1, 1000,
       0, 3000,
       3, 0;
  const std::vector<double> y{1, 2, 3, 4};
  const auto m = cspr::KnnModel::fit(x, y, 1);
  const auto s = cspr::standardize_fit(x);
  Matrix q(1, 2);
  q << 2.9, 2900;
  // Nearest in standardized units, computed independently.
  const Matrix zq = s.transform(q);
  const Matrix zx = s.transform(x);
  Eigen::Index best = 0;
  (zx.rowwise() - zq.row(0)).rowwise().squaredNorm().minCoeff(&best);
  EXPECT_EQ(m.predict(q)(0), y[static_cast<std::size_t>(best)]);
}

TEST(Knn, InvalidInputs) {
  const Matrix x = random_matrix(4, 2, 18);
  const std::vector<double> y{1, 2, 3, 4};
  EXPECT_CSPR_ERROR(cspr::KnnModel::fit(x, y, 5), ErrorKind::InvalidArgument);
  EXPECT_CSPR_ERROR(cspr::KnnModel::fit(x, y, 0), ErrorKind::InvalidArgument);
  const auto m = cspr::KnnModel::fit(x, y, 2);
  EXPECT_CSPR_ERROR(m.predict(random_matrix(1, 3, 19)), ErrorKind::Dimension);
  const auto back = cspr::KnnModel::from_json(m.to_json());
  EXPECT_EQ(back.predict(x), m.predict(x));
}

}  // namespace
