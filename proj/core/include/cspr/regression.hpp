#pragma once

#include "cspr/linalg.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cspr {

/// Per-column z-scoring with training statistics. Constant columns keep
/// their mean but use std = 1 and are flagged.
struct Standardizer {
  Vector means;
  Vector stds;
  std::vector<bool> constant;

  Matrix transform(const Matrix& x) const;
  Matrix inverse(const Matrix& z) const;

  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& doc);
};

/// Column means and sample standard deviations (n - 1). Needs N >= 2.
Standardizer standardize_fit(const Matrix& features);

/// sign(z) max(|z| - gamma, 0)
double soft_threshold(double z, double gamma);

struct CoordinateDescentOptions {
  double tolerance = 1e-7;  ///< stop when the largest weight change in a sweep is below this
  std::size_t max_sweeps = 10000;
  bool record_objective = false;
};

struct CoordinateDescentResult {
  Vector weights;
  double intercept = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  std::vector<double> objective_history;  ///< objective after each sweep, if recorded
};

/// (1/2N) ||y - X w - b||^2 + lambda ||w||_1
double lasso_objective(const Matrix& x, const Vector& y, const Vector& w, double intercept, double lambda);

/// Smallest lambda for which every weight is zero: max_j |x_j^T (y - mean y)| / N.
double lasso_lambda_max(const Matrix& x, const Vector& y);

/// Cyclic coordinate descent on columns with zero mean (standardized
/// features). `warm_start`, when given, seeds the weights.
CoordinateDescentResult lasso_coordinate_descent(const Matrix& x, const Vector& y, double lambda,
                                                 const CoordinateDescentOptions& options = {},
                                                 const Vector* warm_start = nullptr);

struct LassoModel {
  Standardizer scaler;
  Vector weights;  ///< on standardized features
  double intercept = 0.0;
  double lambda = 0.0;

  Vector predict(const Matrix& features) const;

  nlohmann::json to_json() const;
  static LassoModel from_json(const nlohmann::json& doc);
};

/// Standardizes with the training statistics, then runs coordinate descent.
LassoModel lasso_fit(const Matrix& features, std::span<const double> targets, double lambda,
                     const CoordinateDescentOptions& options = {});

struct LassoCvOptions {
  std::size_t folds = 5;
  std::size_t grid_size = 50;
  double grid_ratio = 1e-4;  ///< smallest lambda / lambda_max
  std::uint64_t seed = 0;
  CoordinateDescentOptions descent;
};

struct LassoCvFit {
  LassoModel model;
  std::vector<double> grid;       ///< descending
  std::vector<double> mean_rmse;  ///< inner-CV RMSE per grid point
};

/// lambda chosen by inner k-fold CV over a log-spaced grid, then refit on
/// all of the training data. Ties go to the larger lambda.
LassoCvFit lasso_cv_fit(const Matrix& features, std::span<const double> targets, const LassoCvOptions& options = {});

/// Uniform-weight k-nearest-neighbour regression on standardized features.
struct KnnModel {
  Standardizer scaler;
  Matrix train;  ///< standardized training rows
  Vector targets;
  std::size_t k = 5;

  static KnnModel fit(const Matrix& features, std::span<const double> targets, std::size_t k = 5);

  /// Mean target of the k nearest training rows (Euclidean); distance ties
  /// go to the lower training index.
  Vector predict(const Matrix& queries) const;

  nlohmann::json to_json() const;
  static KnnModel from_json(const nlohmann::json& doc);
};

inline Vector knn_predict(const KnnModel& model, const Matrix& queries) { return model.predict(queries); }

}  // namespace cspr
