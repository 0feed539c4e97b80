#include "cspr/regression.hpp"

#include "cspr/error.hpp"
#include "cspr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

namespace cspr {

namespace {

Vector to_vector(std::span<const double> v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_xy(const Matrix& x, std::span<const double> y, const char* who) {
  require(x.rows() == static_cast<Eigen::Index>(y.size()), ErrorKind::Dimension,
          std::string(who) + ": feature rows and target count differ");
  require(x.rows() >= 1 && x.cols() >= 1, ErrorKind::Degenerate, std::string(who) + ": empty feature matrix");
  require(x.allFinite(), ErrorKind::InvalidArgument, std::string(who) + ": non-finite features");
  for (double v : y) require(std::isfinite(v), ErrorKind::InvalidArgument, std::string(who) + ": non-finite target");
}

std::vector<double> json_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector vec_json(const nlohmann::json& j) {
  auto v = j.get<std::vector<double>>();
  return to_vector(v);
}

}  // namespace

Standardizer standardize_fit(const Matrix& features) {
  require(features.rows() >= 2, ErrorKind::Degenerate, "standardize_fit: need at least 2 rows");
  const auto n = static_cast<double>(features.rows());
  Standardizer s;
  s.means = features.colwise().mean().transpose();
  s.stds.resize(features.cols());
  s.constant.assign(static_cast<std::size_t>(features.cols()), false);
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double ss = (features.col(j).array() - s.means(j)).square().sum();
    const double sd = std::sqrt(ss / (n - 1.0));
    // Treat columns whose spread is at rounding level as constant.
    if (!(sd > 1e-12 * std::max(1.0, std::abs(s.means(j))))) {
      s.stds(j) = 1.0;
      s.constant[static_cast<std::size_t>(j)] = true;
    } else {
      s.stds(j) = sd;
    }
  }
  return s;
}

Matrix Standardizer::transform(const Matrix& x) const {
  require(x.cols() == means.size(), ErrorKind::Dimension, "standardize: column count differs from the fit");
  Matrix z = x.rowwise() - means.transpose();
  return z.array().rowwise() / stds.transpose().array();
}

Matrix Standardizer::inverse(const Matrix& z) const {
  require(z.cols() == means.size(), ErrorKind::Dimension, "standardize: column count differs from the fit");
  Matrix x = z.array().rowwise() * stds.transpose().array();
  return x.rowwise() + means.transpose();
}

nlohmann::json Standardizer::to_json() const {
  return {{"means", json_vec(means)}, {"stds", json_vec(stds)}, {"constant", constant}};
}

Standardizer Standardizer::from_json(const nlohmann::json& doc) {
  Standardizer s;
  s.means = vec_json(doc.at("means"));
  s.stds = vec_json(doc.at("stds"));
  s.constant = doc.at("constant").get<std::vector<bool>>();
  return s;
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double lasso_objective(const Matrix& x, const Vector& y, const Vector& w, double intercept, double lambda) {
  const Vector r = (y - x * w).array() - intercept;
  return 0.5 * r.squaredNorm() / static_cast<double>(x.rows()) + lambda * w.lpNorm<1>();
}

double lasso_lambda_max(const Matrix& x, const Vector& y) {
  // Same arithmetic as the first coordinate update from zero weights, so
  // lambda >= lambda_max zeroes every weight exactly.
  const Vector centered = y.array() - y.mean();
  const auto n = static_cast<double>(x.rows());
  double best = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) best = std::max(best, std::abs(x.col(j).dot(centered) / n));
  return best;
}

CoordinateDescentResult lasso_coordinate_descent(const Matrix& x, const Vector& y, double lambda,
                                                 const CoordinateDescentOptions& options, const Vector* warm_start) {
  require(lambda >= 0.0 && std::isfinite(lambda), ErrorKind::InvalidArgument, "lasso: lambda must be >= 0");
  require(x.rows() == y.size(), ErrorKind::Dimension, "lasso: feature rows and target count differ");
  require(x.allFinite() && y.allFinite(), ErrorKind::InvalidArgument, "lasso: non-finite input");
  const auto n = static_cast<double>(x.rows());
  const auto d = x.cols();

  CoordinateDescentResult res;
  res.weights = warm_start ? *warm_start : Vector::Zero(d);
  require(res.weights.size() == d, ErrorKind::Dimension, "lasso: warm start has the wrong length");
  res.intercept = y.mean();

  const Vector col_sq = x.colwise().squaredNorm().transpose() / n;
  Vector r = (y - x * res.weights).array() - res.intercept;

  for (res.sweeps = 1; res.sweeps <= options.max_sweeps; ++res.sweeps) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (col_sq(j) == 0.0) {
        res.weights(j) = 0.0;
        continue;
      }
      const double old = res.weights(j);
      const double rho = x.col(j).dot(r) / n + col_sq(j) * old;
      const double updated = soft_threshold(rho, lambda) / col_sq(j);
      if (updated != old) {
        r.noalias() -= (updated - old) * x.col(j);
        res.weights(j) = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    if (options.record_objective) {
      res.objective_history.push_back(lasso_objective(x, y, res.weights, res.intercept, lambda));
    }
    if (max_change < options.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.sweeps = std::min(res.sweeps, options.max_sweeps);
  // Columns are centred only to rounding; absorb the remainder.
  res.intercept = (y - x * res.weights).mean();
  return res;
}

Vector LassoModel::predict(const Matrix& features) const {
  const Matrix z = scaler.transform(features);
  return (z * weights).array() + intercept;
}

nlohmann::json LassoModel::to_json() const {
  return {{"model", "lasso"},
          {"weights", json_vec(weights)},
          {"intercept", intercept},
          {"lambda", lambda},
          {"standardization", scaler.to_json()}};
}

LassoModel LassoModel::from_json(const nlohmann::json& doc) {
  try {
    LassoModel m;
    m.weights = vec_json(doc.at("weights"));
    m.intercept = doc.at("intercept").get<double>();
    m.lambda = doc.at("lambda").get<double>();
    m.scaler = Standardizer::from_json(doc.at("standardization"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("lasso model: ") + e.what());
  }
}

LassoModel lasso_fit(const Matrix& features, std::span<const double> targets, double lambda,
                     const CoordinateDescentOptions& options) {
  check_xy(features, targets, "lasso_fit");
  LassoModel m;
  m.scaler = standardize_fit(features);
  const Matrix z = m.scaler.transform(features);
  auto cd = lasso_coordinate_descent(z, to_vector(targets), lambda, options);
  m.weights = std::move(cd.weights);
  m.intercept = cd.intercept;
  m.lambda = lambda;
  return m;
}

LassoCvFit lasso_cv_fit(const Matrix& features, std::span<const double> targets, const LassoCvOptions& options) {
  check_xy(features, targets, "lasso_cv_fit");
  const auto n = static_cast<std::size_t>(features.rows());
  require(options.folds >= 2, ErrorKind::InvalidArgument, "lasso_cv_fit: need at least 2 folds");
  require(options.folds <= n, ErrorKind::InvalidArgument,
          "lasso_cv_fit: " + std::to_string(options.folds) + " folds for " + std::to_string(n) + " rows");
  require(options.grid_size >= 1, ErrorKind::InvalidArgument, "lasso_cv_fit: empty lambda grid");
  require(options.grid_ratio > 0.0 && options.grid_ratio <= 1.0, ErrorKind::InvalidArgument,
          "lasso_cv_fit: grid ratio must lie in (0, 1]");

  const auto full_scaler = standardize_fit(features);
  const Matrix z_full = full_scaler.transform(features);
  const Vector y_full = to_vector(targets);
  double lmax = lasso_lambda_max(z_full, y_full);
  if (!(lmax > 0.0)) lmax = 1.0;  // constant target: any lambda gives the mean

  LassoCvFit out;
  out.grid.resize(options.grid_size);
  for (std::size_t g = 0; g < options.grid_size; ++g) {
    const double t = options.grid_size == 1 ? 0.0 : static_cast<double>(g) / static_cast<double>(options.grid_size - 1);
    out.grid[g] = lmax * std::pow(options.grid_ratio, t);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(options.seed, {0x1a550ULL});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> rmse_sum(options.grid_size, 0.0);
  std::vector<std::size_t> count(options.grid_size, 0);
  for (std::size_t f = 0; f < options.folds; ++f) {
    const std::size_t begin = f * n / options.folds;
    const std::size_t end = (f + 1) * n / options.folds;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                      order.begin() + static_cast<std::ptrdiff_t>(end));
    train_idx.insert(train_idx.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(begin));
    train_idx.insert(train_idx.end(), order.begin() + static_cast<std::ptrdiff_t>(end), order.end());
    if (train_idx.size() < 2 || test_idx.empty()) continue;

    Matrix x_train(static_cast<Eigen::Index>(train_idx.size()), features.cols());
    Vector y_train(static_cast<Eigen::Index>(train_idx.size()));
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      x_train.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(train_idx[i]));
      y_train(static_cast<Eigen::Index>(i)) = targets[train_idx[i]];
    }
    Matrix x_test(static_cast<Eigen::Index>(test_idx.size()), features.cols());
    Vector y_test(static_cast<Eigen::Index>(test_idx.size()));
    for (std::size_t i = 0; i < test_idx.size(); ++i) {
      x_test.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(test_idx[i]));
      y_test(static_cast<Eigen::Index>(i)) = targets[test_idx[i]];
    }

    const auto scaler = standardize_fit(x_train);
    const Matrix z_train = scaler.transform(x_train);
    const Matrix z_test = scaler.transform(x_test);
    Vector warm = Vector::Zero(features.cols());
    for (std::size_t g = 0; g < options.grid_size; ++g) {
      auto cd = lasso_coordinate_descent(z_train, y_train, out.grid[g], options.descent, &warm);
      warm = cd.weights;
      const Vector pred = (z_test * cd.weights).array() + cd.intercept;
      rmse_sum[g] += std::sqrt((pred - y_test).squaredNorm() / static_cast<double>(test_idx.size()));
      ++count[g];
    }
  }

  out.mean_rmse.resize(options.grid_size);
  std::size_t best = 0;
  for (std::size_t g = 0; g < options.grid_size; ++g) {
    out.mean_rmse[g] = count[g] ? rmse_sum[g] / static_cast<double>(count[g]) : std::numeric_limits<double>::infinity();
    if (out.mean_rmse[g] < out.mean_rmse[best]) best = g;
  }

  out.model.scaler = full_scaler;
  auto cd = lasso_coordinate_descent(z_full, y_full, out.grid[best], options.descent);
  out.model.weights = std::move(cd.weights);
  out.model.intercept = cd.intercept;
  out.model.lambda = out.grid[best];
  return out;
}

KnnModel KnnModel::fit(const Matrix& features, std::span<const double> targets, std::size_t k) {
  check_xy(features, targets, "knn");
  require(k >= 1 && k <= targets.size(), ErrorKind::InvalidArgument,
          "knn: k = " + std::to_string(k) + " but only " + std::to_string(targets.size()) + " training rows");
  KnnModel m;
  m.k = k;
  if (features.rows() >= 2) {
    m.scaler = standardize_fit(features);
  } else {
    m.scaler.means = features.row(0).transpose();
    m.scaler.stds = Vector::Ones(features.cols());
    m.scaler.constant.assign(static_cast<std::size_t>(features.cols()), true);
  }
  m.train = m.scaler.transform(features);
  m.targets = to_vector(targets);
  return m;
}

Vector KnnModel::predict(const Matrix& queries) const {
  require(train.rows() >= 1, ErrorKind::InvalidArgument, "knn: model is empty");
  require(queries.cols() == train.cols(), ErrorKind::Dimension,
          "knn: query has " + std::to_string(queries.cols()) + " features, model has " + std::to_string(train.cols()));
  const Matrix z = scaler.transform(queries);
  const auto n = static_cast<std::size_t>(train.rows());
  Vector out(queries.rows());
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (Eigen::Index q = 0; q < z.rows(); ++q) {
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = {(train.row(static_cast<Eigen::Index>(i)) - z.row(q)).squaredNorm(), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += targets(static_cast<Eigen::Index>(dist[i].second));
    out(q) = sum / static_cast<double>(k);
  }
  return out;
}

nlohmann::json KnnModel::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < train.rows(); ++i) {
    rows.push_back(std::vector<double>(train.cols()));
    for (Eigen::Index j = 0; j < train.cols(); ++j) rows.back()[static_cast<std::size_t>(j)] = train(i, j);
  }
  return {{"model", "knn"}, {"k", k}, {"targets", json_vec(targets)}, {"neighbors", rows},
          {"standardization", scaler.to_json()}};
}

KnnModel KnnModel::from_json(const nlohmann::json& doc) {
  try {
    KnnModel m;
    m.k = doc.at("k").get<std::size_t>();
    m.targets = vec_json(doc.at("targets"));
    m.scaler = Standardizer::from_json(doc.at("standardization"));
    const auto& rows = doc.at("neighbors");
    m.train.resize(static_cast<Eigen::Index>(rows.size()), m.scaler.means.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto r = rows[i].get<std::vector<double>>();
      require(r.size() == static_cast<std::size_t>(m.train.cols()), ErrorKind::Format, "knn model: ragged neighbor row");
      for (std::size_t j = 0; j < r.size(); ++j) m.train(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[j];
    }
    require(m.targets.size() == m.train.rows() && m.k >= 1 && m.k <= static_cast<std::size_t>(m.train.rows()),
            ErrorKind::Format, "knn model: inconsistent sizes");
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("knn model: ") + e.what());
  }
}

}  // namespace cspr
