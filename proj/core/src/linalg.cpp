#include "cspr/linalg.hpp"

#include "cspr/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace cspr {

Matrix trial_covariance(const Matrix& trial) {
  const auto samples = trial.cols();
  require(samples >= 2, ErrorKind::Degenerate,
          "trial_covariance: need at least 2 samples, got " + std::to_string(samples));
  Matrix cov = (trial * trial.transpose()) / static_cast<double>(samples - 1);
  return 0.5 * (cov + cov.transpose());
}

void normalize_column_signs(Matrix& columns) {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
      const double a = std::abs(columns(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (columns(best, j) < 0.0) columns.col(j) *= -1.0;
  }
}

GenEigResult solve_generalized_eig(const Matrix& numerator, const Matrix& denominator,
                                   std::size_t f, double ridge) {
  const auto c = numerator.rows();
  require(numerator.cols() == c && denominator.rows() == c && denominator.cols() == c,
          ErrorKind::Dimension, "solve_generalized_eig: inputs must be square and the same size");
  require(c >= 1, ErrorKind::Dimension, "solve_generalized_eig: empty input");
  require(f >= 1 && f <= static_cast<std::size_t>(c), ErrorKind::Dimension,
          "solve_generalized_eig: requested " + std::to_string(f) + " filters from " +
              std::to_string(c) + " channels");
  require(ridge >= 0.0 && std::isfinite(ridge), ErrorKind::InvalidArgument,
          "solve_generalized_eig: ridge must be finite and non-negative");
  require(numerator.allFinite() && denominator.allFinite(), ErrorKind::InvalidArgument,
          "solve_generalized_eig: non-finite input");

  const Matrix a = 0.5 * (numerator + numerator.transpose());
  Matrix b = 0.5 * (denominator + denominator.transpose());
  if (ridge > 0.0) {
    const double shift = ridge * b.trace() / static_cast<double>(c);
    b.diagonal().array() += shift;
  }

  Eigen::LLT<Matrix> llt(b);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::Singular, "solve_generalized_eig: denominator is not positive definite");
  }
  const Matrix lower = llt.matrixL();
  const Vector pivots = lower.diagonal();
  const double max_pivot = pivots.maxCoeff();
  // Pivots are square roots of the Schur complements of b.
  if (!(pivots.minCoeff() > 0.0) || pivots.minCoeff() * pivots.minCoeff() < 1e-15 * max_pivot * max_pivot) {
    fail(ErrorKind::Singular, "solve_generalized_eig: denominator is numerically singular");
  }

  // whitened = L^-1 A L^-T
  const auto tri = lower.triangularView<Eigen::Lower>();
  Matrix tmp = tri.solve(a);
  Matrix whitened = tri.solve(tmp.transpose());
  whitened = 0.5 * (whitened + whitened.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(whitened);
  if (eig.info() != Eigen::Success) {
    fail(ErrorKind::Singular, "solve_generalized_eig: symmetric eigensolver did not converge");
  }

  const auto k = static_cast<Eigen::Index>(f);
  GenEigResult out;
  out.eigenvalues.resize(k);
  Matrix v(c, k);
  // SelfAdjointEigenSolver sorts ascending.
  for (Eigen::Index j = 0; j < k; ++j) {
    out.eigenvalues(j) = eig.eigenvalues()(c - 1 - j);
    v.col(j) = eig.eigenvectors().col(c - 1 - j);
  }
  out.eigenvectors = lower.transpose().triangularView<Eigen::Upper>().solve(v);
  for (Eigen::Index j = 0; j < k; ++j) out.eigenvectors.col(j).normalize();
  normalize_column_signs(out.eigenvectors);
  return out;
}

}  // namespace cspr
