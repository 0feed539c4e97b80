#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace cspr {

/// Dense real matrix, column-major. Trials are channels x samples.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Top-f solutions of A w = lambda B w, eigenvalues descending. Each column
/// of `eigenvectors` has unit Euclidean norm and its largest-magnitude entry
/// is positive.
struct GenEigResult {
  Vector eigenvalues;
  Matrix eigenvectors;
};

inline constexpr double kDefaultRidge = 1e-8;

/// X X^T / (S - 1) for a C x S trial, symmetrized. Throws Degenerate if S < 2.
Matrix trial_covariance(const Matrix& trial);

/// Symmetric-definite generalized eigenproblem by Cholesky whitening.
///
/// Both inputs are symmetrized first. The denominator is regularized as
/// B + ridge * (trace(B) / C) * I and factored as L L^T; the whitened
/// problem L^-1 A L^-T v = lambda v is solved with a symmetric eigensolver
/// and eigenvectors are mapped back by w = L^-T v, then normalized.
///
/// Throws Dimension when f is outside [1, C] or shapes disagree, and
/// Singular when the regularized denominator is not positive definite.
GenEigResult solve_generalized_eig(const Matrix& numerator, const Matrix& denominator,
                                   std::size_t f, double ridge = kDefaultRidge);

/// Flips the sign of each column so that its largest-magnitude entry is
/// positive (first such entry on ties).
void normalize_column_signs(Matrix& columns);

}  // namespace cspr
