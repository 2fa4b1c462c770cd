#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace sramm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default relative cutoff for dropping singular values.
inline constexpr double kRankTol = 1e-10;

/// Compact SVD a = u * diag(sigma) * v^T with all retained sigma > tol * sigma_max.
struct SvdFactorization {
  Matrix u;
  Vector sigma;
  Matrix v;
  double tol = kRankTol;

  Eigen::Index rank() const { return sigma.size(); }
  Matrix reconstruct() const;
};

struct Truncation {
  Matrix head;
  Matrix tail;
};

/// Throws InvalidMatrix if any entry is NaN or infinite.
void require_finite(const Matrix& a);

SvdFactorization svd(const Matrix& a, double tol = kRankTol);

/// All singular values (no cutoff), non-increasing, length min(rows, cols).
Vector singular_values(const Matrix& a);

double spectral_norm(const Matrix& a);

struct PowerIterationOptions {
  double tol = 1e-8;
  int max_iterations = 10000;
};

/// Power iteration on a^T a from the normalized all-ones start vector.
/// Intended for inputs too large for a full SVD; spectral_norm is exact.
double spectral_norm_power(const Matrix& a, const PowerIterationOptions& opts = {});

double frobenius_norm(const Matrix& a);
double stable_rank(const Matrix& a);
double nuclear_rank(const Matrix& a);

/// Numerical rank with cutoff tol relative to sigma_max.
Eigen::Index rank(const Matrix& a, double tol = kRankTol);

/// Best rank-k approximation (head) and the residual a - head (tail).
Truncation truncate(const SvdFactorization& f, Eigen::Index k);

/// Orthonormal basis of the column space; zero columns for a zero matrix.
Matrix orthonormal_basis(const Matrix& a, double tol = kRankTol);

/// Max-entry deviation of u^T u from the identity.
double orthonormality_defect(const Matrix& u);

/// u u^T b. Throws NotOrthonormal if u's columns deviate from orthonormal by more than 1e-6.
Matrix project(const Matrix& u, const Matrix& b);

/// Moore-Penrose pseudoinverse through the SVD with relative cutoff tol.
Matrix pseudoinverse(const Matrix& a, double tol = kRankTol);

/// Horizontal concatenation [a | b]; rows must match.
Matrix hconcat(const Matrix& a, const Matrix& b);

}  // namespace sramm
