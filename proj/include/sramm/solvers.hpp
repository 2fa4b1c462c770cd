#pragma once

#include "sramm/matcore.hpp"
#include "sramm/sketch.hpp"

namespace sramm {

/// Both sides of the sketched-regression guarantee for one realization.
struct RegressionReport {
  Matrix xtilde;
  double err_sq = 0.0;       // |A X~ - B|^2
  double opt_sq = 0.0;       // |P_A B - B|^2
  double opt_frob_sq = 0.0;  // |P_A B - B|_F^2
  double bound = 0.0;        // (1 + eps) opt_sq + (eps / k) opt_frob_sq
  bool pass = false;
};

struct LowRankReport {
  Matrix approx;             // rank-k truncation of A P_S
  double err_sq = 0.0;       // |A - approx|^2
  double opt_sq = 0.0;       // sigma_{k+1}^2
  double opt_frob_sq = 0.0;  // |A - A_k|_F^2
  double bound = 0.0;
  double tail_stable_rank = 0.0;  // stable rank of A - A_k (0 when the tail vanishes)
  bool pass = false;
};

struct KrrProblem {
  Matrix kernel;  // symmetric PSD, n x n
  Vector y;
  double lambda = 0.0;
};

struct KrrSketchResult {
  Vector alpha;           // lifted weights Pi^T alpha_m, length n
  Vector alpha_reduced;   // solution of the m x m system
  double n_norm_gap = 0.0;
};

/// argmin_X |AX - B| through the pseudoinverse.
Matrix exact_regression(const Matrix& a, const Matrix& b);

/// X~ = (Pi A)^+ Pi B. Throws RankCollapse when sketching loses rank of A.
RegressionReport sketched_regression(const Matrix& a, const Matrix& b, const Sketch& sk, double k, double eps);

/// Top-k truncation of A projected onto the row space of Pi A.
LowRankReport sketched_lowrank(const Matrix& a, Eigen::Index k, const Sketch& sk, double eps);

/// K_ij = exp(-|x_i - x_j|^2 / (2 bandwidth^2)) over the rows of `points`.
Matrix gaussian_kernel(const Matrix& points, double bandwidth);

/// Throws InvalidParams when the kernel is not symmetric PSD or shapes disagree.
void validate(const KrrProblem& p);

/// alpha = ((1/n) K^2 + 2 lambda K)^+ (1/n) K y.
Vector krr_exact(const KrrProblem& p);

/// Sketched weights; the gap is sqrt((1/n) |K (alpha - alpha_exact)|^2).
KrrSketchResult krr_sketched(const KrrProblem& p, const Sketch& sk);

/// Same as above with the exact weights supplied by the caller.
KrrSketchResult krr_sketched(const KrrProblem& p, const Sketch& sk, const Vector& alpha_exact);

/// The empirical norm sqrt((1/n) sum_i (f(x_i) - g(x_i))^2) of K (alpha_f - alpha_g).
double krr_n_norm(const Matrix& kernel, const Vector& alpha_diff);

}  // namespace sramm
