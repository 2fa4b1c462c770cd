#include "sramm/solvers.hpp"

#include "sramm/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace sramm {

namespace {

// Absolute slack for pass/fail comparisons of squared errors, relative to the data scale.
constexpr double kRoundingSlack = 1e-12;

double squared(double x) { return x * x; }

}  // namespace

Matrix exact_regression(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "regression: A and B row counts differ");
  require_finite(b);
  return pseudoinverse(a) * b;
}

RegressionReport sketched_regression(const Matrix& a, const Matrix& b, const Sketch& sk, double k, double eps) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "regression: A and B row counts differ");
  if (!(k >= 1.0) || !(eps > 0.0)) throw Error(ErrorCode::InvalidParams, "regression: need k >= 1 and eps > 0");

  const Matrix pa = apply(sk, a);
  const Matrix pb = apply(sk, b);
  const SvdFactorization fpa = svd(pa);
  const Eigen::Index rank_a = rank(a);
  if (fpa.rank() < rank_a) {
    throw Error(ErrorCode::RankCollapse, "sketched A has rank " + std::to_string(fpa.rank()) + " < rank(A) = " +
                                             std::to_string(rank_a));
  }

  RegressionReport rep;
  rep.xtilde = fpa.v * fpa.sigma.cwiseInverse().asDiagonal() * (fpa.u.transpose() * pb);
  const Matrix optimum_residual = a * exact_regression(a, b) - b;
  rep.err_sq = squared(spectral_norm(a * rep.xtilde - b));
  rep.opt_sq = squared(spectral_norm(optimum_residual));
  rep.opt_frob_sq = optimum_residual.squaredNorm();
  rep.bound = (1.0 + eps) * rep.opt_sq + (eps / k) * rep.opt_frob_sq;
  rep.pass = rep.err_sq <= rep.bound + kRoundingSlack * b.squaredNorm();
  return rep;
}

LowRankReport sketched_lowrank(const Matrix& a, Eigen::Index k, const Sketch& sk, double eps) {
  if (k < 1) throw Error(ErrorCode::InvalidParams, "low-rank approximation needs k >= 1");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidParams, "low-rank approximation needs eps > 0");

  const Matrix s = apply(sk, a);
  const Matrix row_basis = orthonormal_basis(s.transpose());
  const Matrix projected = (a * row_basis) * row_basis.transpose();

  LowRankReport rep;
  rep.approx = truncate(svd(projected), k).head;

  const Vector sigma = singular_values(a);
  const Eigen::Index tail_len = std::max<Eigen::Index>(0, sigma.size() - k);
  const Vector tail = sigma.tail(tail_len);
  rep.opt_sq = tail_len > 0 ? squared(tail(0)) : 0.0;
  rep.opt_frob_sq = tail.squaredNorm();
  rep.tail_stable_rank = rep.opt_sq > 0.0 ? rep.opt_frob_sq / rep.opt_sq : 0.0;
  rep.err_sq = squared(spectral_norm(a - rep.approx));
  rep.bound = (1.0 + eps) * rep.opt_sq + (eps / static_cast<double>(k)) * rep.opt_frob_sq;
  rep.pass = rep.err_sq <= rep.bound + kRoundingSlack * a.squaredNorm();
  return rep;
}

Matrix gaussian_kernel(const Matrix& points, double bandwidth) {
  if (!(bandwidth > 0.0)) throw Error(ErrorCode::InvalidParams, "kernel bandwidth must be positive");
  require_finite(points);
  const Eigen::Index n = points.rows();
  Matrix k(n, n);
  const double denom = 2.0 * bandwidth * bandwidth;
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-(points.row(i) - points.row(j)).squaredNorm() / denom);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

void validate(const KrrProblem& p) {
  const Eigen::Index n = p.kernel.rows();
  if (p.kernel.cols() != n || p.y.size() != n) throw Error(ErrorCode::ShapeMismatch, "KRR: kernel and response sizes differ");
  if (!(p.lambda >= 0.0)) throw Error(ErrorCode::InvalidParams, "KRR: lambda must be non-negative");
  require_finite(p.kernel);
  if (!p.y.allFinite()) throw Error(ErrorCode::InvalidMatrix, "KRR: response has non-finite entries");
  const double scale = std::max(1.0, p.kernel.cwiseAbs().maxCoeff());
  if ((p.kernel - p.kernel.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorCode::InvalidParams, "KRR: kernel matrix is not symmetric");
  }
}

Vector krr_exact(const KrrProblem& p) {
  validate(p);
  const Eigen::Index n = p.kernel.rows();
  const double nd = static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p.kernel);
  const Vector& ev = es.eigenvalues();
  const double top = std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  if (ev(0) < -1e-8 * top) throw Error(ErrorCode::InvalidParams, "KRR: kernel matrix is not positive semidefinite");

  // In the eigenbasis the system is diagonal: mu_i = l_i^2/n + 2 lambda l_i, rhs_i = (l_i/n) (Q^T y)_i.
  Vector mu(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double l = std::max(ev(i), 0.0);
    mu(i) = l * l / nd + 2.0 * p.lambda * l;
  }
  const double cutoff = kRankTol * mu.maxCoeff();
  if (p.lambda == 0.0 && (mu.array() <= cutoff).any()) {
    throw Error(ErrorCode::SingularSystem, "KRR: singular kernel with lambda = 0");
  }
  const Vector qy = es.eigenvectors().transpose() * p.y;
  Vector coeff = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mu(i) > cutoff) coeff(i) = (std::max(ev(i), 0.0) / nd) * qy(i) / mu(i);
  }
  return es.eigenvectors() * coeff;
}

double krr_n_norm(const Matrix& kernel, const Vector& alpha_diff) {
  return std::sqrt((kernel * alpha_diff).squaredNorm() / static_cast<double>(kernel.rows()));
}

KrrSketchResult krr_sketched(const KrrProblem& p, const Sketch& sk) { return krr_sketched(p, sk, krr_exact(p)); }

KrrSketchResult krr_sketched(const KrrProblem& p, const Sketch& sk, const Vector& alpha_exact) {
  validate(p);
  const Eigen::Index n = p.kernel.rows();
  if (sk.cols() != n) throw Error(ErrorCode::ShapeMismatch, "KRR: sketch dimension does not match the kernel");
  const double nd = static_cast<double>(n);

  const Matrix pk = apply(sk, p.kernel);              // Pi K, m x n
  const Matrix pkp = apply(sk, Matrix(pk.transpose()));  // Pi K Pi^T, m x m
  Matrix system = (pk * pk.transpose()) / nd + 2.0 * p.lambda * pkp;
  system = 0.5 * (system + system.transpose()).eval();
  const Vector rhs = pk * p.y / nd;

  const SvdFactorization f = svd(system);
  if (p.lambda == 0.0 && f.rank() < system.rows()) {
    throw Error(ErrorCode::SingularSystem, "sketched KRR system is singular");
  }

  KrrSketchResult out;
  out.alpha_reduced = f.v * f.sigma.cwiseInverse().asDiagonal() * (f.u.transpose() * rhs);
  out.alpha = apply_transpose(sk, out.alpha_reduced);
  out.n_norm_gap = krr_n_norm(p.kernel, out.alpha - alpha_exact);
  return out;
}

}  // namespace sramm
