#include "sramm/matcore.hpp"

#include "sramm/error.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace sramm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidLength: return "InvalidLength";
    case ErrorCode::NormTooLarge: return "NormTooLarge";
    case ErrorCode::BarrierBreach: return "BarrierBreach";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::RankCollapse: return "RankCollapse";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Matrix SvdFactorization::reconstruct() const {
  return u * sigma.asDiagonal() * v.transpose();
}

void require_finite(const Matrix& a) {
  if (!a.allFinite()) throw Error(ErrorCode::InvalidMatrix, "matrix has non-finite entries");
}

SvdFactorization svd(const Matrix& a, double tol) {
  require_finite(a);
  if (tol < 0) throw Error(ErrorCode::InvalidParams, "svd tolerance must be non-negative");

  SvdFactorization f;
  f.tol = tol;
  if (a.size() == 0) {
    f.u = Matrix(a.rows(), 0);
    f.v = Matrix(a.cols(), 0);
    f.sigma = Vector(0);
    return f;
  }

  Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = dec.singularValues();
  const double cutoff = tol * s(0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff && s(r) > 0) ++r;

  f.u = dec.matrixU().leftCols(r);
  f.v = dec.matrixV().leftCols(r);
  f.sigma = s.head(r);
  return f;
}

Vector singular_values(const Matrix& a) {
  require_finite(a);
  if (a.size() == 0) return Vector(0);
  return Eigen::BDCSVD<Matrix>(a).singularValues();
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

double spectral_norm_power(const Matrix& a, const PowerIterationOptions& opts) {
  require_finite(a);
  if (a.size() == 0) return 0.0;

  Vector v = Vector::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
  double lambda = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    Vector w = a.transpose() * (a * v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    const bool converged = std::abs(next - lambda) <= opts.tol * next;
    lambda = next;
    if (converged) break;
  }
  return std::sqrt(lambda);
}

double frobenius_norm(const Matrix& a) {
  require_finite(a);
  return a.norm();
}

double stable_rank(const Matrix& a) {
  const double spec = spectral_norm(a);
  if (spec == 0.0) throw Error(ErrorCode::ZeroMatrix, "stable rank of a zero matrix");
  const double fro = a.norm();
  return (fro * fro) / (spec * spec);
}

double nuclear_rank(const Matrix& a) {
  const Vector s = singular_values(a);
  if (s.size() == 0 || s(0) == 0.0) throw Error(ErrorCode::ZeroMatrix, "nuclear rank of a zero matrix");
  return s.sum() / s(0);
}

Eigen::Index rank(const Matrix& a, double tol) {
  return svd(a, tol).rank();
}

Truncation truncate(const SvdFactorization& f, Eigen::Index k) {
  if (k < 0) throw Error(ErrorCode::InvalidParams, "truncation rank must be non-negative");
  const Eigen::Index keep = std::min(k, f.rank());
  Truncation t;
  t.head = f.u.leftCols(keep) * f.sigma.head(keep).asDiagonal() * f.v.leftCols(keep).transpose();
  const Eigen::Index rest = f.rank() - keep;
  t.tail = f.u.rightCols(rest) * f.sigma.tail(rest).asDiagonal() * f.v.rightCols(rest).transpose();
  return t;
}

Matrix orthonormal_basis(const Matrix& a, double tol) {
  return svd(a, tol).u;
}

double orthonormality_defect(const Matrix& u) {
  if (u.cols() == 0) return 0.0;
  const Matrix gram = u.transpose() * u;
  return (gram - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

Matrix project(const Matrix& u, const Matrix& b) {
  require_finite(u);
  require_finite(b);
  if (u.rows() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "project: row count mismatch");
  if (orthonormality_defect(u) > 1e-6) throw Error(ErrorCode::NotOrthonormal, "project: basis is not orthonormal");
  return u * (u.transpose() * b);
}

Matrix pseudoinverse(const Matrix& a, double tol) {
  const SvdFactorization f = svd(a, tol);
  return f.v * f.sigma.cwiseInverse().asDiagonal() * f.u.transpose();
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "hconcat: row count mismatch");
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace sramm
