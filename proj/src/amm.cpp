#include "sramm/amm.hpp"

#include "sramm/error.hpp"
#include "sramm/parallel.hpp"
#include "sramm/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace sramm {

namespace {

void require_same_rows(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "inputs have " + std::to_string(a.rows()) + " and " +
                                              std::to_string(b.rows()) + " rows");
  }
}

double std_error_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const auto n = static_cast<double>(xs.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

double amm_bound_from_norms(double norm_a, double fro_a, double norm_b, double fro_b, double k, double eps) {
  const double fa = norm_a * norm_a + fro_a * fro_a / k;
  const double fb = norm_b * norm_b + fro_b * fro_b / k;
  return eps * std::sqrt(fa * fb);
}

double amm_bound(const Matrix& a, const Matrix& b, double k, double eps) {
  if (!(k >= 1.0) || !(eps > 0.0)) throw Error(ErrorCode::InvalidParams, "amm_bound requires k >= 1 and eps > 0");
  require_same_rows(a, b);
  return amm_bound_from_norms(spectral_norm(a), frobenius_norm(a), spectral_norm(b), frobenius_norm(b), k, eps);
}

double amm_error_sketched(const Matrix& a, const Matrix& b, const Matrix& pa, const Matrix& pb) {
  return spectral_norm(pa.transpose() * pb - a.transpose() * b);
}

double amm_error(const Matrix& a, const Matrix& b, const Sketch& sk) {
  require_same_rows(a, b);
  return amm_error_sketched(a, b, apply(sk, a), apply(sk, b));
}

AmmReport check_kamm(const Matrix& a, const Matrix& b, const Sketch& sk, double k, double eps) {
  AmmReport r;
  r.k = k;
  r.eps = eps;
  r.norm_a = spectral_norm(a);
  r.fro_a = frobenius_norm(a);
  r.norm_b = spectral_norm(b);
  r.fro_b = frobenius_norm(b);
  r.stable_rank_a = r.norm_a > 0 ? (r.fro_a * r.fro_a) / (r.norm_a * r.norm_a) : 0.0;
  r.stable_rank_b = r.norm_b > 0 ? (r.fro_b * r.fro_b) / (r.norm_b * r.norm_b) : 0.0;
  r.bound = amm_bound_from_norms(r.norm_a, r.fro_a, r.norm_b, r.fro_b, k, eps);
  r.error = amm_error(a, b, sk);
  r.pass = r.error <= r.bound;
  return r;
}

double embed_distortion(const Sketch& sk, const Matrix& u) {
  if (orthonormality_defect(u) > 1e-6) throw Error(ErrorCode::NotOrthonormal, "embed_distortion: basis is not orthonormal");
  if (u.cols() == 0) return 0.0;
  const Matrix pu = apply(sk, u);
  return spectral_norm(pu.transpose() * pu - Matrix::Identity(u.cols(), u.cols()));
}

MomentEstimate estimate_ose_moment(const SketchSpec& spec, const Matrix& u, int ell, int trials, std::uint64_t seed,
                                   unsigned threads) {
  if (trials < 1 || ell < 1) throw Error(ErrorCode::InvalidParams, "moment estimation needs trials >= 1 and ell >= 1");
  if (orthonormality_defect(u) > 1e-6) throw Error(ErrorCode::NotOrthonormal, "estimate_ose_moment: basis is not orthonormal");

  MomentEstimate est;
  est.distortions.assign(static_cast<std::size_t>(trials), 0.0);
  parallel_for(est.distortions.size(), threads, [&](std::size_t t) {
    const Sketch sk = build(with_seed(spec, derive_seed(seed, t)));
    est.distortions[t] = embed_distortion(sk, u);
  });

  std::vector<double> powers;
  powers.reserve(est.distortions.size());
  for (double x : est.distortions) powers.push_back(std::pow(x, ell));
  double sum = 0.0;
  for (double p : powers) sum += p;
  est.mean = sum / static_cast<double>(trials);
  est.std_error = std_error_of(powers, est.mean);
  return est;
}

FailureEstimate estimate_failure_rate(const SketchSpec& spec, const Matrix& a, const Matrix& b, double k, double eps,
                                      int trials, std::uint64_t seed, unsigned threads) {
  if (trials < 1) throw Error(ErrorCode::InvalidParams, "failure-rate estimation needs trials >= 1");
  require_same_rows(a, b);
  if (a.rows() != spec.n) throw Error(ErrorCode::ShapeMismatch, "sketch input dimension does not match the data");

  const double norm_a = spectral_norm(a);
  const double fro_a = frobenius_norm(a);
  const double norm_b = spectral_norm(b);
  const double fro_b = frobenius_norm(b);
  const double bound = amm_bound_from_norms(norm_a, fro_a, norm_b, fro_b, k, eps);
  const Matrix exact = a.transpose() * b;
  const Matrix ab = hconcat(a, b);

  AmmReport base;
  base.k = k;
  base.eps = eps;
  base.norm_a = norm_a;
  base.fro_a = fro_a;
  base.norm_b = norm_b;
  base.fro_b = fro_b;
  base.stable_rank_a = norm_a > 0 ? (fro_a * fro_a) / (norm_a * norm_a) : 0.0;
  base.stable_rank_b = norm_b > 0 ? (fro_b * fro_b) / (norm_b * norm_b) : 0.0;
  base.bound = bound;

  FailureEstimate est;
  est.trials = trials;
  est.reports.assign(static_cast<std::size_t>(trials), base);
  parallel_for(est.reports.size(), threads, [&](std::size_t t) {
    const Sketch sk = build(with_seed(spec, derive_seed(seed, t)));
    const Matrix sketched = apply(sk, ab);
    const Matrix prod = sketched.leftCols(a.cols()).transpose() * sketched.rightCols(b.cols());
    AmmReport& r = est.reports[t];
    r.error = spectral_norm(prod - exact);
    r.pass = r.error <= r.bound;
  });

  for (const auto& r : est.reports) est.failures += r.pass ? 0 : 1;
  est.rate = static_cast<double>(est.failures) / trials;
  est.std_error = std::sqrt(est.rate * (1.0 - est.rate) / trials);
  return est;
}

}  // namespace sramm
