#include "sramm/experiments.hpp"

#include "sramm/error.hpp"
#include "sramm/generators.hpp"
#include "sramm/rng.hpp"
#include "sramm/solvers.hpp"

#include <cmath>
#include <numbers>

namespace sramm {

SketchSpec planned_spec(Family family, Eigen::Index k, double eps, double delta, double c, Eigen::Index n,
                        std::uint64_t seed) {
  const RowPlan plan = plan_rows(family, k, eps, delta, c);
  SketchSpec spec;
  spec.family = family;
  spec.n = n;
  spec.seed = seed;
  if (family == Family::SparseEmbedding) {
    spec.m = plan.m;
    spec.s = plan.s;
  } else {
    spec.m = std::min(plan.m, n);
  }
  validate(spec);
  return spec;
}

CalibrationResult calibrate(Family family, const Matrix& a, const Matrix& b, Eigen::Index k, double eps, double delta,
                            double target_rate, int trials, std::uint64_t seed, unsigned threads,
                            const CalibrationOptions& opts) {
  const double kd = static_cast<double>(k);
  CalibrationResult result;
  auto passes = [&](double c) {
    const SketchSpec spec = planned_spec(family, k, eps, delta, c, a.rows(), seed);
    const FailureEstimate est = estimate_failure_rate(spec, a, b, kd, eps, trials, seed, threads);
    result.history.push_back({c, spec.m, est.rate});
    return est.rate <= target_rate;
  };

  double lo = 0.0;
  double hi = opts.start;
  bool found = false;
  for (int i = 0; i <= opts.max_doublings; ++i) {
    if (passes(hi)) {
      found = true;
      break;
    }
    lo = hi;
    hi *= 2.0;
  }
  if (!found) return result;

  for (int i = 0; i < opts.bisection_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (passes(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  result.c = hi;
  result.found = true;
  return result;
}

RegressionInstance gen_regression_instance(Eigen::Index n, Eigen::Index d, Eigen::Index p, double noise_scale,
                                           std::uint64_t seed) {
  if (n < 1 || d < 1 || p < 1 || d > n || !(noise_scale >= 0.0)) {
    throw Error(ErrorCode::InvalidParams, "regression instance needs 1 <= d <= n, p >= 1, noise >= 0");
  }
  RegressionInstance inst;
  std::vector<double> spectrum;
  for (Eigen::Index i = 0; i < d; ++i) spectrum.push_back(1.0 - 0.5 * static_cast<double>(i) / static_cast<double>(d));
  inst.a = gen_decay(n, d, spectrum, derive_seed(seed, 0));
  const Matrix x0 = gaussian_matrix(d, p, derive_seed(seed, 1));
  const double normalizer = std::sqrt(static_cast<double>(n)) + std::sqrt(static_cast<double>(p));
  inst.b = inst.a * x0 + (noise_scale / normalizer) * gaussian_matrix(n, p, derive_seed(seed, 2));
  return inst;
}

KrrInstance gen_krr_instance(Eigen::Index n, double noise_scale, std::uint64_t seed) {
  if (n < 1 || !(noise_scale >= 0.0)) throw Error(ErrorCode::InvalidParams, "KRR instance needs n >= 1, noise >= 0");
  KrrInstance inst;
  inst.points.resize(n, 1);
  inst.f_true.resize(n);
  inst.y.resize(n);
  Rng rng(derive_seed(seed, 0));
  Rng noise(derive_seed(seed, 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = rng.uniform();
    inst.points(i, 0) = x;
    inst.f_true(i) = std::sin(2.0 * std::numbers::pi * x) + 0.5 * x;
    inst.y(i) = inst.f_true(i) + noise_scale * noise.normal();
  }
  return inst;
}

}  // namespace sramm

namespace sramm {

KrrReference krr_reference(const KrrProblem& problem, const Vector& alpha_exact, const Vector& f_true, Family family,
                           Eigen::Index oversized_m, std::uint64_t seed) {
  const Eigen::Index n = problem.kernel.rows();
  KrrReference ref;
  const Vector fitted = problem.kernel * alpha_exact;
  ref.statistical_error = std::sqrt((fitted - f_true).squaredNorm() / static_cast<double>(n));
  SketchSpec spec{family, std::min(oversized_m, n), n, 0, {}, seed};
  if (family == Family::SparseEmbedding) spec.s = 1;
  if (family == Family::Identity) spec = identity_spec(n);
  ref.oversized_gap = krr_sketched(problem, build(spec), alpha_exact).n_norm_gap;
  ref.tolerance = std::max(0.5 * ref.statistical_error, 2.0 * ref.oversized_gap);
  return ref;
}

}  // namespace sramm
