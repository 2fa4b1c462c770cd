#pragma once

#include "sramm/amm.hpp"
#include "sramm/matcore.hpp"
#include "sramm/sketch.hpp"
#include "sramm/solvers.hpp"

#include <cstdint>
#include <vector>

namespace sramm {

/// Planner rows; dense and SRHT rows are clamped to the input dimension n.
SketchSpec planned_spec(Family family, Eigen::Index k, double eps, double delta, double c, Eigen::Index n,
                        std::uint64_t seed);

struct CalibrationStep {
  double c = 0.0;
  Eigen::Index m = 0;
  double failure_rate = 0.0;
};

struct CalibrationResult {
  double c = 0.0;
  bool found = false;
  std::vector<CalibrationStep> history;
};

struct CalibrationOptions {
  double start = 0.25;
  int max_doublings = 12;
  int bisection_steps = 6;
};

/// Smallest planner constant (to bisection resolution) whose empirical failure
/// rate on (a, b) is at most target_rate: c doubles from `start` until it
/// passes, then the bracket is bisected.
CalibrationResult calibrate(Family family, const Matrix& a, const Matrix& b, Eigen::Index k, double eps, double delta,
                            double target_rate, int trials, std::uint64_t seed, unsigned threads = 1,
                            const CalibrationOptions& opts = {});

/// A with a random well-conditioned column space and B = A X0 + noise; the
/// noise gives the optimal residual a high stable rank.
struct RegressionInstance {
  Matrix a;
  Matrix b;
};
RegressionInstance gen_regression_instance(Eigen::Index n, Eigen::Index d, Eigen::Index p, double noise_scale,
                                           std::uint64_t seed);

/// Points uniform in [0, 1], smooth target f(x) = sin(2 pi x) + x/2, y = f + noise.
struct KrrInstance {
  Matrix points;
  Vector f_true;
  Vector y;
};
KrrInstance gen_krr_instance(Eigen::Index n, double noise_scale, std::uint64_t seed);

}  // namespace sramm

namespace sramm {

/// Pre-run reference for sketched-KRR acceptance: the exact estimator's error
/// against the noiseless target sets the statistical scale, an oversized sketch
/// sets the sketching floor.
struct KrrReference {
  double statistical_error = 0.0;  // |f_exact - f_true|_n
  double oversized_gap = 0.0;      // gap of one sketch with `oversized_m` rows
  double tolerance = 0.0;
};

KrrReference krr_reference(const KrrProblem& problem, const Vector& alpha_exact, const Vector& f_true, Family family,
                           Eigen::Index oversized_m, std::uint64_t seed);

}  // namespace sramm
