#pragma once

#include "sramm/matcore.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace sramm {

/// Mutable state of the barrier row-selection process.
///
/// z accumulates sum t_i a_i a_i^T over the chosen rows; the walls xu, xl start
/// at +/- k I and move by du * A^T A and dl * A^T A each step. The invariants
/// tr(A (xu - z)^-1 A^T) <= 1, tr(A (z - xl)^-1 A^T) <= 1 and xl < z < xu hold
/// after every completed step.
struct BssState {
  Matrix z;
  Matrix xu;
  Matrix xl;
  std::map<Eigen::Index, double> weights;
  Eigen::Index step = 0;
  double du = 0.0;
  double dl = 0.0;
};

/// Walls at +/- k I, z = 0, du = e + 2e^2, dl = e - 2e^2 for the step parameter e.
BssState bss_initial_state(Eigen::Index d, double k, double step_eps);

struct BssStepInfo {
  Eigen::Index step = 0;  // 1-based count of completed steps
  Eigen::Index row = 0;
  double t = 0.0;
  /// Bounds on 1/t for the chosen row: inv_t_min from the upper barrier, inv_t_max from the lower.
  double inv_t_min = 0.0;
  double inv_t_max = 0.0;
  /// Sums of the per-row bounds over all rows (averaging argument: min-sum <= max-sum).
  double sum_inv_t_min = 0.0;
  double sum_inv_t_max = 0.0;
  double upper_potential = 0.0;
  double lower_potential = 0.0;
  /// lambda_min(xu - z) and lambda_min(z - xl) after the step.
  double upper_gap = 0.0;
  double lower_gap = 0.0;
};

struct BssStepResult {
  BssState state;
  BssStepInfo info;
};

/// One barrier step. Throws Infeasible when no row admits a valid t and
/// BarrierBreach when a potential exceeds 1 + 1e-9 or a wall is crossed.
BssStepResult bss_step(BssState state, const Matrix& a);
BssStepResult bss_step(BssState state, const Matrix& a, const Matrix& gram);

/// Diagonal row selection S: row indices[i] scaled by scales[i].
struct RowSelection {
  std::vector<Eigen::Index> indices;
  std::vector<double> scales;
  Eigen::Index nnz = 0;
  /// Barrier steps taken (0 for sampled selections).
  Eigen::Index steps = 0;
};

/// S * a restricted to the selected rows (nnz x cols).
Matrix apply_selection(const RowSelection& sel, const Matrix& a);

/// Step count ceil(k / e^2) for the internal step parameter e = eps / 3.
Eigen::Index bss_step_budget(double k, double eps);

using BssObserver = std::function<void(const BssStepInfo&)>;

/// Deterministic selection with |(SA)^T (SA) - A^T A| <= eps, for |A|^2 <= 1 and |A|_F^2 <= k.
RowSelection bss_select(const Matrix& a, double k, double eps, const BssObserver& observer = {});

/// Selection satisfying (k, eps)-AMM for the pair (A, B).
RowSelection bss_amm(const Matrix& a, const Matrix& b, double k, double eps, const BssObserver& observer = {});

/// m i.i.d. draws with p_i proportional to |a_i|^2 + |b_i|^2; E[(SA)^T (SB)] = A^T B.
RowSelection importance_sample(const Matrix& a, const Matrix& b, Eigen::Index m, std::uint64_t seed);

/// Sampling probabilities used by importance_sample.
Vector importance_probabilities(const Matrix& a, const Matrix& b);

}  // namespace sramm
