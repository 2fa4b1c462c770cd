#include "sramm/bss.hpp"

#include "sramm/error.hpp"
#include "sramm/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace sramm {

namespace {

constexpr double kPotentialSlack = 1e-9;
constexpr double kNormSlack = 1e-8;

struct SpdInverse {
  Matrix inverse;
  double min_eigenvalue = 0.0;
};

SpdInverse invert_spd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  SpdInverse out;
  out.min_eigenvalue = es.eigenvalues()(0);
  if (!(out.min_eigenvalue > 0.0)) return out;
  out.inverse = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return out;
}

double trace_product(const Matrix& x, const Matrix& y) { return x.cwiseProduct(y.transpose()).sum(); }

}  // namespace

BssState bss_initial_state(Eigen::Index d, double k, double step_eps) {
  BssState s;
  s.z = Matrix::Zero(d, d);
  s.xu = k * Matrix::Identity(d, d);
  s.xl = -k * Matrix::Identity(d, d);
  s.du = step_eps + 2.0 * step_eps * step_eps;
  s.dl = step_eps - 2.0 * step_eps * step_eps;
  return s;
}

BssStepResult bss_step(BssState state, const Matrix& a) { return bss_step(std::move(state), a, a.transpose() * a); }

BssStepResult bss_step(BssState state, const Matrix& a, const Matrix& gram) {
  const SpdInverse mu = invert_spd(state.xu + state.du * gram - state.z);
  const SpdInverse ml = invert_spd(state.z - (state.xl + state.dl * gram));
  if (!(mu.min_eigenvalue > 0.0) || !(ml.min_eigenvalue > 0.0)) {
    throw Error(ErrorCode::BarrierBreach, "shifted walls no longer bracket the accumulator at step " +
                                              std::to_string(state.step + 1));
  }

  // Per-row quadratic forms a_i^T M a_i and a_i^T M G M a_i.
  const Matrix amu = a * mu.inverse;
  const Matrix aml = a * ml.inverse;
  const Vector qu = amu.cwiseProduct(a).rowwise().sum();
  const Vector ql = aml.cwiseProduct(a).rowwise().sum();
  const Vector pu = (amu * gram).cwiseProduct(amu).rowwise().sum();
  const Vector pl = (aml * gram).cwiseProduct(aml).rowwise().sum();
  const double tr_u = pu.sum();
  const double tr_l = pl.sum();

  BssStepInfo info;
  Eigen::Index best = -1;
  double best_gap = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double lo = (tr_u > 0 ? pu(i) / (state.du * tr_u) : 0.0) + qu(i);
    const double hi = (tr_l > 0 ? pl(i) / (state.dl * tr_l) : 0.0) - ql(i);
    info.sum_inv_t_min += lo;
    info.sum_inv_t_max += hi;
    if (!(lo > 0.0) || hi < lo) continue;
    const double gap = hi - lo;
    if (best < 0 || gap > best_gap) {
      best = i;
      best_gap = gap;
      info.inv_t_min = lo;
      info.inv_t_max = hi;
    }
  }
  if (best < 0) {
    throw Error(ErrorCode::Infeasible, "no row admits a barrier-preserving weight at step " +
                                           std::to_string(state.step + 1));
  }

  const double t = 2.0 / (info.inv_t_min + info.inv_t_max);
  const Vector row = a.row(best).transpose();
  state.z.noalias() += t * row * row.transpose();
  state.xu += state.du * gram;
  state.xl += state.dl * gram;
  state.weights[best] += t;
  ++state.step;

  const SpdInverse upper = invert_spd(state.xu - state.z);
  const SpdInverse lower = invert_spd(state.z - state.xl);
  info.step = state.step;
  info.row = best;
  info.t = t;
  info.upper_gap = upper.min_eigenvalue;
  info.lower_gap = lower.min_eigenvalue;
  if (!(upper.min_eigenvalue > 0.0) || !(lower.min_eigenvalue > 0.0)) {
    throw Error(ErrorCode::BarrierBreach, "accumulator crossed a wall at step " + std::to_string(state.step));
  }
  info.upper_potential = trace_product(upper.inverse, gram);
  info.lower_potential = trace_product(lower.inverse, gram);
  if (info.upper_potential > 1.0 + kPotentialSlack || info.lower_potential > 1.0 + kPotentialSlack) {
    throw Error(ErrorCode::BarrierBreach, "barrier potential exceeded 1 at step " + std::to_string(state.step));
  }
  return {std::move(state), info};
}

Matrix apply_selection(const RowSelection& sel, const Matrix& a) {
  Matrix out(static_cast<Eigen::Index>(sel.indices.size()), a.cols());
  for (std::size_t i = 0; i < sel.indices.size(); ++i) {
    if (sel.indices[i] < 0 || sel.indices[i] >= a.rows()) {
      throw Error(ErrorCode::ShapeMismatch, "selection index " + std::to_string(sel.indices[i]) + " out of range");
    }
    out.row(static_cast<Eigen::Index>(i)) = sel.scales[i] * a.row(sel.indices[i]);
  }
  return out;
}

Eigen::Index bss_step_budget(double k, double eps) {
  const double step_eps = eps / 3.0;
  // The relative shave keeps exact quotients such as 9*2/0.09 from rounding up a step.
  return static_cast<Eigen::Index>(std::ceil(k / (step_eps * step_eps) * (1.0 - 1e-12)));
}

RowSelection bss_select(const Matrix& a, double k, double eps, const BssObserver& observer) {
  require_finite(a);
  if (!(eps > 0.0 && eps < 1.0) || !(k > 0.0)) throw Error(ErrorCode::InvalidParams, "bss_select requires 0 < eps < 1 and k > 0");
  const double norm = spectral_norm(a);
  const double fro = a.norm();
  if (norm * norm > 1.0 + kNormSlack || fro * fro > k + kNormSlack) {
    throw Error(ErrorCode::NormTooLarge, "bss_select requires |A|^2 <= 1 and |A|_F^2 <= k");
  }

  RowSelection sel;
  if (fro == 0.0) return sel;

  const double step_eps = eps / 3.0;
  const Eigen::Index steps = bss_step_budget(k, eps);
  const Matrix gram = a.transpose() * a;
  BssState state = bss_initial_state(a.cols(), k, step_eps);
  for (Eigen::Index s = 0; s < steps; ++s) {
    BssStepResult r = bss_step(std::move(state), a, gram);
    if (observer) observer(r.info);
    state = std::move(r.state);
  }

  // Rescale so the average of the final walls maps to A^T A.
  const double scale = 1.0 / (static_cast<double>(steps) * step_eps);
  for (const auto& [row, weight] : state.weights) {
    sel.indices.push_back(row);
    sel.scales.push_back(std::sqrt(weight * scale));
  }
  sel.nnz = static_cast<Eigen::Index>(sel.indices.size());
  sel.steps = steps;
  return sel;
}

RowSelection bss_amm(const Matrix& a, const Matrix& b, double k, double eps, const BssObserver& observer) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "bss_amm: inputs must share a row count");
  if (!(eps > 0.0 && eps < 1.0) || !(k > 0.0)) throw Error(ErrorCode::InvalidParams, "bss_amm requires 0 < eps < 1 and k > 0");
  auto normalized = [k](const Matrix& x) {
    const double scale = std::sqrt(2.0) * std::max(spectral_norm(x), frobenius_norm(x) / std::sqrt(k));
    return scale > 0.0 ? Matrix(x / scale) : Matrix(Matrix::Zero(x.rows(), x.cols()));
  };
  return bss_select(hconcat(normalized(a), normalized(b)), k, eps / 2.0, observer);
}

Vector importance_probabilities(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "importance sampling: inputs must share a row count");
  require_finite(a);
  require_finite(b);
  Vector w = a.rowwise().squaredNorm() + b.rowwise().squaredNorm();
  const double total = w.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroMatrix, "importance sampling: both inputs are zero");
  return w / total;
}

RowSelection importance_sample(const Matrix& a, const Matrix& b, Eigen::Index m, std::uint64_t seed) {
  if (m < 1) throw Error(ErrorCode::InvalidParams, "importance sampling needs m >= 1");
  const Vector p = importance_probabilities(a, b);

  std::vector<double> cumulative(static_cast<std::size_t>(p.size()));
  double run = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) cumulative[static_cast<std::size_t>(i)] = run += p(i);

  std::map<Eigen::Index, double> weights;
  Rng rng(seed);
  for (Eigen::Index draw = 0; draw < m; ++draw) {
    const double u = rng.uniform() * run;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    auto i = static_cast<Eigen::Index>(it - cumulative.begin());
    i = std::min(i, p.size() - 1);
    weights[i] += 1.0 / (static_cast<double>(m) * p(i));
  }

  RowSelection sel;
  for (const auto& [row, weight] : weights) {
    sel.indices.push_back(row);
    sel.scales.push_back(std::sqrt(weight));
  }
  sel.nnz = static_cast<Eigen::Index>(sel.indices.size());
  return sel;
}

}  // namespace sramm
