#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sramm/amm.hpp"
#include "sramm/bss.hpp"
#include "sramm/error.hpp"
#include "sramm/generators.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace sramm;

namespace {

Matrix normalized(Matrix a, double k) {
  const double scale = std::max(spectral_norm(a), frobenius_norm(a) / std::sqrt(k));
  return a / scale;
}

double selection_error(const RowSelection& sel, const Matrix& a) {
  const Matrix sa = apply_selection(sel, a);
  return spectral_norm(sa.transpose() * sa - a.transpose() * a);
}

double min_eigenvalue(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

TEST_CASE("initial state") {
  const BssState s = bss_initial_state(3, 2.0, 0.1);
  CHECK(s.xu.isApprox(2.0 * Matrix::Identity(3, 3)));
  CHECK(s.xl.isApprox(-2.0 * Matrix::Identity(3, 3)));
  CHECK(s.z.norm() == 0.0);
  CHECK(s.du == doctest::Approx(0.1 + 2 * 0.01));
  CHECK(s.dl == doctest::Approx(0.1 - 2 * 0.01));
}

TEST_CASE("step budget and row cap") {
  CHECK(bss_step_budget(4, 0.6) == 100);
  CHECK(bss_step_budget(2, 0.3) == 200);
  CHECK(bss_step_budget(1.5, 0.3) == 150);
}

TEST_CASE("single row input") {
  Matrix a(1, 4);
  a << 0.5, -0.5, 0.5, 0.1;
  const RowSelection sel = bss_select(a, 1.0, 0.3);
  REQUIRE(sel.nnz == 1);
  CHECK(sel.indices[0] == 0);
  CHECK(selection_error(sel, a) <= 0.3);
}

TEST_CASE("precondition violations") {
  Matrix a = Matrix::Zero(3, 2);
  a(0, 0) = std::sqrt(2.0);
  try {
    bss_select(a, 4.0, 0.3);
    FAIL("expected NormTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NormTooLarge);
  }
  CHECK_THROWS_AS(bss_select(Matrix::Identity(4, 4), 2.0, 0.3), Error);
  CHECK(bss_select(Matrix::Zero(5, 2), 1.0, 0.3).nnz == 0);
}

TEST_CASE("step invariants hold at every step") {
  const double k = 4.0;
  const double eps = 0.45;
  const Matrix a = normalized(gen_decay(96, 10, parse_spectrum("geom:0.8", 10), 5), k);
  const Matrix gram = a.transpose() * a;
  BssState state = bss_initial_state(a.cols(), k, eps / 3.0);
  const Eigen::Index budget = bss_step_budget(k, eps);
  for (Eigen::Index step = 0; step < budget; ++step) {
    const BssStepResult r = bss_step(state, a, gram);
    state = r.state;
    const BssStepInfo& info = r.info;
    CHECK(info.upper_potential <= 1 + 1e-9);
    CHECK(info.lower_potential <= 1 + 1e-9);
    CHECK(info.inv_t_min <= info.inv_t_max);
    CHECK(info.sum_inv_t_min <= info.sum_inv_t_max + 1e-9);
    CHECK(info.t > 0.0);

    // Independent recomputation of the potentials from the new state.
    const Matrix upper = state.xu - state.z;
    const Matrix lower = state.z - state.xl;
    CHECK(min_eigenvalue(upper) > 0.0);
    CHECK(min_eigenvalue(lower) > 0.0);
    CHECK((a * upper.inverse() * a.transpose()).trace() == doctest::Approx(info.upper_potential).epsilon(1e-8));
    CHECK((a * lower.inverse() * a.transpose()).trace() == doctest::Approx(info.lower_potential).epsilon(1e-8));
  }
  CHECK(state.step == budget);
}

TEST_CASE("selection meets the spectral guarantee and row bound") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const double k = seed % 2 == 0 ? 2.0 : 4.0;
    const double eps = seed % 3 == 0 ? 0.3 : 0.6;
    const Matrix a = normalized(gaussian_matrix(64, 6, seed), k);
    const RowSelection sel = bss_select(a, k, eps);
    CHECK(selection_error(sel, a) <= eps);
    CHECK(sel.nnz <= static_cast<Eigen::Index>(std::ceil(9 * k / (eps * eps))));
    CHECK(sel.nnz == static_cast<Eigen::Index>(sel.indices.size()));
  }
}

TEST_CASE("selection is deterministic") {
  const Matrix a = normalized(gaussian_matrix(50, 5, 7), 3.0);
  const RowSelection s1 = bss_select(a, 3.0, 0.5);
  const RowSelection s2 = bss_select(a, 3.0, 0.5);
  CHECK(s1.indices == s2.indices);
  CHECK(s1.scales == s2.scales);
}

TEST_CASE("observer sees every step") {
  const Matrix a = normalized(gaussian_matrix(30, 3, 8), 2.0);
  Eigen::Index calls = 0;
  const RowSelection sel = bss_select(a, 2.0, 0.6, [&](const BssStepInfo& info) {
    ++calls;
    CHECK(info.step == calls);
  });
  CHECK(calls == sel.steps);
}

TEST_CASE("paired selection") {
  const Matrix a = gaussian_matrix(128, 8, 20);
  const Matrix b = gaussian_matrix(128, 8, 21);
  const RowSelection sel = bss_amm(a, b, 4.0, 0.6);
  const Matrix sa = apply_selection(sel, a);
  const Matrix sb = apply_selection(sel, b);
  const double error = spectral_norm(sa.transpose() * sb - a.transpose() * b);
  CHECK(error <= amm_bound(a, b, 4.0, 0.6));
  CHECK(sel.nnz <= 400);

  const RowSelection same = bss_amm(a, a, 4.0, 0.6);
  const Matrix s = apply_selection(same, a);
  CHECK(spectral_norm(s.transpose() * s - a.transpose() * a) <= amm_bound(a, a, 4.0, 0.6));

  const RowSelection zero_b = bss_amm(a, Matrix::Zero(128, 3), 4.0, 0.6);
  CHECK(spectral_norm(apply_selection(zero_b, a).transpose() * Matrix::Zero(zero_b.nnz, 3)) == 0.0);
}

TEST_CASE("importance probabilities") {
  const Matrix e = Matrix::Identity(2, 2);
  const Vector p = importance_probabilities(e, e);
  CHECK(p(0) == doctest::Approx(0.5));
  CHECK(p(1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(importance_probabilities(Matrix::Zero(3, 2), Matrix::Zero(3, 1)), Error);
}

TEST_CASE("importance sampling with a single nonzero row is exact") {
  Matrix a = Matrix::Zero(5, 3);
  a.row(2) << 1, 2, 3;
  Matrix b = Matrix::Zero(5, 2);
  b.row(2) << -1, 4;
  const RowSelection sel = importance_sample(a, b, 7, 3);
  for (auto i : sel.indices) CHECK(i == 2);
  const Matrix est = apply_selection(sel, a).transpose() * apply_selection(sel, b);
  CHECK((est - a.transpose() * b).norm() <= 1e-12);
}

TEST_CASE("importance sampling is unbiased") {
  const Matrix a = gen_decay(20, 3, {1.0, 0.6, 0.2}, 40);
  const Matrix b = gen_decay(20, 2, {1.0, 0.3}, 41);
  const Matrix target = a.transpose() * b;
  const int trials = 10000;
  Matrix sum = Matrix::Zero(3, 2);
  Matrix sum_sq = Matrix::Zero(3, 2);
  for (int t = 0; t < trials; ++t) {
    const RowSelection sel = importance_sample(a, b, 4, static_cast<std::uint64_t>(t));
    const Matrix est = apply_selection(sel, a).transpose() * apply_selection(sel, b);
    sum += est;
    sum_sq += est.cwiseProduct(est);
  }
  const Matrix mean = sum / trials;
  const Matrix var = sum_sq / trials - mean.cwiseProduct(mean);
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    CHECK(std::abs(mean(i) - target(i)) <= 3.0 * std::sqrt(var(i) / trials) + 1e-12);
  }
}

TEST_CASE("importance sampling error shrinks with m") {
  const Matrix a = gen_decay(400, 12, parse_spectrum("geom:0.8", 12), 50);
  const Matrix b = gen_decay(400, 12, parse_spectrum("geom:0.8", 12), 51);
  std::vector<double> mean_errors;
  for (Eigen::Index m : {32, 128, 512}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const RowSelection sel = importance_sample(a, b, m, seed);
      total += spectral_norm(apply_selection(sel, a).transpose() * apply_selection(sel, b) - a.transpose() * b);
    }
    mean_errors.push_back(total / 40);
  }
  // Roughly 1/sqrt(m): each 4x increase in m should about halve the error.
  for (std::size_t i = 1; i < mean_errors.size(); ++i) {
    const double ratio = mean_errors[i - 1] / mean_errors[i];
    CHECK(ratio >= 1.4);
    CHECK(ratio <= 2.8);
  }
}
