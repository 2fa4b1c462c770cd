#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sramm/amm.hpp"
#include "sramm/error.hpp"
#include "sramm/experiments.hpp"
#include "sramm/generators.hpp"
#include "sramm/rng.hpp"

#include <cmath>

using namespace sramm;

namespace {

Matrix decay_pair_member(std::uint64_t seed) {
  return gen_decay(128, 16, parse_spectrum("geom:0.7071067811865476", 16), seed);
}

}  // namespace

TEST_CASE("bound collapses in the balanced case") {
  const double eps = 0.3;
  for (double k : {1.0, 4.0, 9.0}) {
    CHECK(amm_bound_from_norms(1.0, std::sqrt(k), 1.0, std::sqrt(k), k, eps) == doctest::Approx(2 * eps));
  }
  const Matrix q = random_orthonormal(20, 5, 3);
  CHECK(amm_bound(q, q, 5, eps) == doctest::Approx(2 * eps));
  CHECK(amm_bound(q, 2 * q, 1e12, eps) == doctest::Approx(eps * 2.0).epsilon(1e-9));
}

TEST_CASE("bound is monotone in k and consistent with the unweighted form") {
  const Matrix a = decay_pair_member(1);
  const Matrix b = decay_pair_member(2);
  const double na = spectral_norm(a), nb = spectral_norm(b);
  const double fa = frobenius_norm(a), fb = frobenius_norm(b);
  double previous = std::numeric_limits<double>::infinity();
  for (double k = 1; k <= 64; k *= 2) {
    const double bound = amm_bound(a, b, k, 0.2);
    CHECK(bound < previous);
    previous = bound;
    const double eps_prime = 0.2 * std::sqrt((na * na + fa * fa / k) * (nb * nb + fb * fb / k)) / (na * nb);
    CHECK(std::abs(bound - eps_prime * na * nb) <= 1e-12 * bound);
  }
  const double k = std::ceil(stable_rank(a) + stable_rank(b));
  CHECK(amm_bound(a, b, k, 0.2) <= 2 * 0.2 * na * nb * (1 + 1e-12));
}

TEST_CASE("bound rejects shape mismatch") {
  try {
    amm_bound(Matrix::Ones(3, 2), Matrix::Ones(4, 2), 1, 0.1);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("amm error against dense recomputation") {
  const Matrix a = gaussian_matrix(4, 2, 10);
  const Matrix b = gaussian_matrix(4, 2, 11);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Sketch sk = build(gaussian_spec(3, 4, seed));
    const Matrix pi = sk.dense;
    const Matrix diff = (pi * a).transpose() * (pi * b) - a.transpose() * b;
    const Eigen::JacobiSVD<Matrix> jsvd(diff);
    CHECK(amm_error(a, b, sk) == doctest::Approx(jsvd.singularValues()(0)).epsilon(1e-12));
  }
  const Sketch id = build(identity_spec(4));
  CHECK(amm_error(a, b, id) <= 1e-14);
  CHECK(amm_error(Matrix::Zero(4, 2), b, build(sign_spec(2, 4, 1))) == 0.0);
  CHECK_THROWS_AS(amm_error(a, Matrix::Zero(5, 2), id), Error);
}

TEST_CASE("check_kamm trivial cases") {
  const Matrix a = decay_pair_member(3);
  const Sketch id = build(identity_spec(a.rows()));
  const AmmReport same = check_kamm(a, a, id, 4, 0.1);
  CHECK(same.pass);
  CHECK(same.error <= 1e-12);
  const AmmReport zero = check_kamm(a, Matrix::Zero(a.rows(), 3), build(gaussian_spec(10, a.rows(), 4)), 4, 0.1);
  CHECK(zero.pass);
  CHECK(zero.error == 0.0);
  CHECK(zero.stable_rank_b == 0.0);
}

TEST_CASE("embedding distortion") {
  const Matrix u = random_orthonormal(32, 3, 5);
  CHECK(embed_distortion(build(identity_spec(32)), u) <= 1e-12);
  Vector e = Vector::Zero(32);
  e(7) = 1.0;
  const Sketch sk = build(sign_spec(8, 32, 6));
  CHECK(embed_distortion(sk, e) == doctest::Approx(std::abs(apply(sk, e).squaredNorm() - 1.0)));
  CHECK_THROWS_AS(embed_distortion(sk, 2 * u), Error);
}

TEST_CASE("amm error is controlled by the embedding of [A | B]") {
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Matrix a = gaussian_matrix(40, 3, 3 * seed);
    const Matrix b = gaussian_matrix(40, 2, 3 * seed + 1);
    const Sketch sk = build(gaussian_spec(12 + static_cast<Eigen::Index>(seed % 20), 40, 3 * seed + 2));
    const Matrix u = orthonormal_basis(hconcat(a, b));
    if (amm_error(a, b, sk) > embed_distortion(sk, u) * spectral_norm(a) * spectral_norm(b) + 1e-8) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("moment estimates") {
  const Matrix u = random_orthonormal(64, 4, 7);
  const MomentEstimate id = estimate_ose_moment(identity_spec(64), u, 2, 5, 1);
  CHECK(id.mean <= 1e-20);

  // m = 64 (d + ln(1/delta)) / eps^2 rows for d = 4.
  const double eps = 0.5, delta = 0.05;
  const int ell = 4;
  const auto m = static_cast<Eigen::Index>(std::ceil(64 * (4 + std::log(1 / delta)) / (eps * eps)));
  const Matrix w = random_orthonormal(2048, 4, 8);
  const MomentEstimate g = estimate_ose_moment(gaussian_spec(m, 2048, 0), w, ell, 30, 9);
  CHECK(g.mean + 3 * g.std_error <= std::pow(eps, ell) * delta);
}

TEST_CASE("failure rate estimator") {
  const Matrix a = decay_pair_member(11);
  const Matrix b = decay_pair_member(12);
  const FailureEstimate id = estimate_failure_rate(identity_spec(a.rows()), a, b, 8, 0.25, 5, 1);
  CHECK(id.rate == 0.0);
  const FailureEstimate one = estimate_failure_rate(gaussian_spec(4, a.rows(), 0), a, b, 8, 0.25, 1, 2);
  CHECK((one.rate == 0.0 || one.rate == 1.0));

  // Same trials with more threads give identical results.
  const auto spec = gaussian_spec(20, a.rows(), 0);
  const FailureEstimate serial = estimate_failure_rate(spec, a, b, 8, 0.25, 16, 3, 1);
  const FailureEstimate threaded = estimate_failure_rate(spec, a, b, 8, 0.25, 16, 3, 4);
  CHECK(serial.failures == threaded.failures);
  for (std::size_t t = 0; t < serial.reports.size(); ++t) CHECK(serial.reports[t].error == threaded.reports[t].error);
}

TEST_CASE("failure rate is non-increasing in m") {
  const Matrix a = decay_pair_member(13);
  const Matrix b = decay_pair_member(14);
  const int trials = 200;
  double previous_rate = 1.0;
  double previous_se = 0.0;
  for (Eigen::Index m : {8, 24, 72}) {
    const FailureEstimate est = estimate_failure_rate(gaussian_spec(m, a.rows(), 0), a, b, 4, 0.25, trials, 15);
    CHECK(est.rate <= previous_rate + 2 * std::max(est.std_error, previous_se));
    previous_rate = est.rate;
    previous_se = est.std_error;
  }
}

TEST_CASE("planner at a calibrated constant meets the 2 delta threshold") {
  const Matrix a = decay_pair_member(21);
  const Matrix b = decay_pair_member(22);
  const CalibrationResult cal = calibrate(Family::Gaussian, a, b, 4, 0.3, 0.05, 0.05, 400, 23);
  REQUIRE(cal.found);
  const SketchSpec spec = planned_spec(Family::Gaussian, 4, 0.3, 0.05, cal.c, a.rows(), 0);
  const FailureEstimate est = estimate_failure_rate(spec, a, b, 4, 0.3, 200, 24);
  CHECK(est.rate <= 0.1);
}

TEST_CASE("deterministic conditions: low-rank branch") {
  const Matrix u = random_orthonormal(1024, 2, 31);
  const Matrix a = 0.5 * u;
  const ConditionReport rep = verify_deterministic_conditions(build(gaussian_spec(1000, 1024, 32)), a, a, 4, 0.9);
  CHECK(rep.low_rank_branch);
  CHECK(rep.w == 2);
  CHECK(rep.w_prime == 2);
  REQUIRE(rep.subspace_checks.size() == 1);
  CHECK(rep.subspace_checks[0].dimension == 2);
  CHECK(rep.tail_norm_checks.sketched_tail_a == 0.0);
  CHECK(rep.sum_pass);
}

TEST_CASE("deterministic conditions: graded branch invariants") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = gen_decay(256, 32, parse_spectrum("geom:0.8", 32), 40 + seed);
    const Matrix b = gen_decay(256, 32, parse_spectrum("poly:1", 32), 60 + seed);
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(seed % 3);
    const double eps = 0.3;
    const ConditionReport rep = verify_deterministic_conditions(build(gaussian_spec(200, 256, seed)), a, b, k, eps);
    CHECK(rep.sum_bound <= 8.0 * static_cast<double>(k));
    CHECK_FALSE(rep.low_rank_branch);
    CHECK(rep.level_dimensions.size() == static_cast<std::size_t>(std::floor(std::log2(1 / (eps * eps)))) + 1);

    // Minimality of w against the normalized spectrum.
    const double scale = std::max(spectral_norm(a), frobenius_norm(a) / std::sqrt(static_cast<double>(k)));
    const Vector s = singular_values(a) / scale;
    const double cut = eps / kDefaultConditionC;
    CHECK(s(rep.w) <= cut);
    if (rep.w > 0) CHECK(s(rep.w - 1) > cut);
  }
  CHECK_THROWS_AS(verify_deterministic_conditions(build(gaussian_spec(4, 8, 1)), Matrix::Zero(8, 2),
                                                  Matrix::Ones(8, 2), 2, 0.3),
                  Error);
}
