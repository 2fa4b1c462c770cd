#pragma once

#include "sramm/matcore.hpp"
#include "sramm/sketch.hpp"

#include <cstdint>
#include <vector>

namespace sramm {

/// One realization measured against the stable-rank AMM bound
///   eps * sqrt((|A|^2 + |A|_F^2/k) (|B|^2 + |B|_F^2/k)).
struct AmmReport {
  double error = 0.0;
  double bound = 0.0;
  double k = 1.0;
  double eps = 0.0;
  double norm_a = 0.0;
  double fro_a = 0.0;
  double norm_b = 0.0;
  double fro_b = 0.0;
  /// Zero for a zero input.
  double stable_rank_a = 0.0;
  double stable_rank_b = 0.0;
  bool pass = true;
};

double amm_bound(const Matrix& a, const Matrix& b, double k, double eps);

/// Same bound from precomputed norms.
double amm_bound_from_norms(double norm_a, double fro_a, double norm_b, double fro_b, double k, double eps);

/// |(Pi A)^T (Pi B) - A^T B| in spectral norm.
double amm_error(const Matrix& a, const Matrix& b, const Sketch& sk);

/// Same, given already-sketched inputs.
double amm_error_sketched(const Matrix& a, const Matrix& b, const Matrix& pa, const Matrix& pb);

AmmReport check_kamm(const Matrix& a, const Matrix& b, const Sketch& sk, double k, double eps);

/// |(Pi U)^T (Pi U) - I| for orthonormal U.
double embed_distortion(const Sketch& sk, const Matrix& u);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> distortions;
};

/// Monte-Carlo E |(Pi U)^T (Pi U) - I|^ell; trial t draws Pi from with_seed(spec, derive_seed(seed, t)).
MomentEstimate estimate_ose_moment(const SketchSpec& spec, const Matrix& u, int ell, int trials, std::uint64_t seed,
                                   unsigned threads = 1);

struct FailureEstimate {
  double rate = 0.0;
  double std_error = 0.0;
  int failures = 0;
  int trials = 0;
  std::vector<AmmReport> reports;
};

FailureEstimate estimate_failure_rate(const SketchSpec& spec, const Matrix& a, const Matrix& b, double k, double eps,
                                      int trials, std::uint64_t seed, unsigned threads = 1);

struct SubspaceCheck {
  int level = 0;
  Eigen::Index dimension = 0;
  double required = 0.0;
  double distortion = 0.0;
  bool pass = false;
};

struct TailCheck {
  double tail_a = 0.0;           // |A_wbar| before sketching
  double tail_b = 0.0;
  double sketched_tail_a = 0.0;  // |Pi A_wbar|
  double sketched_tail_b = 0.0;
  double threshold = 0.0;        // eps / C
  bool pass = false;
};

/// Sufficient deterministic conditions for (k, eps)-AMM of a single realization.
struct ConditionReport {
  Eigen::Index w = 0;
  Eigen::Index w_prime = 0;
  /// True when w + w' <= k and a single embedding of span(A_w, B_w') is checked.
  bool low_rank_branch = false;
  std::vector<SubspaceCheck> subspace_checks;
  TailCheck tail_norm_checks;
  /// s_i for levels i = 0 .. floor(log2(1/eps^2)).
  std::vector<Eigen::Index> level_dimensions;
  double sum_bound = 0.0;
  bool sum_pass = false;
  bool all_pass = false;
};

inline constexpr double kDefaultConditionC = 12.0;

ConditionReport verify_deterministic_conditions(const Sketch& sk, const Matrix& a, const Matrix& b, Eigen::Index k,
                                                double eps, double c_const = kDefaultConditionC,
                                                double cprime_const = kDefaultConditionC);

}  // namespace sramm
