#include "sramm/amm.hpp"
#include "sramm/error.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace sramm {

namespace {

// Columns of u whose squared singular value is at least `threshold`, plus the
// first `top` columns; sigma is non-increasing so both are leading blocks.
Eigen::Index leading_count(const Vector& sigma, double threshold, Eigen::Index top) {
  Eigen::Index count = 0;
  while (count < sigma.size() && sigma(count) * sigma(count) >= threshold) ++count;
  return std::max(count, std::min(top, sigma.size()));
}

Matrix span_basis(const Matrix& ua, Eigen::Index ca, const Matrix& ub, Eigen::Index cb) {
  return orthonormal_basis(hconcat(ua.leftCols(ca), ub.leftCols(cb)));
}

}  // namespace

ConditionReport verify_deterministic_conditions(const Sketch& sk, const Matrix& a_in, const Matrix& b_in,
                                                Eigen::Index k, double eps, double c_const, double cprime_const) {
  if (a_in.rows() != b_in.rows()) throw Error(ErrorCode::ShapeMismatch, "verify_deterministic_conditions: row mismatch");
  if (k < 1 || !(eps > 0.0) || !(c_const > 0.0) || !(cprime_const > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "verify_deterministic_conditions: need k >= 1, eps > 0, C, C' > 0");
  }
  const double kd = static_cast<double>(k);

  auto normalized = [&](const Matrix& x, const char* name) {
    const double scale = std::max(spectral_norm(x), frobenius_norm(x) / std::sqrt(kd));
    if (scale == 0.0) throw Error(ErrorCode::ZeroMatrix, std::string("verify_deterministic_conditions: ") + name + " is zero");
    return Matrix(x / scale);
  };
  const Matrix a = normalized(a_in, "A");
  const Matrix b = normalized(b_in, "B");
  const SvdFactorization fa = svd(a);
  const SvdFactorization fb = svd(b);

  ConditionReport rep;
  const double tail_cut = eps / cprime_const;
  const double embed_cut = eps / c_const;

  // Minimal w with sigma_{w+1} <= eps / C'.
  auto minimal_w = [&](const Vector& s) {
    Eigen::Index w = 0;
    while (w < s.size() && s(w) > tail_cut) ++w;
    return w;
  };
  rep.w = minimal_w(fa.sigma);
  rep.w_prime = minimal_w(fb.sigma);

  const Truncation ta = truncate(fa, rep.w);
  const Truncation tb = truncate(fb, rep.w_prime);
  TailCheck& tail = rep.tail_norm_checks;
  tail.tail_a = rep.w < fa.rank() ? fa.sigma(rep.w) : 0.0;
  tail.tail_b = rep.w_prime < fb.rank() ? fb.sigma(rep.w_prime) : 0.0;
  tail.sketched_tail_a = spectral_norm(apply(sk, ta.tail));
  tail.sketched_tail_b = spectral_norm(apply(sk, tb.tail));
  tail.threshold = embed_cut;
  tail.pass = tail.sketched_tail_a <= embed_cut && tail.sketched_tail_b <= embed_cut;

  const Vector sig_a = fa.sigma.head(rep.w);
  const Vector sig_b = fb.sigma.head(rep.w_prime);

  // Levels i = 0 .. floor(log2(1/eps^2)); at least level 0.
  const int levels = std::max(0, static_cast<int>(std::floor(std::log2(1.0 / (eps * eps))))) + 1;
  std::vector<Matrix> bases;
  bases.reserve(static_cast<std::size_t>(levels));
  for (int i = 0; i < levels; ++i) {
    const double threshold = std::ldexp(1.0, -i);
    const Eigen::Index ca = leading_count(sig_a, threshold, k);
    const Eigen::Index cb = leading_count(sig_b, threshold, k);
    bases.push_back(span_basis(fa.u, ca, fb.u, cb));
    rep.level_dimensions.push_back(bases.back().cols());
    rep.sum_bound += std::ldexp(static_cast<double>(bases.back().cols()), -i);
  }
  rep.sum_pass = rep.sum_bound <= 8.0 * kd;

  bool subspaces_pass = true;
  rep.low_rank_branch = rep.w + rep.w_prime <= k;
  if (rep.low_rank_branch) {
    const Matrix basis = span_basis(fa.u, rep.w, fb.u, rep.w_prime);
    SubspaceCheck check;
    check.level = 0;
    check.dimension = basis.cols();
    check.required = embed_cut;
    check.distortion = embed_distortion(sk, basis);
    check.pass = check.distortion <= check.required;
    subspaces_pass = check.pass;
    rep.subspace_checks.push_back(check);
  } else {
    // Group consecutive levels by s_i rounded up to a power of two; each level
    // is checked through the largest level of its group (the spans are nested).
    int start = 0;
    while (start < levels) {
      const auto rounded = [&](int i) {
        return std::bit_ceil(static_cast<std::uint64_t>(rep.level_dimensions[static_cast<std::size_t>(i)]));
      };
      int last = start;
      while (last + 1 < levels && rounded(last + 1) == rounded(start)) ++last;
      const double v = static_cast<double>(rounded(start));
      const double eps_group = std::min(0.5, eps * std::sqrt(v / kd));
      const double distortion = embed_distortion(sk, bases[static_cast<std::size_t>(last)]);
      for (int i = start; i <= last; ++i) {
        SubspaceCheck check;
        check.level = i;
        check.dimension = rep.level_dimensions[static_cast<std::size_t>(i)];
        check.required = eps_group / c_const;
        check.distortion = distortion;
        check.pass = distortion <= check.required;
        subspaces_pass = subspaces_pass && check.pass;
        rep.subspace_checks.push_back(check);
      }
      start = last + 1;
    }
  }

  rep.all_pass = subspaces_pass && tail.pass && rep.sum_pass;
  return rep;
}

}  // namespace sramm
