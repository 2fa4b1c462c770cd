#include "sramm/sketch.hpp"

#include "sramm/error.hpp"
#include "sramm/rng.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace sramm {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::Sign: return "sign";
    case Family::Srht: return "srht";
    case Family::SparseEmbedding: return "sparse";
    case Family::Composed: return "composed";
    case Family::Identity: return "identity";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
  for (Family f : {Family::Gaussian, Family::Sign, Family::Srht, Family::SparseEmbedding, Family::Composed,
                   Family::Identity}) {
    if (name == to_string(f)) return f;
  }
  return std::nullopt;
}

SketchSpec gaussian_spec(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  return {Family::Gaussian, m, n, 0, {}, seed};
}

SketchSpec sign_spec(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  return {Family::Sign, m, n, 0, {}, seed};
}

SketchSpec srht_spec(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  return {Family::Srht, m, n, 0, {}, seed};
}

SketchSpec sparse_spec(Eigen::Index m, Eigen::Index n, Eigen::Index s, std::uint64_t seed) {
  return {Family::SparseEmbedding, m, n, s, {}, seed};
}

SketchSpec identity_spec(Eigen::Index n) { return {Family::Identity, n, n, 0, {}, 0}; }

void validate(const SketchSpec& spec) {
  if (spec.family == Family::Composed) {
    if (spec.inner.empty()) throw Error(ErrorCode::InvalidParams, "composed sketch without factors");
    for (const auto& f : spec.inner) validate(f);
    for (std::size_t i = 0; i + 1 < spec.inner.size(); ++i) {
      if (spec.inner[i].n != spec.inner[i + 1].m) {
        throw Error(ErrorCode::ShapeMismatch, "composed sketch: factor " + std::to_string(i) + " expects " +
                                                  std::to_string(spec.inner[i].n) + " rows but factor " +
                                                  std::to_string(i + 1) + " produces " +
                                                  std::to_string(spec.inner[i + 1].m));
      }
    }
    if (spec.m != spec.inner.front().m || spec.n != spec.inner.back().n) {
      throw Error(ErrorCode::ShapeMismatch, "composed sketch: outer dimensions disagree with factors");
    }
    return;
  }
  // CountSketch is a per-column hash, so it stays well defined with m > n.
  const bool bounded = spec.family != Family::SparseEmbedding;
  if (spec.m < 1 || spec.n < 1 || (bounded && spec.m > spec.n)) {
    throw Error(ErrorCode::InvalidParams, "sketch rows must satisfy 1 <= m <= n (m=" + std::to_string(spec.m) +
                                              ", n=" + std::to_string(spec.n) + ")");
  }
  if (spec.family == Family::Identity && spec.m != spec.n) {
    throw Error(ErrorCode::InvalidParams, "identity sketch requires m == n");
  }
  if (spec.family == Family::SparseEmbedding) {
    if (spec.s < 1 || spec.s > spec.m || spec.m % spec.s != 0) {
      throw Error(ErrorCode::InvalidParams, "sparse embedding requires 1 <= s <= m and s | m");
    }
  }
}

SketchSpec with_seed(const SketchSpec& spec, std::uint64_t seed) {
  SketchSpec out = spec;
  out.seed = seed;
  for (std::size_t i = 0; i < out.inner.size(); ++i) out.inner[i] = with_seed(out.inner[i], derive_seed(seed, i));
  return out;
}

Eigen::Index next_power_of_two(Eigen::Index n) {
  if (n <= 1) return 1;
  return static_cast<Eigen::Index>(std::bit_ceil(static_cast<std::uint64_t>(n)));
}

RowPlan plan_rows(Family family, Eigen::Index k, double eps, double delta, double c) {
  if (!(eps > 0.0 && eps <= 0.5) || !(delta > 0.0 && delta < 0.5) || k < 1 || !(c > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "planner requires 0<eps<=1/2, 0<delta<1/2, k>=1, c>0");
  }
  const double kd = static_cast<double>(k);
  const double eps2 = eps * eps;
  auto up = [](double x) { return static_cast<Eigen::Index>(std::ceil(x)); };

  switch (family) {
    case Family::Gaussian:
    case Family::Sign:
      return {up(c * (kd + std::log(1.0 / delta)) / eps2), 0};
    case Family::Srht:
      return {up(c * (kd + std::log(1.0 / (eps * delta)) * std::log(kd / delta)) / eps2), 0};
    case Family::SparseEmbedding: {
      const Eigen::Index s = std::max<Eigen::Index>(1, up(c * std::log(kd / delta) / eps));
      Eigen::Index m = std::max<Eigen::Index>(s, up(c * kd * std::log(kd / delta) / eps2));
      m = ((m + s - 1) / s) * s;
      return {m, s};
    }
    case Family::Composed:
    case Family::Identity:
      break;
  }
  throw Error(ErrorCode::InvalidParams, "no row planner for family " + std::string(to_string(family)));
}

void fwht_inplace(std::span<double> v) {
  const std::size_t n = v.size();
  if (n == 0 || !std::has_single_bit(n)) {
    throw Error(ErrorCode::InvalidLength, "fwht length must be a power of two (got " + std::to_string(n) + ")");
  }
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double x = v[j];
        const double y = v[j + h];
        v[j] = x + y;
        v[j + h] = x - y;
      }
    }
  }
}

std::vector<double> fwht(std::vector<double> v) {
  fwht_inplace(v);
  return v;
}

Sketch build(const SketchSpec& spec) {
  validate(spec);
  Sketch sk;
  sk.spec = spec;
  const Eigen::Index m = spec.m;
  const Eigen::Index n = spec.n;

  switch (spec.family) {
    case Family::Gaussian: {
      const double scale = 1.0 / std::sqrt(static_cast<double>(m));
      sk.dense.resize(m, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(j)));
        for (Eigen::Index i = 0; i < m; ++i) sk.dense(i, j) = scale * rng.normal();
      }
      break;
    }
    case Family::Sign: {
      const double scale = 1.0 / std::sqrt(static_cast<double>(m));
      sk.dense.resize(m, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(j)));
        for (Eigen::Index i = 0; i < m; ++i) sk.dense(i, j) = scale * rng.sign();
      }
      break;
    }
    case Family::Srht: {
      const Eigen::Index padded = next_power_of_two(n);
      Rng sign_rng(derive_seed(spec.seed, 0));
      sk.signs.resize(static_cast<std::size_t>(padded));
      for (auto& s : sk.signs) s = sign_rng.sign();
      Rng row_rng(derive_seed(spec.seed, 1));
      sk.sampled_rows.resize(static_cast<std::size_t>(m));
      for (auto& r : sk.sampled_rows) r = static_cast<Eigen::Index>(row_rng.uniform_index(padded));
      break;
    }
    case Family::SparseEmbedding: {
      const Eigen::Index s = spec.s;
      const Eigen::Index block = m / s;
      const double value = 1.0 / std::sqrt(static_cast<double>(s));
      sk.sparse_rows.resize(static_cast<std::size_t>(n * s));
      sk.sparse_values.resize(static_cast<std::size_t>(n * s));
      for (Eigen::Index j = 0; j < n; ++j) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(j)));
        for (Eigen::Index b = 0; b < s; ++b) {
          const auto slot = static_cast<std::size_t>(j * s + b);
          sk.sparse_rows[slot] = b * block + static_cast<Eigen::Index>(rng.uniform_index(block));
          sk.sparse_values[slot] = value * rng.sign();
        }
      }
      break;
    }
    case Family::Composed:
      sk.factors.reserve(spec.inner.size());
      for (const auto& f : spec.inner) sk.factors.push_back(build(f));
      break;
    case Family::Identity:
      break;
  }
  return sk;
}

Matrix apply(const Sketch& sk, const Matrix& a) {
  if (a.rows() != sk.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "sketch expects " + std::to_string(sk.cols()) + " rows, input has " +
                                              std::to_string(a.rows()));
  }
  const Eigen::Index m = sk.rows();
  const Eigen::Index n = sk.cols();

  switch (sk.spec.family) {
    case Family::Gaussian:
    case Family::Sign:
      return sk.dense * a;
    case Family::Srht: {
      const auto padded = static_cast<Eigen::Index>(sk.signs.size());
      const double scale = 1.0 / std::sqrt(static_cast<double>(m));
      Matrix out(m, a.cols());
      std::vector<double> col(static_cast<std::size_t>(padded));
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        for (Eigen::Index i = 0; i < padded; ++i) {
          col[static_cast<std::size_t>(i)] = i < n ? sk.signs[static_cast<std::size_t>(i)] * a(i, c) : 0.0;
        }
        fwht_inplace(col);
        for (Eigen::Index r = 0; r < m; ++r) {
          out(r, c) = scale * col[static_cast<std::size_t>(sk.sampled_rows[static_cast<std::size_t>(r)])];
        }
      }
      return out;
    }
    case Family::SparseEmbedding: {
      const Eigen::Index s = sk.spec.s;
      Matrix out = Matrix::Zero(m, a.cols());
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index b = 0; b < s; ++b) {
          const auto slot = static_cast<std::size_t>(j * s + b);
          out.row(sk.sparse_rows[slot]) += sk.sparse_values[slot] * a.row(j);
        }
      }
      return out;
    }
    case Family::Composed: {
      Matrix out = a;
      for (auto it = sk.factors.rbegin(); it != sk.factors.rend(); ++it) out = apply(*it, out);
      return out;
    }
    case Family::Identity:
      return a;
  }
  throw Error(ErrorCode::InvalidParams, "unknown sketch family");
}

Matrix apply_transpose(const Sketch& sk, const Matrix& y) {
  if (y.rows() != sk.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "transposed sketch expects " + std::to_string(sk.rows()) +
                                              " rows, input has " + std::to_string(y.rows()));
  }
  const Eigen::Index m = sk.rows();
  const Eigen::Index n = sk.cols();

  switch (sk.spec.family) {
    case Family::Gaussian:
    case Family::Sign:
      return sk.dense.transpose() * y;
    case Family::Srht: {
      // H is symmetric, so Pi^T = D H S^T / sqrt(m).
      const auto padded = static_cast<Eigen::Index>(sk.signs.size());
      const double scale = 1.0 / std::sqrt(static_cast<double>(m));
      Matrix out(n, y.cols());
      std::vector<double> col(static_cast<std::size_t>(padded));
      for (Eigen::Index c = 0; c < y.cols(); ++c) {
        std::fill(col.begin(), col.end(), 0.0);
        for (Eigen::Index r = 0; r < m; ++r) col[static_cast<std::size_t>(sk.sampled_rows[static_cast<std::size_t>(r)])] += y(r, c);
        fwht_inplace(col);
        for (Eigen::Index i = 0; i < n; ++i) out(i, c) = scale * sk.signs[static_cast<std::size_t>(i)] * col[static_cast<std::size_t>(i)];
      }
      return out;
    }
    case Family::SparseEmbedding: {
      const Eigen::Index s = sk.spec.s;
      Matrix out = Matrix::Zero(n, y.cols());
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index b = 0; b < s; ++b) {
          const auto slot = static_cast<std::size_t>(j * s + b);
          out.row(j) += sk.sparse_values[slot] * y.row(sk.sparse_rows[slot]);
        }
      }
      return out;
    }
    case Family::Composed: {
      Matrix out = y;
      for (const auto& f : sk.factors) out = apply_transpose(f, out);
      return out;
    }
    case Family::Identity:
      return y;
  }
  throw Error(ErrorCode::InvalidParams, "unknown sketch family");
}

SketchSpec compose(const std::vector<SketchSpec>& specs) {
  if (specs.empty()) throw Error(ErrorCode::InvalidParams, "compose needs at least one spec");
  SketchSpec out;
  out.family = Family::Composed;
  out.m = specs.front().m;
  out.n = specs.back().n;
  out.inner = specs;
  out.seed = specs.front().seed;
  validate(out);
  return out;
}

std::string describe(const SketchSpec& spec) {
  std::ostringstream os;
  if (spec.family == Family::Composed) {
    for (std::size_t i = 0; i < spec.inner.size(); ++i) os << (i ? " * " : "") << describe(spec.inner[i]);
    return os.str();
  }
  os << to_string(spec.family) << "(m=" << spec.m << ",n=" << spec.n;
  if (spec.family == Family::SparseEmbedding) os << ",s=" << spec.s;
  os << ")";
  return os.str();
}

}  // namespace sramm
