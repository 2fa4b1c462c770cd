#pragma once

#include "sramm/matcore.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sramm {

enum class Family {
  Gaussian,
  Sign,
  Srht,
  SparseEmbedding,
  Composed,
  /// Test hook realizing the exact identity (m = n).
  Identity,
};

std::string_view to_string(Family f);
std::optional<Family> parse_family(std::string_view name);

/// Parameters of a sketching distribution. For Composed, `inner` lists the
/// factors outermost first: Pi = inner[0] * inner[1] * ... and the last entry
/// touches the data first.
struct SketchSpec {
  Family family = Family::Gaussian;
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  Eigen::Index s = 0;
  std::vector<SketchSpec> inner;
  std::uint64_t seed = 0;
};

SketchSpec gaussian_spec(Eigen::Index m, Eigen::Index n, std::uint64_t seed);
SketchSpec sign_spec(Eigen::Index m, Eigen::Index n, std::uint64_t seed);
SketchSpec srht_spec(Eigen::Index m, Eigen::Index n, std::uint64_t seed);
SketchSpec sparse_spec(Eigen::Index m, Eigen::Index n, Eigen::Index s, std::uint64_t seed);
SketchSpec identity_spec(Eigen::Index n);

/// Throws InvalidParams or ShapeMismatch when the spec's invariants fail.
void validate(const SketchSpec& spec);

/// Copy of `spec` reseeded; Composed factors get derive_seed(seed, i).
SketchSpec with_seed(const SketchSpec& spec, std::uint64_t seed);

/// Realized sketching operator. Only the members of the spec's family are populated.
struct Sketch {
  SketchSpec spec;
  /// Gaussian / Sign: the explicit m x n matrix.
  Matrix dense;
  /// Srht: sign diagonal of length n' (n padded to a power of two) ...
  std::vector<double> signs;
  /// ... and the m sampled Hadamard rows, drawn with replacement from [0, n').
  std::vector<Eigen::Index> sampled_rows;
  /// SparseEmbedding: for input column j, entries [j*s, (j+1)*s) hold one row per block.
  std::vector<Eigen::Index> sparse_rows;
  std::vector<double> sparse_values;
  /// Composed: realized factors, same order as spec.inner.
  std::vector<Sketch> factors;

  Eigen::Index rows() const { return spec.m; }
  Eigen::Index cols() const { return spec.n; }
};

struct RowPlan {
  Eigen::Index m = 0;
  Eigen::Index s = 0;
};

/// Row count (and sparsity) for (k, eps, delta)-AMM under the family's analysis,
/// with the hidden constant exposed as c.
RowPlan plan_rows(Family family, Eigen::Index k, double eps, double delta, double c = 1.0);

Sketch build(const SketchSpec& spec);

/// Pi * a.
Matrix apply(const Sketch& sk, const Matrix& a);

/// Pi^T * y for y with m rows.
Matrix apply_transpose(const Sketch& sk, const Matrix& y);

/// Unnormalized Walsh-Hadamard transform, H_ij = (-1)^popcount(i & j).
void fwht_inplace(std::span<double> v);
std::vector<double> fwht(std::vector<double> v);

Eigen::Index next_power_of_two(Eigen::Index n);

/// Chains specs outermost first; specs[i].n must equal specs[i+1].m.
SketchSpec compose(const std::vector<SketchSpec>& specs);

std::string describe(const SketchSpec& spec);

}  // namespace sramm
