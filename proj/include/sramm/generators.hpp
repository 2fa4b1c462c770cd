#pragma once

#include "sramm/matcore.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace sramm {

/// n x cols matrix of i.i.d. N(0, 1); column j from stream derive_seed(seed, j).
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

/// rows x cols matrix with orthonormal columns (thin QR of a Gaussian matrix).
Matrix random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

/// U diag(spectrum) V^T with random orthonormal U, V.
Matrix gen_decay(Eigen::Index n, Eigen::Index d, const std::vector<double>& spectrum, std::uint64_t seed);

/// Rank-r signal (all singular values 1) plus Gaussian noise scaled to spectral norm ~ noise_scale.
Matrix gen_lowrank_plus_noise(Eigen::Index n, Eigen::Index d, Eigen::Index r, double noise_scale, std::uint64_t seed);

/// Spectrum descriptors: "geom:q" (q^i), "poly:p" ((i+1)^-p), "flat:r" (r ones),
/// "list:v1,v2,..." (explicit). Geometric and polynomial spectra have `length` entries.
std::vector<double> parse_spectrum(std::string_view descriptor, Eigen::Index length);

}  // namespace sramm
