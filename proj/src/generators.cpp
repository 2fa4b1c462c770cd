#include "sramm/generators.hpp"

#include "sramm/error.hpp"
#include "sramm/rng.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace sramm {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  }
  return g;
}

Matrix random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  if (cols > rows) throw Error(ErrorCode::InvalidParams, "orthonormal factor needs cols <= rows");
  const Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(rows, cols, seed));
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

Matrix gen_decay(Eigen::Index n, Eigen::Index d, const std::vector<double>& spectrum, std::uint64_t seed) {
  const auto r = static_cast<Eigen::Index>(spectrum.size());
  if (n < 1 || d < 1 || r > std::min(n, d)) {
    throw Error(ErrorCode::InvalidParams, "gen_decay: spectrum length must not exceed min(n, d)");
  }
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (!(spectrum[i] > 0.0) || !std::isfinite(spectrum[i]) || (i > 0 && spectrum[i] > spectrum[i - 1])) {
      throw Error(ErrorCode::InvalidParams, "gen_decay: spectrum must be positive and non-increasing");
    }
  }
  if (r == 0) return Matrix::Zero(n, d);
  const Matrix u = random_orthonormal(n, r, derive_seed(seed, 0));
  const Matrix v = random_orthonormal(d, r, derive_seed(seed, 1));
  const Vector s = Eigen::Map<const Vector>(spectrum.data(), r);
  return u * s.asDiagonal() * v.transpose();
}

Matrix gen_lowrank_plus_noise(Eigen::Index n, Eigen::Index d, Eigen::Index r, double noise_scale, std::uint64_t seed) {
  if (n < 1 || d < 1 || r < 0 || r > std::min(n, d) || !(noise_scale >= 0.0)) {
    throw Error(ErrorCode::InvalidParams, "gen_lowrank_plus_noise: need 0 <= r <= min(n, d) and noise_scale >= 0");
  }
  Matrix a = gen_decay(n, d, std::vector<double>(static_cast<std::size_t>(r), 1.0), derive_seed(seed, 0));
  if (noise_scale > 0.0) {
    // A Gaussian n x d matrix has spectral norm close to sqrt(n) + sqrt(d).
    const double normalizer = std::sqrt(static_cast<double>(n)) + std::sqrt(static_cast<double>(d));
    a += (noise_scale / normalizer) * gaussian_matrix(n, d, derive_seed(seed, 1));
  }
  return a;
}

namespace {

double parse_number(std::string_view text, std::string_view descriptor) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::InvalidParams, "bad spectrum descriptor '" + std::string(descriptor) + "'");
  }
  return value;
}

}  // namespace

std::vector<double> parse_spectrum(std::string_view descriptor, Eigen::Index length) {
  const auto colon = descriptor.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::InvalidParams, "spectrum descriptor '" + std::string(descriptor) + "' lacks a kind prefix");
  }
  const std::string_view kind = descriptor.substr(0, colon);
  const std::string_view arg = descriptor.substr(colon + 1);
  std::vector<double> out;

  if (kind == "geom") {
    const double q = parse_number(arg, descriptor);
    for (Eigen::Index i = 0; i < length; ++i) out.push_back(std::pow(q, static_cast<double>(i)));
  } else if (kind == "poly") {
    const double p = parse_number(arg, descriptor);
    for (Eigen::Index i = 0; i < length; ++i) out.push_back(std::pow(static_cast<double>(i + 1), -p));
  } else if (kind == "flat") {
    const double r = parse_number(arg, descriptor);
    if (r < 0 || r != std::floor(r)) throw Error(ErrorCode::InvalidParams, "flat spectrum needs a whole count");
    out.assign(static_cast<std::size_t>(r), 1.0);
  } else if (kind == "list") {
    std::size_t start = 0;
    while (start <= arg.size()) {
      const auto comma = arg.find(',', start);
      const auto end = comma == std::string_view::npos ? arg.size() : comma;
      out.push_back(parse_number(arg.substr(start, end - start), descriptor));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else {
    throw Error(ErrorCode::InvalidParams, "unknown spectrum kind '" + std::string(kind) + "'");
  }
  return out;
}

}  // namespace sramm
