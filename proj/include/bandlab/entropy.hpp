#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "bandlab/error.hpp"

namespace bandlab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class AtomKind : std::uint32_t {
  real_gaussian = 0,
  complex_gaussian = 1,
  real_uniform = 2,
  smoothed_rademacher = 3,
};

/// Scalar entry law ζ with E ζ = 0 and E|ζ|² = 1.
///
/// smoothed_rademacher draws sqrt(1 - ℓ^{-2C}) ε + ℓ^{-C} g with ε = ±1 and g
/// standard normal; `smoothing_exponent` is C and `smoothing_ell` is the ℓ the
/// smoothing is evaluated at. fill_block binds smoothing_ell to the block size
/// when it is left at 0.
struct AtomLaw {
  AtomKind kind = AtomKind::real_gaussian;
  double smoothing_exponent = 1.0;
  int smoothing_ell = 0;

  [[nodiscard]] bool is_real() const { return kind != AtomKind::complex_gaussian; }

  [[nodiscard]] AtomLaw at_block_size(int ell) const {
    AtomLaw bound = *this;
    if (bound.smoothing_ell == 0) bound.smoothing_ell = ell;
    return bound;
  }

  void validate() const {
    if (kind == AtomKind::smoothed_rademacher) {
      if (!(smoothing_exponent >= 0.0) || !std::isfinite(smoothing_exponent))
        throw InvalidArgument("smoothing exponent must be a nonnegative real");
      if (smoothing_ell < 0) throw InvalidArgument("smoothing_ell must be nonnegative");
    }
  }

  friend bool operator==(const AtomLaw&, const AtomLaw&) = default;
};

inline std::string_view to_string(AtomKind kind) {
  switch (kind) {
    case AtomKind::real_gaussian: return "real-gaussian";
    case AtomKind::complex_gaussian: return "complex-gaussian";
    case AtomKind::real_uniform: return "real-uniform";
    case AtomKind::smoothed_rademacher: return "smoothed-rademacher";
  }
  return "unknown";
}

inline AtomKind parse_atom_kind(std::string_view name) {
  if (name == "real-gaussian") return AtomKind::real_gaussian;
  if (name == "complex-gaussian") return AtomKind::complex_gaussian;
  if (name == "real-uniform") return AtomKind::real_uniform;
  if (name == "smoothed-rademacher") return AtomKind::smoothed_rademacher;
  throw InvalidArgument("unknown atom law: " + std::string(name));
}

/// Stream roles keep the draws for different kinds of objects disjoint even
/// when they share a (trial, block) coordinate.
enum class Role : std::uint64_t {
  generic = 0,
  block_a = 1,
  block_b = 2,
  block_c = 3,
  corner_top_right = 4,
  corner_bottom_left = 5,
  frame_pi = 6,
  frame_xi = 7,
  ginibre = 8,
  trial = 9,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// One independent scalar stream. Not thread safe; give each worker its own.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }  // [0, 1)
  bool coin() { return (engine_() >> 63) != 0; }

  [[nodiscard]] std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::uint64_t seed_;
};

/// Counter-based seed derivation: the stream for (trial, block, role) is a pure
/// function of the master seed and those indices, independent of the order in
/// which streams are requested.
class SeedScheme {
 public:
  explicit SeedScheme(std::uint64_t master_seed) : master_(master_seed) {}

  [[nodiscard]] std::uint64_t master_seed() const { return master_; }

  [[nodiscard]] std::uint64_t derive(std::uint64_t trial, std::uint64_t block, Role role) const {
    std::uint64_t h = splitmix64(master_);
    h = splitmix64(h ^ trial);
    h = splitmix64(h ^ (block * 0xd1342543de82ef95ULL));
    h = splitmix64(h ^ static_cast<std::uint64_t>(role));
    return h;
  }

  [[nodiscard]] Stream stream(std::uint64_t trial, std::uint64_t block, Role role) const {
    return Stream(derive(trial, block, role));
  }

 private:
  std::uint64_t master_;
};

inline Complex sample_atom(const AtomLaw& law, Stream& stream) {
  switch (law.kind) {
    case AtomKind::real_gaussian:
      return {stream.normal(), 0.0};
    case AtomKind::complex_gaussian: {
      const double re = stream.normal();
      const double im = stream.normal();
      return Complex(re, im) * M_SQRT1_2;
    }
    case AtomKind::real_uniform:
      return {std::sqrt(3.0) * (2.0 * stream.uniform() - 1.0), 0.0};
    case AtomKind::smoothed_rademacher: {
      if (law.smoothing_ell < 1)
        throw InvalidArgument("smoothed-rademacher needs smoothing_ell >= 1");
      const double eps = std::pow(static_cast<double>(law.smoothing_ell), -law.smoothing_exponent);
      const double sign = stream.coin() ? 1.0 : -1.0;
      const double g = stream.normal();
      return {std::sqrt(1.0 - eps * eps) * sign + eps * g, 0.0};
    }
  }
  throw InvalidArgument("unknown atom kind");
}

/// ℓ×ℓ block of i.i.d. entries ζ/sqrt(3ℓ), filled in row-major order.
inline CMatrix fill_block(int ell, const AtomLaw& law, Stream& stream) {
  if (ell < 1) throw InvalidArgument("block size must be positive");
  const AtomLaw bound = law.at_block_size(ell);
  bound.validate();
  const double scale = 1.0 / std::sqrt(3.0 * ell);
  CMatrix block(ell, ell);
  for (int i = 0; i < ell; ++i)
    for (int j = 0; j < ell; ++j) block(i, j) = scale * sample_atom(bound, stream);
  return block;
}

}  // namespace bandlab
