#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bandlab/entropy.hpp"
#include "bandlab/error.hpp"
#include "bandlab/model.hpp"
#include "bandlab/spectra.hpp"

namespace bandlab {

namespace detail {

/// F(s) = -w(1 + s) + |z|²(1 + s)^{-1}; the MDE sites solve m = 1/F(m^avg).
inline Complex mde_rhs(Complex s, Complex w, double z_abs2) {
  return -w * (1.0 + s) + z_abs2 / (1.0 + s);
}

/// Roots of w m³ + 2w m² + (w + 1 - |z|²) m + 1, each polished by Newton.
inline std::array<Complex, 3> mc_cubic_roots(Complex w, double z_abs2) {
  const Complex c3 = w, c2 = 2.0 * w, c1 = w + 1.0 - z_abs2, c0 = 1.0;
  Eigen::Matrix3cd companion = Eigen::Matrix3cd::Zero();
  companion(0, 0) = -c2 / c3;
  companion(0, 1) = -c1 / c3;
  companion(0, 2) = -c0 / c3;
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  const Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(companion, false);
  std::array<Complex, 3> roots{};
  for (int i = 0; i < 3; ++i) {
    Complex m = es.eigenvalues()(i);
    for (int it = 0; it < 8; ++it) {
      const Complex p = ((c3 * m + c2) * m + c1) * m + c0;
      const Complex dp = (3.0 * c3 * m + 2.0 * c2) * m + c1;
      if (std::abs(dp) == 0.0) break;
      const Complex step = p / dp;
      m -= step;
      if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(m))) break;
    }
    roots[static_cast<std::size_t>(i)] = m;
  }
  return roots;
}

inline Complex nearest_root(const std::array<Complex, 3>& roots, Complex target) {
  return *std::min_element(roots.begin(), roots.end(), [&](Complex a, Complex b) {
    return std::abs(a - target) < std::abs(b - target);
  });
}

}  // namespace detail

/// |m - 1/F(m)|, the fixed-point residual of the translation-invariant equation.
inline double mc_residual(Complex m, Complex w, Complex z) {
  return std::abs(m - 1.0 / detail::mde_rhs(m, w, std::norm(z)));
}

/// The solution of 1/m = -w(1 + m) + |z|²(1 + m)^{-1} with Im m > 0.
///
/// When more than one root lies in the upper half plane, the one continuously
/// connected to -1/w at large Im w is followed along w + i·s·K, s: 1 → 0.
inline Complex solve_mc(Complex w, Complex z) {
  if (!(w.imag() > 0.0)) throw InvalidArgument("solve_mc: need Im w > 0");
  const double z2 = std::norm(z);
  const auto roots = detail::mc_cubic_roots(w, z2);
  int admissible = 0;
  Complex pick{};
  for (Complex r : roots)
    if (r.imag() > 0.0) {
      ++admissible;
      pick = r;
    }
  if (admissible == 0) throw ConvergenceError("solve_mc: no root with positive imaginary part");
  if (admissible > 1) {
    const double lift = 10.0 * (1.0 + std::abs(w) + z2);
    constexpr int steps = 400;
    Complex wt = w + Complex(0.0, lift);
    Complex current = detail::nearest_root(detail::mc_cubic_roots(wt, z2), -1.0 / wt);
    for (int k = steps - 1; k >= 0; --k) {
      // quadratic spacing refines the path near the target
      const double s = static_cast<double>(k) / steps;
      wt = w + Complex(0.0, lift * s * s);
      current = detail::nearest_root(detail::mc_cubic_roots(wt, z2), current);
    }
    pick = current;
    if (!(pick.imag() > 0.0)) throw ConvergenceError("solve_mc: continuation left the upper half plane");
  }
  return pick;
}

struct ChainOptions {
  double tol = 1e-10;
  long max_iter = 2'000'000;
  double initial_damping = 0.5;
  double damping_floor = 1.0 / 1024.0;
};

struct MdeChain {
  int n = 0;
  Complex w;
  Complex z;
  std::vector<Complex> m;
  double residual = std::numeric_limits<double>::infinity();
  long iterations = 0;
  double damping = 0.0;
  bool converged = false;
};

namespace detail {

/// m_i^avg = (m_{i-1} + m_i + m_{i+1})/3 with m_0 = m_{n+1} = 0.
inline void chain_map(std::span<const Complex> m, Complex w, double z2, std::span<Complex> out) {
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex left = i > 0 ? m[i - 1] : Complex(0.0);
    const Complex right = i + 1 < n ? m[i + 1] : Complex(0.0);
    const Complex avg = (left + m[i] + right) / 3.0;
    out[i] = 1.0 / mde_rhs(avg, w, z2);
  }
}

inline double sup_distance(std::span<const Complex> a, std::span<const Complex> b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

}  // namespace detail

/// Sup-norm fixed-point residual of the chain equations.
inline double chain_residual(std::span<const Complex> m, Complex w, Complex z) {
  std::vector<Complex> img(m.size());
  detail::chain_map(m, w, std::norm(z), img);
  return detail::sup_distance(m, img);
}

/// Damped fixed-point iteration for the n-site chain with zero boundary,
/// started from m_c on every site. Damping halves on a residual increase and
/// on any step that would leave the upper half plane (that step is rejected).
inline MdeChain solve_chain(int n, Complex w, Complex z, const ChainOptions& opt = {}) {
  if (n < 1) throw InvalidArgument("solve_chain: need n >= 1");
  if (!(w.imag() > 0.0)) throw InvalidArgument("solve_chain: need Im w > 0");
  if (!(opt.tol > 0.0)) throw InvalidArgument("solve_chain: need tol > 0");
  const double z2 = std::norm(z);
  MdeChain chain;
  chain.n = n;
  chain.w = w;
  chain.z = z;
  chain.m.assign(static_cast<std::size_t>(n), solve_mc(w, z));
  std::vector<Complex> image(chain.m.size()), candidate(chain.m.size());
  double damping = opt.initial_damping;
  double previous = std::numeric_limits<double>::infinity();
  for (long it = 0; it < opt.max_iter; ++it) {
    detail::chain_map(chain.m, w, z2, image);
    const double res = detail::sup_distance(chain.m, image);
    chain.residual = res;
    chain.iterations = it;
    if (res <= opt.tol) {
      chain.converged = true;
      break;
    }
    if (res > previous) damping = std::max(damping / 2.0, opt.damping_floor);
    previous = res;
    while (true) {
      bool positive = true;
      for (std::size_t i = 0; i < chain.m.size(); ++i) {
        candidate[i] = (1.0 - damping) * chain.m[i] + damping * image[i];
        positive = positive && candidate[i].imag() > 0.0;
      }
      if (positive) break;
      if (damping / 2.0 < opt.damping_floor)
        throw ConvergenceError("solve_chain: positivity lost at the damping floor");
      damping /= 2.0;
    }
    chain.m.swap(candidate);
  }
  chain.damping = damping;
  if (chain.converged) chain.residual = chain_residual(chain.m, w, z);
  return chain;
}

/// Variance profile s_ij = Var(T_ij): 1/(3ℓ) when the block indices of i and j
/// differ by at most one (cyclically for the periodic profile), 0 otherwise.
struct SelfEnergyProfile {
  int n = 0;
  int ell = 0;
  bool periodic = false;

  [[nodiscard]] long dimension() const { return static_cast<long>(n) * ell; }

  [[nodiscard]] bool blocks_coupled(int bi, int bj) const {
    const int d = std::abs(bi - bj);
    return d <= 1 || (periodic && d == n - 1);
  }

  [[nodiscard]] double entry(long i, long j) const {
    return blocks_coupled(static_cast<int>(i / ell), static_cast<int>(j / ell)) ? 1.0 / (3.0 * ell)
                                                                                 : 0.0;
  }
};

/// (Φ[Z])_ii = Σ_c s_ic Z_cc on the diagonal of Z. The profile is symmetric,
/// so the same routine gives Φ̃.
inline std::vector<Complex> self_energy_apply(const SelfEnergyProfile& profile,
                                              std::span<const Complex> diagonal) {
  if (static_cast<long>(diagonal.size()) != profile.dimension())
    throw InvalidArgument("self_energy_apply: dimension mismatch");
  const int n = profile.n;
  const int ell = profile.ell;
  std::vector<Complex> block_sum(static_cast<std::size_t>(n), 0.0);
  for (long i = 0; i < profile.dimension(); ++i)
    block_sum[static_cast<std::size_t>(i / ell)] += diagonal[static_cast<std::size_t>(i)];
  std::vector<Complex> out(diagonal.size());
  const double s = 1.0 / (3.0 * ell);
  for (int bi = 0; bi < n; ++bi) {
    Complex acc = 0.0;
    for (int bj = std::max(0, bi - 1); bj <= std::min(n - 1, bi + 1); ++bj) acc += block_sum[static_cast<std::size_t>(bj)];
    if (profile.periodic && n > 2) {
      if (bi == 0) acc += block_sum[static_cast<std::size_t>(n - 1)];
      if (bi == n - 1) acc += block_sum[0];
    }
    for (int r = 0; r < ell; ++r) out[static_cast<std::size_t>(bi * ell + r)] = s * acc;
  }
  return out;
}

struct StieltjesDeviationRow {
  int ell = 0;
  Complex xi;
  Complex empirical;        // trial-averaged Stieltjes transform, periodic ensemble
  Complex limit;            // m_z(ξ) = solve_mc(ξ, z)
  double deviation = 0.0;   // |empirical - limit|
  double plain_vs_periodic = 0.0;  // |m̂_plain - m̂_periodic| at the same seeds (report only)
};

struct StieltjesComparisonParams {
  int n = 8;
  std::vector<int> ells;
  Complex z = 0.5;
  std::vector<Complex> xi_grid;
  int trials = 40;
  AtomLaw law;
  std::uint64_t master_seed = 0;
};

/// Trial-averaged Stieltjes transform of the squared singular values of
/// T^per - zI, compared with m_z(ξ) for each block size and ξ.
inline std::vector<StieltjesDeviationRow> mde_vs_empirical(const StieltjesComparisonParams& p) {
  for (Complex xi : p.xi_grid)
    if (!(xi.imag() > 0.0)) throw InvalidArgument("mde_vs_empirical: need Im ξ > 0");
  if (p.trials < 1) throw InvalidArgument("mde_vs_empirical: need trials >= 1");
  std::vector<StieltjesDeviationRow> rows;
  for (int ell : p.ells) {
    std::vector<Complex> per(p.xi_grid.size(), 0.0), plain(p.xi_grid.size(), 0.0);
    for (int k = 0; k < p.trials; ++k) {
      const auto ens = sample_periodic(p.n, ell, p.law, p.master_seed, static_cast<std::uint64_t>(k));
      const auto mu_per = singular_values(ens, p.z);
      const auto mu_plain = singular_values(ens.base, p.z);
      for (std::size_t g = 0; g < p.xi_grid.size(); ++g) {
        per[g] += empirical_stieltjes(mu_per, p.xi_grid[g]);
        plain[g] += empirical_stieltjes(mu_plain, p.xi_grid[g]);
      }
    }
    for (std::size_t g = 0; g < p.xi_grid.size(); ++g) {
      StieltjesDeviationRow row;
      row.ell = ell;
      row.xi = p.xi_grid[g];
      row.empirical = per[g] / static_cast<double>(p.trials);
      row.limit = solve_mc(row.xi, p.z);
      row.deviation = std::abs(row.empirical - row.limit);
      row.plain_vs_periodic = std::abs(plain[g] / static_cast<double>(p.trials) - row.empirical);
      rows.push_back(row);
    }
  }
  return rows;
}

/// (1/π) Im m(E + iη) at each grid point.
inline std::vector<double> density_from_stieltjes(const std::function<Complex(Complex)>& m,
                                                  std::span<const double> energies, double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("density_from_stieltjes: need eta > 0");
  std::vector<double> out;
  out.reserve(energies.size());
  for (double e : energies) out.push_back(std::max(0.0, m(Complex(e, eta)).imag() / std::numbers::pi));
  return out;
}

}  // namespace bandlab
