#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "bandlab/entropy.hpp"
#include "bandlab/error.hpp"
#include "bandlab/model.hpp"
#include "bandlab/numerics.hpp"
#include "bandlab/transfer.hpp"

namespace bandlab {

/// Equal-weight atoms, kept sorted ascending.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  explicit EmpiricalMeasure(std::vector<double> atoms) : atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end());
  }

  [[nodiscard]] std::span<const double> atoms() const { return atoms_; }
  [[nodiscard]] std::size_t size() const { return atoms_.size(); }
  [[nodiscard]] bool empty() const { return atoms_.empty(); }
  [[nodiscard]] double weight() const { return 1.0 / static_cast<double>(atoms_.size()); }

  /// μ([0, x]), i.e. the right-continuous CDF at x.
  [[nodiscard]] double cdf(double x) const {
    const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
    return static_cast<double>(it - atoms_.begin()) / static_cast<double>(atoms_.size());
  }

 private:
  std::vector<double> atoms_;
};

/// Squared singular values of the z-shifted dense realization.
template <class Ensemble>
EmpiricalMeasure singular_values(const Ensemble& ensemble, Complex z, long cap = kDefaultDenseCap) {
  auto s = svd_values(to_dense(ensemble, z, cap));
  for (double& v : s) v *= v;
  return EmpiricalMeasure(std::move(s));
}

/// s_min(𝒯_{n+2} - z I_mid).
inline double least_singular_value(const BorderedEnsemble& e, Complex z,
                                   long cap = kDefaultDenseCap) {
  return svd_values(to_dense(e, z, cap)).back();
}

/// Number of atoms ≤ threshold.
inline std::size_t rigidity_count(const EmpiricalMeasure& mu, double threshold) {
  if (!(threshold >= 0.0)) throw InvalidArgument("rigidity_count: threshold must be >= 0");
  return static_cast<std::size_t>(
      std::upper_bound(mu.atoms().begin(), mu.atoms().end(), threshold) - mu.atoms().begin());
}

/// (1/count) Σ (atom - ξ)^{-1} for Im ξ > 0.
inline Complex empirical_stieltjes(const EmpiricalMeasure& mu, Complex xi) {
  if (!(xi.imag() > 0.0)) throw InvalidArgument("empirical_stieltjes: need Im ξ > 0");
  if (mu.empty()) throw InvalidArgument("empirical_stieltjes: empty measure");
  Complex acc = 0.0;
  for (double x : mu.atoms()) acc += 1.0 / (x - xi);
  return acc * mu.weight();
}

/// sup_x |μ([0, x]) - ν([0, x])|; for step CDFs the sup is attained at an atom.
inline double kolmogorov_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.empty() || nu.empty()) throw InvalidArgument("kolmogorov_distance: empty measure");
  const auto a = mu.atoms();
  const auto b = nu.atoms();
  const double wa = mu.weight();
  const double wb = nu.weight();
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j == b.size() || (i < a.size() && a[i] <= b[j]))
      x = a[i];
    else
      x = b[j];
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) * wa - static_cast<double>(j) * wb));
  }
  return best;
}

struct EsdSummary {
  std::vector<Complex> eigenvalues;
  double fraction_in_unit_disk = 0.0;
  double radial_cdf_distance = 0.0;  // sup_{r ∈ [0,1]} |F̂(r) - r²|
};

/// Circular-law statistics of a finite eigenvalue sample.
inline EsdSummary summarize_esd(std::vector<Complex> eigenvalues) {
  EsdSummary out;
  out.eigenvalues = std::move(eigenvalues);
  const std::size_t count = out.eigenvalues.size();
  if (count == 0) return out;
  std::vector<double> radii(count);
  std::transform(out.eigenvalues.begin(), out.eigenvalues.end(), radii.begin(),
                 [](Complex l) { return std::abs(l); });
  std::sort(radii.begin(), radii.end());
  const double total = static_cast<double>(count);
  double sup = 0.0;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < count && radii[i] <= 1.0; ++i) {
    const double r2 = radii[i] * radii[i];
    sup = std::max(sup, std::abs(static_cast<double>(i) / total - r2));      // left limit
    sup = std::max(sup, std::abs(static_cast<double>(i + 1) / total - r2));  // right value
    inside = i + 1;
  }
  const double frac = static_cast<double>(inside) / total;
  sup = std::max(sup, std::abs(frac - 1.0));  // at r = 1
  out.fraction_in_unit_disk = frac;
  out.radial_cdf_distance = sup;
  return out;
}

/// Eigenvalue statistics of the dense realization at z = 0.
inline EsdSummary esd(const BlockTridiagonal& t, int cap = kEigenvalueCap) {
  if (t.dimension() > cap) throw SizeCapError("esd: dimension exceeds eigenvalue cap");
  return summarize_esd(eigvals(to_dense(t, 0.0, cap), cap));
}

/// Log-potential of the circular law: (|z|²-1)/2 inside the unit disk, log|z| outside.
inline double ginibre_potential(Complex z) {
  const double r = std::abs(z);
  return r <= 1.0 ? 0.5 * (r * r - 1.0) : std::log(r);
}

/// -½ log 3 - ½.
inline double ginibre_logdet_limit() { return -0.5 * std::log(3.0) - 0.5; }

/// (1/N) log|det(T - zI)| at each grid point, through the frame cocycle.
inline std::vector<double> log_potential(const BlockTridiagonal& t, std::span<const Complex> grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  const double inv_dim = 1.0 / static_cast<double>(t.dimension());
  for (Complex z : grid) {
    const auto r = logdet_via_transfer(t, z);
    out.push_back(r.value * inv_dim);
  }
  return out;
}

struct GinibreSummary {
  std::vector<double> values;  // (1/n) log|det((3n)^{-1/2} A)| per trial
  double mean = 0.0;
};

inline double ginibre_logdet_sample(int n, const AtomLaw& law, std::uint64_t master_seed,
                                    std::uint64_t trial) {
  auto stream = SeedScheme(master_seed).stream(trial, 0, Role::ginibre);
  const CMatrix a = fill_block(n, law, stream);  // entries ζ/sqrt(3n)
  return lu_logdet(a).log_magnitude / n;
}

inline GinibreSummary ginibre_logdet_check(int n, int trials, const AtomLaw& law,
                                           std::uint64_t master_seed) {
  if (n < 1 || trials < 1) throw InvalidArgument("ginibre_logdet_check: need n, trials >= 1");
  GinibreSummary s;
  for (int k = 0; k < trials; ++k)
    s.values.push_back(ginibre_logdet_sample(n, law, master_seed, static_cast<std::uint64_t>(k)));
  s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / trials;
  return s;
}

struct LogIntegralBound {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// |∫_a^b |log x|^β dμ - ∫_a^b |log x|^β dν| ≤ 2(|log a|^β + |log b|^β)·K(μ, ν),
/// integrals over the closed interval [a, b].
inline LogIntegralBound logint_bound_check(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                           double a, double b, double beta) {
  if (!(a > 0.0 && a < b)) throw InvalidArgument("logint_bound_check: need 0 < a < b");
  if (!(beta >= 1.0)) throw InvalidArgument("logint_bound_check: need beta >= 1");
  auto integral = [&](const EmpiricalMeasure& m) {
    double acc = 0.0;
    for (double x : m.atoms())
      if (x >= a && x <= b) acc += std::pow(std::abs(std::log(x)), beta);
    return acc * m.weight();
  };
  LogIntegralBound r;
  r.lhs = std::abs(integral(mu) - integral(nu));
  r.rhs = 2.0 * (std::pow(std::abs(std::log(a)), beta) + std::pow(std::abs(std::log(b)), beta)) *
          kolmogorov_distance(mu, nu);
  r.holds = r.lhs <= r.rhs;
  return r;
}

struct LsvTailParams {
  int n = 4;
  int ell = 24;
  Complex z = 0.0;
  AtomLaw law;
  std::uint64_t master_seed = 0;
  int trials = 400;
};

struct LsvTailSummary {
  std::vector<double> samples;  // s_min per trial, sorted ascending
  double p05 = 0.0;             // empirical 5th percentile
  std::vector<double> t_grid;
  std::vector<double> cdf;      // P̂(s_min ≤ t)
  std::vector<double> ratio;    // P̂(t)/t
  double log_moment4 = 0.0;     // Ê|log s_min|⁴
  /// (Ê|log s_min|⁴)^{1/4} / (n (log ℓ + log n)).
  double calibrated_constant = 0.0;
};

inline double empirical_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

/// s_min of 𝒯_{n+2} - z I_mid for one trial, with Π = [I, 0] and a random
/// normalized Ξ drawn from the trial's frame stream.
inline double lsv_sample(const LsvTailParams& p, std::uint64_t trial,
                         long cap = kDefaultDenseCap) {
  const auto t = sample_tridiagonal(p.n, p.ell, p.law, p.master_seed, trial);
  auto fs = SeedScheme(p.master_seed).stream(trial, 0, Role::frame_xi);
  BoundaryFrames frames = BoundaryFrames::canonical(p.ell);
  // real atoms get real frames so the bordered matrix stays in the real class
  frames.xi = random_frames(p.ell, fs, p.law.is_real()).xi;
  return least_singular_value(build_bordered(t, frames), p.z, cap);
}

/// Tail table over one decade of t centred on the 5th percentile, plus the
/// fourth log-moment.
inline LsvTailSummary tabulate_lsv_tail(std::vector<double> samples, int n, int ell,
                                        int grid_points = 9) {
  if (samples.size() < 2) throw InvalidArgument("lsv tail: need >= 2 samples");
  LsvTailSummary s;
  s.samples = std::move(samples);
  std::sort(s.samples.begin(), s.samples.end());
  s.p05 = empirical_quantile(s.samples, 0.05);
  const double lo = s.p05 / std::sqrt(10.0);
  const double hi = s.p05 * std::sqrt(10.0);
  const EmpiricalMeasure mu(s.samples);
  for (int i = 0; i < grid_points; ++i) {
    const double frac = grid_points == 1 ? 0.5 : static_cast<double>(i) / (grid_points - 1);
    const double t = lo * std::pow(hi / lo, frac);
    s.t_grid.push_back(t);
    s.cdf.push_back(mu.cdf(t));
    s.ratio.push_back(mu.cdf(t) / t);
  }
  double m4 = 0.0;
  for (double v : s.samples) m4 += std::pow(std::abs(std::log(v)), 4.0);
  s.log_moment4 = m4 / static_cast<double>(s.samples.size());
  s.calibrated_constant =
      std::pow(s.log_moment4, 0.25) /
      (n * (std::log(static_cast<double>(ell)) + std::log(static_cast<double>(n))));
  return s;
}

inline LsvTailSummary lsv_tail(const LsvTailParams& p, int grid_points = 9) {
  if (p.trials < 2) throw InvalidArgument("lsv_tail: need >= 2 trials");
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(p.trials));
  for (int k = 0; k < p.trials; ++k) samples.push_back(lsv_sample(p, static_cast<std::uint64_t>(k)));
  return tabulate_lsv_tail(std::move(samples), p.n, p.ell, grid_points);
}

}  // namespace bandlab
