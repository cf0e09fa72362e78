#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "bandlab/entropy.hpp"
#include "bandlab/error.hpp"
#include "bandlab/model.hpp"
#include "bandlab/numerics.hpp"

namespace bandlab {

/// A point of the Stiefel manifold St(ℓ, 2ℓ) carried along the cocycle,
/// together with the log-volume absorbed by renormalization so far.
struct TransferState {
  CMatrix frame;          // 2ℓ×ℓ, orthonormal columns
  double log_accum = 0.0; // Σ log|det R_j|
  int step = 0;
};

struct CocycleTrace {
  std::vector<double> increments;
  double total = 0.0;
};

/// M_k(z)·frame, where M_k(z) = [[-B⁻¹(A - z), -B⁻¹C], [I, 0]]. The frame is
/// split as (u; v) = (x_k; x_{k-1}); the result is (x_{k+1}; x_k).
inline CMatrix apply_transfer(const CMatrix& a, const CMatrix& b, const CMatrix& c, Complex z,
                              const CMatrix& frame) {
  const auto ell = a.rows();
  if (frame.rows() != 2 * ell) throw InvalidArgument("apply_transfer: frame must have 2ℓ rows");
  const auto u = frame.topRows(ell);
  const auto v = frame.bottomRows(ell);
  const CMatrix w = a * u - z * u + c * v;
  CMatrix out(2 * ell, frame.cols());
  out.topRows(ell) = solve_lu(b, -w);
  out.bottomRows(ell) = u;
  return out;
}

/// Orthonormalizes Ξ; the volume ‖∧^ℓ Ξ‖ goes into log_accum.
inline TransferState initial_state(const CMatrix& xi) {
  if (xi.rows() != 2 * xi.cols()) throw InvalidArgument("initial frame must be 2ℓ×ℓ");
  auto [q, r] = qr_thin(xi);
  TransferState s;
  s.frame = std::move(q);
  s.log_accum = r.diagonal().real().array().log().sum();
  return s;
}

/// One transfer step followed by QR renormalization. The increment
/// new.log_accum - old.log_accum is g_ℓ(M_k, X_{k-1}).
inline TransferState cocycle_step(const TransferState& state, const CMatrix& a, const CMatrix& b,
                                  const CMatrix& c, Complex z) {
  const CMatrix y = apply_transfer(a, b, c, z, state.frame);
  auto [q, r] = qr_thin(y);
  TransferState next;
  next.frame = std::move(q);
  next.log_accum = state.log_accum + r.diagonal().real().array().log().sum();
  next.step = state.step + 1;
  return next;
}

struct CocycleRun {
  TransferState final_state;
  CocycleTrace trace;          // one increment per renormalization
  double initial_log_volume = 0.0;
};

/// Propagates Ξ through M_1, ..., M_n. With `renormalize_every` > 1 several
/// transfer maps are applied between QR renormalizations; the trace then holds
/// one increment per renormalization.
inline CocycleRun run_cocycle(const BlockTridiagonal& t, Complex z, const CMatrix& xi,
                              int renormalize_every = 1) {
  t.validate();
  if (renormalize_every < 1) throw InvalidArgument("renormalization cadence must be >= 1");
  if (xi.rows() != 2 * t.ell || xi.cols() != t.ell) throw InvalidArgument("Ξ must be 2ℓ×ℓ");
  CocycleRun run;
  TransferState state = initial_state(xi);
  run.initial_log_volume = state.log_accum;
  run.trace.increments.reserve(static_cast<std::size_t>(t.n));
  CMatrix pending = state.frame;
  int unnormalized = 0;
  for (int k = 1; k <= t.n; ++k) {
    pending = apply_transfer(t.A(k), t.B(k), t.C(k), z, pending);
    ++unnormalized;
    if (unnormalized == renormalize_every || k == t.n) {
      auto [q, r] = qr_thin(pending);
      const double inc = r.diagonal().real().array().log().sum();
      run.trace.increments.push_back(inc);
      state.log_accum += inc;
      state.frame = std::move(q);
      pending = state.frame;
      unnormalized = 0;
    }
    state.step = k;
  }
  run.trace.total =
      std::accumulate(run.trace.increments.begin(), run.trace.increments.end(), 0.0);
  run.final_state = std::move(state);
  return run;
}

struct TransferLogDet {
  double value = 0.0;           // Σ log|det B_k| + cocycle_total + final_pairing
  double sum_log_det_b = 0.0;
  double cocycle_total = 0.0;   // Σ_k log|det R_k|, k = 1..n
  double final_pairing = 0.0;   // log|det(Q̃₊ Q_n)|
  bool degenerate = false;      // final pairing below the pivot floor; value = -inf

  /// log|det(Π M_n···M_1 Ξ)| for normalized frames.
  [[nodiscard]] double product_logdet() const { return cocycle_total + final_pairing; }
};

/// log|det(𝒯_{n+2} - z I_mid)| through the frame cocycle.
///
/// For Π = [I, 0], Ξ = [I; 0] this equals log|det(T - zI)| of the plain
/// n-block matrix. The frames are used through their normalized versions
/// Q₋ = Ξ(Ξ*Ξ)^{-1/2} and Q̃₊ = (ΠΠ*)^{-1/2}Π.
inline TransferLogDet logdet_via_transfer(const BlockTridiagonal& t, Complex z,
                                          const BoundaryFrames& frames,
                                          int renormalize_every = 1) {
  t.validate();
  if (frames.pi.rows() != t.ell || frames.pi.cols() != 2 * t.ell)
    throw InvalidArgument("Π must be ℓ×2ℓ");
  TransferLogDet out;
  for (int k = 1; k <= t.n; ++k) out.sum_log_det_b += lu_logdet(t.B(k)).log_magnitude;

  const CocycleRun run = run_cocycle(t, z, frames.xi, renormalize_every);
  out.cocycle_total = run.trace.total;

  const CMatrix pairing = row_frame_coisometry(frames.pi) * run.final_state.frame;
  out.final_pairing = log_abs_det_or_neg_inf(pairing);
  if (!std::isfinite(out.final_pairing)) {
    out.degenerate = true;
    out.value = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = out.sum_log_det_b + out.cocycle_total + out.final_pairing;
  return out;
}

/// log|det(T - zI)| for the plain n-block matrix (Π = [I, 0], Ξ = [I; 0]).
inline TransferLogDet logdet_via_transfer(const BlockTridiagonal& t, Complex z) {
  return logdet_via_transfer(t, z, BoundaryFrames::canonical(t.ell));
}

/// log‖∧^ℓ(M_n···M_1) ∧^ℓ Ξ‖: the frame growth, including the volume of Ξ
/// itself. Depends on Ξ only through its span and ‖∧^ℓ Ξ‖.
inline double frame_growth(const BlockTridiagonal& t, Complex z, const CMatrix& xi,
                           int renormalize_every = 1) {
  const CocycleRun run = run_cocycle(t, z, xi, renormalize_every);
  return run.initial_log_volume + run.trace.total;
}

namespace detail {

inline long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> lex_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return out;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

}  // namespace detail

inline constexpr int kWedgeDimensionCap = 8;

/// Exterior power ∧^k M in the lexicographic basis: entry (I, J) is the minor
/// det M[I, J]. Works for rectangular M (∧^k of a 2ℓ×ℓ frame is a column).
inline CMatrix exterior_power(const CMatrix& m, int k) {
  if (m.rows() > kWedgeDimensionCap || m.cols() > kWedgeDimensionCap)
    throw SizeCapError("exterior_power: matrix larger than 8×8");
  if (k < 1 || k > std::min(m.rows(), m.cols()))
    throw InvalidArgument("exterior_power: degree out of range");
  const auto rows = detail::lex_subsets(static_cast<int>(m.rows()), k);
  const auto cols = detail::lex_subsets(static_cast<int>(m.cols()), k);
  CMatrix out(static_cast<long>(rows.size()), static_cast<long>(cols.size()));
  CMatrix minor(k, k);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (int p = 0; p < k; ++p)
        for (int q = 0; q < k; ++q)
          minor(p, q) = m(rows[i][static_cast<std::size_t>(p)], cols[j][static_cast<std::size_t>(q)]);
      out(static_cast<long>(i), static_cast<long>(j)) = minor.determinant();
    }
  return out;
}

/// ∧^ℓ g for a 2ℓ×2ℓ map g, ℓ ≤ 4.
inline CMatrix wedge_power_small(const CMatrix& g, int ell) {
  if (ell > 4) throw SizeCapError("wedge_power_small: ℓ must be at most 4");
  if (g.rows() != 2 * ell || g.cols() != 2 * ell)
    throw InvalidArgument("wedge_power_small: g must be 2ℓ×2ℓ");
  return exterior_power(g, ell);
}

struct SubsystemSplit {
  int n0 = 0;
  /// Inclusive 1-based [first, last] ranges tiling [1, n]; the last one is the
  /// remainder segment.
  std::vector<std::pair<int, int>> segments;
};

/// Finds n₀ ∈ [2ℓ^d, 4ℓ^d] with n - n₀⌊n/n₀⌋ ≥ n₀/2 (smallest such n₀).
inline SubsystemSplit subsystem_split(int n, int ell, double d) {
  if (ell < 1 || !(d > 0.0)) throw InvalidArgument("subsystem_split: need ell >= 1 and d > 0");
  const double scale = std::pow(static_cast<double>(ell), d);
  constexpr double slack = 1e-9;
  if (static_cast<double>(n) < 10.0 * scale * (1.0 - slack))
    throw InvalidArgument("subsystem_split: need n >= 10 ell^d");
  const int lo = static_cast<int>(std::ceil(2.0 * scale * (1.0 - slack)));
  const int hi = static_cast<int>(std::floor(4.0 * scale * (1.0 + slack)));
  for (int n0 = std::max(lo, 1); n0 <= hi; ++n0) {
    const int full = n / n0;
    const int rem = n - n0 * full;
    if (2 * rem < n0) continue;
    SubsystemSplit s;
    s.n0 = n0;
    for (int k = 1; k <= full; ++k) s.segments.emplace_back((k - 1) * n0 + 1, k * n0);
    s.segments.emplace_back(full * n0 + 1, n);
    return s;
  }
  throw InvalidArgument("subsystem_split: no admissible n0");
}

struct ConcentrationParams {
  int n = 0;
  int ell = 0;
  Complex z = 0.0;
  AtomLaw law;
  std::uint64_t master_seed = 0;
  BoundaryFrames frames;  // empty → canonical frames
};

struct ConcentrationSummary {
  int n = 0;
  std::vector<double> samples;  // (1/nℓ) log|det(Π M_n···M_1 Ξ)| per trial
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double stddev = 0.0;
};

inline ConcentrationSummary summarize_samples(int n, std::vector<double> samples) {
  ConcentrationSummary s;
  s.n = n;
  s.samples = std::move(samples);
  const auto count = static_cast<double>(s.samples.size());
  if (s.samples.empty()) return s;
  s.mean = std::accumulate(s.samples.begin(), s.samples.end(), 0.0) / count;
  if (s.samples.size() > 1) {
    double acc = 0.0;
    for (double v : s.samples) acc += (v - s.mean) * (v - s.mean);
    s.variance = acc / (count - 1.0);
  }
  s.stddev = std::sqrt(s.variance);
  return s;
}

/// Samples (1/nℓ)·Pro(Π, Ξ) for each listed trial index. Repeating an index
/// repeats the sample exactly.
inline ConcentrationSummary concentration_experiment(const ConcentrationParams& p,
                                                     std::span<const std::uint64_t> trial_ids) {
  if (trial_ids.size() < 2) throw InvalidArgument("concentration_experiment: need >= 2 trials");
  const BoundaryFrames frames =
      p.frames.pi.size() == 0 ? BoundaryFrames::canonical(p.ell) : p.frames;
  std::vector<double> samples;
  samples.reserve(trial_ids.size());
  const double scale = 1.0 / (static_cast<double>(p.n) * p.ell);
  for (auto trial : trial_ids) {
    const auto t = sample_tridiagonal(p.n, p.ell, p.law, p.master_seed, trial);
    samples.push_back(scale * logdet_via_transfer(t, p.z, frames).product_logdet());
  }
  return summarize_samples(p.n, std::move(samples));
}

inline ConcentrationSummary concentration_experiment(const ConcentrationParams& p, int trials) {
  std::vector<std::uint64_t> ids(static_cast<std::size_t>(std::max(trials, 0)));
  std::iota(ids.begin(), ids.end(), std::uint64_t{0});
  return concentration_experiment(p, ids);
}

struct ConcentrationSweep {
  std::vector<ConcentrationSummary> rows;
  bool stddev_strictly_decreasing = false;
};

inline ConcentrationSweep concentration_sweep(ConcentrationParams p, std::span<const int> ns,
                                              int trials) {
  ConcentrationSweep sweep;
  for (int n : ns) {
    p.n = n;
    sweep.rows.push_back(concentration_experiment(p, trials));
  }
  sweep.stddev_strictly_decreasing = true;
  for (std::size_t i = 1; i < sweep.rows.size(); ++i)
    if (!(sweep.rows[i].stddev < sweep.rows[i - 1].stddev)) sweep.stddev_strictly_decreasing = false;
  return sweep;
}

}  // namespace bandlab
