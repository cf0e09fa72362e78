#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bandlab/entropy.hpp"
#include "bandlab/error.hpp"
#include "bandlab/numerics.hpp"

namespace bandlab {

inline constexpr long kDefaultDenseCap = 8192;

/// Blocks A_k, B_k, C_k for k = 1..n (stored at index k-1).
///
/// The plain matrix T uses A_1..A_n, B_1..B_{n-1} and C_2..C_n. B_n and C_1
/// only enter the transfer matrices and the bordered matrix; they are sampled
/// with the rest so every consumer sees one consistent instance.
struct BlockTridiagonal {
  int n = 0;
  int ell = 0;
  std::vector<CMatrix> a, b, c;
  AtomLaw law;
  std::uint64_t master_seed = 0;
  std::uint64_t trial = 0;

  [[nodiscard]] long dimension() const { return static_cast<long>(n) * ell; }

  const CMatrix& A(int k) const { return a.at(static_cast<std::size_t>(k - 1)); }
  const CMatrix& B(int k) const { return b.at(static_cast<std::size_t>(k - 1)); }
  const CMatrix& C(int k) const { return c.at(static_cast<std::size_t>(k - 1)); }

  void validate() const {
    if (n < 1 || ell < 1) throw InvalidArgument("block tridiagonal needs n >= 1 and ell >= 1");
    const auto sz = static_cast<std::size_t>(n);
    if (a.size() != sz || b.size() != sz || c.size() != sz)
      throw InvalidArgument("block tridiagonal: expected n blocks of each kind");
    for (const auto* list : {&a, &b, &c})
      for (const auto& m : *list)
        if (m.rows() != ell || m.cols() != ell)
          throw InvalidArgument("block tridiagonal: block has wrong shape");
  }
};

/// Boundary frames: Π is ℓ×2ℓ, Ξ is 2ℓ×ℓ.
struct BoundaryFrames {
  CMatrix pi;
  CMatrix xi;

  /// Π = [I, 0], Ξ = [I; 0].
  static BoundaryFrames canonical(int ell) {
    BoundaryFrames f;
    f.pi = CMatrix::Zero(ell, 2 * ell);
    f.pi.leftCols(ell).setIdentity();
    f.xi = CMatrix::Zero(2 * ell, ell);
    f.xi.topRows(ell).setIdentity();
    return f;
  }
};

/// 𝒯_{n+2}: the inner blocks with boundary rows [V, U] on block columns (0, 1)
/// and [S₊, C₊] on block columns (n, n+1).
struct BorderedEnsemble {
  BlockTridiagonal inner;
  CMatrix top_row;     // ℓ×2ℓ, [V, U]
  CMatrix bottom_row;  // ℓ×2ℓ, [S₊, C₊]
  BoundaryFrames frames;

  [[nodiscard]] int ell() const { return inner.ell; }
  [[nodiscard]] long dimension() const { return static_cast<long>(inner.n + 2) * inner.ell; }

  [[nodiscard]] CMatrix V() const { return top_row.leftCols(ell()); }
  [[nodiscard]] CMatrix U() const { return top_row.rightCols(ell()); }
  [[nodiscard]] CMatrix S_plus() const { return bottom_row.leftCols(ell()); }
  [[nodiscard]] CMatrix C_plus() const { return bottom_row.rightCols(ell()); }
};

/// T with the two wrap-around corner blocks: corner_top_right at block (1, n)
/// and corner_bottom_left at block (n, 1). Needs n >= 3 so the corners do not
/// overlap the band.
struct PeriodicEnsemble {
  BlockTridiagonal base;
  CMatrix corner_top_right;
  CMatrix corner_bottom_left;

  [[nodiscard]] long dimension() const { return base.dimension(); }
};

inline BlockTridiagonal sample_tridiagonal(int n, int ell, const AtomLaw& law,
                                           std::uint64_t master_seed, std::uint64_t trial = 0) {
  if (n < 1 || ell < 1) throw InvalidArgument("sample_tridiagonal: need n >= 1 and ell >= 1");
  const SeedScheme seeds(master_seed);
  BlockTridiagonal t;
  t.n = n;
  t.ell = ell;
  t.law = law;
  t.master_seed = master_seed;
  t.trial = trial;
  const auto sz = static_cast<std::size_t>(n);
  t.a.reserve(sz);
  t.b.reserve(sz);
  t.c.reserve(sz);
  for (int k = 1; k <= n; ++k) {
    auto sa = seeds.stream(trial, static_cast<std::uint64_t>(k), Role::block_a);
    auto sb = seeds.stream(trial, static_cast<std::uint64_t>(k), Role::block_b);
    auto sc = seeds.stream(trial, static_cast<std::uint64_t>(k), Role::block_c);
    t.a.push_back(fill_block(ell, law, sa));
    t.b.push_back(fill_block(ell, law, sb));
    t.c.push_back(fill_block(ell, law, sc));
  }
  return t;
}

inline PeriodicEnsemble sample_periodic(int n, int ell, const AtomLaw& law,
                                        std::uint64_t master_seed, std::uint64_t trial = 0) {
  if (n < 3) throw InvalidArgument("periodic ensemble needs n >= 3");
  PeriodicEnsemble p;
  p.base = sample_tridiagonal(n, ell, law, master_seed, trial);
  const SeedScheme seeds(master_seed);
  auto s_top = seeds.stream(trial, 0, Role::corner_top_right);
  auto s_bot = seeds.stream(trial, 0, Role::corner_bottom_left);
  p.corner_top_right = fill_block(ell, law, s_top);
  p.corner_bottom_left = fill_block(ell, law, s_bot);
  return p;
}

namespace detail {

inline void check_cap(long dim, long cap) {
  if (dim > cap)
    throw SizeCapError("dense realization of dimension " + std::to_string(dim) +
                       " exceeds cap " + std::to_string(cap));
}

inline auto block_at(CMatrix& m, int ell, long row, long col) {
  return m.block(row * ell, col * ell, ell, ell);
}

}  // namespace detail

/// Dense T - zI.
inline CMatrix to_dense(const BlockTridiagonal& t, Complex z = 0.0, long cap = kDefaultDenseCap) {
  t.validate();
  detail::check_cap(t.dimension(), cap);
  const int ell = t.ell;
  CMatrix m = CMatrix::Zero(t.dimension(), t.dimension());
  for (int k = 1; k <= t.n; ++k) {
    const long r = k - 1;
    detail::block_at(m, ell, r, r) = t.A(k);
    if (k < t.n) detail::block_at(m, ell, r, r + 1) = t.B(k);
    if (k > 1) detail::block_at(m, ell, r, r - 1) = t.C(k);
  }
  m.diagonal().array() -= z;
  return m;
}

/// Dense 𝒯_{n+2} - z·I_mid: the first and last block rows are not shifted.
inline CMatrix to_dense(const BorderedEnsemble& e, Complex z = 0.0, long cap = kDefaultDenseCap) {
  const auto& t = e.inner;
  t.validate();
  detail::check_cap(e.dimension(), cap);
  const int ell = t.ell;
  CMatrix m = CMatrix::Zero(e.dimension(), e.dimension());
  m.block(0, 0, ell, 2 * ell) = e.top_row;
  for (int k = 1; k <= t.n; ++k) {
    detail::block_at(m, ell, k, k - 1) = t.C(k);
    detail::block_at(m, ell, k, k) = t.A(k) - z * CMatrix::Identity(ell, ell);
    detail::block_at(m, ell, k, k + 1) = t.B(k);
  }
  m.block(static_cast<long>(t.n + 1) * ell, static_cast<long>(t.n) * ell, ell, 2 * ell) =
      e.bottom_row;
  return m;
}

/// Dense T^per - zI.
inline CMatrix to_dense(const PeriodicEnsemble& p, Complex z = 0.0, long cap = kDefaultDenseCap) {
  if (p.base.n < 3) throw InvalidArgument("periodic ensemble needs n >= 3");
  CMatrix m = to_dense(p.base, z, cap);
  const int ell = p.base.ell;
  detail::block_at(m, ell, 0, p.base.n - 1) = p.corner_top_right;
  detail::block_at(m, ell, p.base.n - 1, 0) = p.corner_bottom_left;
  return m;
}

/// log det(ΠΠ*) and log det(Ξ*Ξ) must both vanish to within `tol` in det.
inline void check_frame_normalization(const BoundaryFrames& f, double tol = 1e-10) {
  const long ell = f.pi.rows();
  if (ell < 1 || f.pi.cols() != 2 * ell || f.xi.rows() != 2 * ell || f.xi.cols() != ell)
    throw InvalidArgument("frames must be Π: ℓ×2ℓ and Ξ: 2ℓ×ℓ");
  const double det_pi = std::exp(log_abs_det_or_neg_inf(f.pi * f.pi.adjoint()));
  const double det_xi = std::exp(log_abs_det_or_neg_inf(f.xi.adjoint() * f.xi));
  if (std::abs(det_pi - 1.0) > tol || std::abs(det_xi - 1.0) > tol)
    throw FrameError("frame normalization violated: det(ΠΠ*)=" + std::to_string(det_pi) +
                     ", det(Ξ*Ξ)=" + std::to_string(det_xi));
}

/// Rescales Π so that det(ΠΠ*) = 1.
inline CMatrix normalize_row_frame(const CMatrix& pi) {
  const double log_det = lu_logdet(pi * pi.adjoint()).log_magnitude;
  return pi * std::exp(-log_det / (2.0 * static_cast<double>(pi.rows())));
}

/// Rescales Ξ so that det(Ξ*Ξ) = 1.
inline CMatrix normalize_column_frame(const CMatrix& xi) {
  const double log_det = lu_logdet(xi.adjoint() * xi).log_magnitude;
  return xi * std::exp(-log_det / (2.0 * static_cast<double>(xi.cols())));
}

/// Q₋ = Ξ(Ξ*Ξ)^{-1/2}.
inline CMatrix column_frame_isometry(const CMatrix& xi) {
  return xi * hermitian_inverse_sqrt(xi.adjoint() * xi);
}

/// Q̃₊ = (ΠΠ*)^{-1/2}Π.
inline CMatrix row_frame_coisometry(const CMatrix& pi) {
  return hermitian_inverse_sqrt(pi * pi.adjoint()) * pi;
}

/// Random frames with det(ΠΠ*) = det(Ξ*Ξ) = 1 drawn from Gaussian matrices,
/// complex by default and real when `real` is set. Ξ is not orthonormal: its
/// columns are orthonormalized and then mixed by a random upper-triangular
/// factor.
inline BoundaryFrames random_frames(int ell, Stream& stream, bool real = false) {
  auto gaussian = [&](long r, long c) {
    CMatrix m(r, c);
    for (long i = 0; i < r; ++i)
      for (long j = 0; j < c; ++j) {
        const double re = stream.normal();
        m(i, j) = real ? Complex(re) : Complex(re, stream.normal());
      }
    return m;
  };
  BoundaryFrames f;
  f.pi = normalize_row_frame(gaussian(ell, 2 * ell));
  // off-diagonal mixing scaled by 1/(2 sqrt(ℓ)) keeps Ξ*Ξ well conditioned
  CMatrix mix = (gaussian(ell, ell) / (2.0 * std::sqrt(static_cast<double>(ell))))
                    .triangularView<Eigen::StrictlyUpper>();
  for (int i = 0; i < ell; ++i) mix(i, i) = std::exp(0.25 * stream.normal());
  f.xi = normalize_column_frame(qr_thin(gaussian(2 * ell, ell)).q * mix);
  return f;
}

/// Builds the boundary rows of 𝒯_{n+2} from the frames.
///
/// With the transfer state ordered as (x_1; x_0), the top boundary row acting
/// on it is (Q⊥)* = [U, V] and Q̃₊ = [C₊, S₊]; in block-column order they
/// become [V, U] and [S₊, C₊].
inline BorderedEnsemble build_bordered(const BlockTridiagonal& inner, const BoundaryFrames& frames,
                                       double tol = 1e-10) {
  inner.validate();
  if (frames.pi.rows() != inner.ell) throw InvalidArgument("frame size does not match block size");
  check_frame_normalization(frames, tol);
  const int ell = inner.ell;

  const CMatrix q_minus = column_frame_isometry(frames.xi);
  const CMatrix q_plus = row_frame_coisometry(frames.pi);
  const CMatrix complement_adj = unitary_complement(q_minus).adjoint();  // [U, V]

  BorderedEnsemble e;
  e.inner = inner;
  e.frames = frames;
  e.top_row.resize(ell, 2 * ell);
  e.top_row << complement_adj.rightCols(ell), complement_adj.leftCols(ell);
  e.bottom_row.resize(ell, 2 * ell);
  e.bottom_row << q_plus.rightCols(ell), q_plus.leftCols(ell);
  return e;
}

/// ‖𝒯_{n+2}‖ ≤ 2 + 10 (max‖A_i‖ + max‖B_i‖ + max‖C_i‖), evaluated on the
/// unshifted dense matrix.
inline bool operator_norm_check(const BorderedEnsemble& e) {
  const auto& t = e.inner;
  double max_a = 0.0, max_b = 0.0, max_c = 0.0;
  for (int k = 1; k <= t.n; ++k) {
    max_a = std::max(max_a, operator_norm(t.A(k)));
    max_b = std::max(max_b, operator_norm(t.B(k)));
    max_c = std::max(max_c, operator_norm(t.C(k)));
  }
  return operator_norm(to_dense(e, 0.0)) <= 2.0 + 10.0 * (max_a + max_b + max_c);
}

}  // namespace bandlab
