#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bandlab/detail/lapack.hpp"
#include "bandlab/entropy.hpp"
#include "bandlab/error.hpp"

namespace bandlab {

/// Pivots (and R diagonals) with magnitude below this are treated as zero.
inline constexpr double kPivotFloor = 1e-300;
inline constexpr int kEigenvalueCap = 4096;

struct LogDet {
  double log_magnitude = 0.0;        // log|det M|
  Complex phase{1.0, 0.0};           // det M / |det M|
};

namespace detail {

struct PivotLogDet {
  LogDet value;
  bool singular = false;
};

inline PivotLogDet pivot_logdet(const CMatrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("log-determinant needs a square matrix");
  PivotLogDet out;
  if (m.rows() == 0) return out;
  const Eigen::PartialPivLU<CMatrix> lu(m);
  const auto& packed = lu.matrixLU();
  double log_mag = 0.0;
  Complex phase = lu.permutationP().determinant() > 0 ? Complex(1.0) : Complex(-1.0);
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    const double mag = std::abs(packed(i, i));
    if (!(mag >= kPivotFloor)) {
      out.singular = true;
      out.value.log_magnitude = -std::numeric_limits<double>::infinity();
      return out;
    }
    log_mag += std::log(mag);
    phase *= packed(i, i) / mag;
  }
  out.value = {log_mag, phase / std::abs(phase)};
  return out;
}

}  // namespace detail

/// log|det M| accumulated from the LU pivots; throws when a pivot falls below
/// kPivotFloor.
inline LogDet lu_logdet(const CMatrix& m) {
  auto r = detail::pivot_logdet(m);
  if (r.singular) throw SingularMatrixError("lu_logdet: pivot below floor");
  return r.value;
}

/// log|det M|, or -inf when M is numerically singular.
inline double log_abs_det_or_neg_inf(const CMatrix& m) {
  return detail::pivot_logdet(m).value.log_magnitude;
}

inline CMatrix solve_lu(const CMatrix& b, const CMatrix& rhs) {
  if (b.rows() != b.cols()) throw InvalidArgument("solve_lu: matrix not square");
  if (rhs.rows() != b.rows()) throw InvalidArgument("solve_lu: dimension mismatch");
  const Eigen::PartialPivLU<CMatrix> lu(b);
  const auto& packed = lu.matrixLU();
  for (Eigen::Index i = 0; i < packed.rows(); ++i)
    if (!(std::abs(packed(i, i)) >= kPivotFloor))
      throw SingularMatrixError("solve_lu: pivot below floor");
  return lu.solve(rhs);
}

struct ThinQr {
  CMatrix q;  // m×k, orthonormal columns
  CMatrix r;  // k×k upper triangular, real positive diagonal
};

/// Householder QR with the phase of each column fixed so that diag(R) > 0.
inline ThinQr qr_thin(const CMatrix& m) {
  const auto rows = m.rows();
  const auto cols = m.cols();
  if (cols > rows) throw InvalidArgument("qr_thin: more columns than rows");
  const Eigen::HouseholderQR<CMatrix> qr(m);
  ThinQr out;
  out.q = qr.householderQ() * CMatrix::Identity(rows, cols);
  out.r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < cols; ++i) {
    const Complex d = out.r(i, i);
    const double mag = std::abs(d);
    if (!(mag >= kPivotFloor)) throw RankDeficientError("qr_thin: rank-deficient input");
    const Complex ph = d / mag;
    out.q.col(i) *= ph;
    out.r.row(i) *= std::conj(ph);
    out.r(i, i) = mag;
  }
  return out;
}

/// Singular values in descending order.
inline std::vector<double> svd_values(const CMatrix& m) {
  const auto rows = static_cast<lapack_int>(m.rows());
  const auto cols = static_cast<lapack_int>(m.cols());
  const auto k = std::min(rows, cols);
  std::vector<double> s(static_cast<std::size_t>(k));
  if (k == 0) return s;
  CMatrix work = m;
  const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', rows, cols, work.data(), rows,
                                         s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw ConvergenceError("svd_values: zgesdd failed, info=" + std::to_string(info));
  return s;
}

/// Eigenvalues of a square matrix (N ≤ kEigenvalueCap); real input takes the
/// real-arithmetic path.
inline std::vector<Complex> eigvals(const CMatrix& m, int cap = kEigenvalueCap) {
  if (m.rows() != m.cols()) throw InvalidArgument("eigvals: matrix not square");
  const auto n = static_cast<lapack_int>(m.rows());
  if (n > cap) throw SizeCapError("eigvals: dimension " + std::to_string(n) + " exceeds cap");
  std::vector<Complex> out(static_cast<std::size_t>(n));
  if (n == 0) return out;
  lapack_int info = 0;
  if (m.imag().isZero(0.0)) {
    Eigen::MatrixXd work = m.real();
    std::vector<double> wr(out.size()), wi(out.size());
    info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, wr.data(), wi.data(),
                         nullptr, 1, nullptr, 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {wr[i], wi[i]};
  } else {
    CMatrix work = m;
    info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n,
                         reinterpret_cast<lapack_complex_double*>(out.data()), nullptr, 1, nullptr,
                         1);
  }
  if (info != 0) throw ConvergenceError("eigvals: QR iteration failed, info=" + std::to_string(info));
  return out;
}

inline double operator_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return svd_values(m).front();
}

/// Given Q with orthonormal columns (2ℓ×ℓ), returns Q⊥ such that [Q⊥, Q] is
/// unitary. Q⊥ is the trailing block of the full Householder factor of Q.
inline CMatrix unitary_complement(const CMatrix& q, double tol = 1e-10) {
  const auto rows = q.rows();
  const auto cols = q.cols();
  if (cols > rows) throw InvalidArgument("unitary_complement: more columns than rows");
  const CMatrix gram = q.adjoint() * q;
  if ((gram - CMatrix::Identity(cols, cols)).cwiseAbs().maxCoeff() > tol)
    throw InvalidArgument("unitary_complement: input columns are not orthonormal");
  const Eigen::HouseholderQR<CMatrix> qr(q);
  const CMatrix full = qr.householderQ();
  return full.rightCols(rows - cols);
}

/// H^{-1/2} for Hermitian positive definite H.
inline CMatrix hermitian_inverse_sqrt(const CMatrix& h) {
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw ConvergenceError("hermitian eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev.size() > 0 && !(ev.minCoeff() >= kPivotFloor))
    throw FrameError("Gram matrix is numerically singular");
  const Eigen::VectorXd inv_sqrt = ev.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace bandlab
