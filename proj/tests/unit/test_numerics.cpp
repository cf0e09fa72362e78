#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bandlab/bandlab.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace bandlab;
using support::random_matrix;

TEST(LuLogdet, IdentityIsZero) { EXPECT_EQ(lu_logdet(CMatrix::Identity(5, 5)).log_magnitude, 0.0); }

TEST(LuLogdet, DiagonalTwoThree) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 2.0;
  m(1, 1) = 3.0;
  EXPECT_NEAR(lu_logdet(m).log_magnitude, std::log(6.0), 1e-15);
}

TEST(LuLogdet, MatchesCofactorExpansion) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const CMatrix m = random_matrix(6, 6, seed);
    const Complex det = oracle::cofactor_det(m);
    const auto r = lu_logdet(m);
    EXPECT_NEAR(std::exp(r.log_magnitude) / std::abs(det), 1.0, 1e-8);
    EXPECT_NEAR(std::abs(r.phase - det / std::abs(det)), 0.0, 1e-8);
  }
}

TEST(LuLogdet, SingularThrows) {
  CMatrix m = random_matrix(4, 4, 3);
  m.row(2) = m.row(1);
  m.row(3).setZero();
  EXPECT_THROW(lu_logdet(m), SingularMatrixError);
  EXPECT_EQ(log_abs_det_or_neg_inf(m), -std::numeric_limits<double>::infinity());
}

TEST(LuLogdet, NonSquareRejected) { EXPECT_THROW(lu_logdet(CMatrix::Zero(2, 3)), InvalidArgument); }

TEST(LuLogdet, HugeDynamicRangeStaysFinite) {
  CMatrix m = CMatrix::Identity(40, 40) * 1e-20;
  EXPECT_NEAR(lu_logdet(m).log_magnitude, 40 * std::log(1e-20), 1e-9);
}

TEST(SolveLu, IdentityLeavesRhs) {
  const CMatrix rhs = random_matrix(4, 3, 5);
  EXPECT_EQ(solve_lu(CMatrix::Identity(4, 4), rhs), rhs);
}

TEST(SolveLu, DiagonalDividesEntrywise) {
  CMatrix d = CMatrix::Zero(3, 3);
  d.diagonal() << 2.0, Complex(0, 4), -5.0;
  const CMatrix rhs = random_matrix(3, 2, 6);
  const CMatrix x = solve_lu(d, rhs);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(x(i, j) - rhs(i, j) / d(i, i)), 0.0, 1e-15);
}

TEST(SolveLu, RandomResidual) {
  const CMatrix b = random_matrix(8, 8, 7);
  const CMatrix rhs = random_matrix(8, 3, 8);
  const CMatrix x = solve_lu(b, rhs);
  EXPECT_LT((b * x - rhs).norm(), 1e-10);
  EXPECT_LE((b * x - rhs).norm(), 1e-8 * operator_norm(b) * operator_norm(x));
}

TEST(SolveLu, SingularThrows) {
  EXPECT_THROW(solve_lu(CMatrix::Zero(3, 3), CMatrix::Identity(3, 3)), SingularMatrixError);
}

TEST(QrThin, OrthonormalInputGivesIdentityR) {
  const CMatrix q = support::random_isometry(8, 4, 9);
  const auto r = qr_thin(q);
  EXPECT_LT((r.r - CMatrix::Identity(4, 4)).norm(), 1e-12);
  EXPECT_LT((r.q - q).norm(), 1e-12);
}

TEST(QrThin, ScaledOrthonormalGivesScaledR) {
  const CMatrix q = support::random_isometry(6, 3, 10);
  EXPECT_LT((qr_thin(2.0 * q).r - 2.0 * CMatrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(QrThin, RandomContracts) {
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    const CMatrix m = random_matrix(8, 4, seed);
    const auto [q, r] = qr_thin(m);
    EXPECT_LT((q.adjoint() * q - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((q * r - m).norm() / m.norm(), 1e-10);
    for (int i = 0; i < 4; ++i) {
      EXPECT_GT(r(i, i).real(), 0.0);
      EXPECT_EQ(r(i, i).imag(), 0.0);
      for (int j = 0; j < i; ++j) EXPECT_EQ(r(i, j), Complex(0.0));
    }
  }
}

TEST(QrThin, Deterministic) {
  const CMatrix m = random_matrix(8, 4, 31);
  const auto a = qr_thin(m);
  const auto b = qr_thin(m);
  EXPECT_TRUE(a.q == b.q);
  EXPECT_TRUE(a.r == b.r);
}

TEST(QrThin, RankDeficientThrows) {
  CMatrix m = random_matrix(6, 3, 32);
  m.col(2) = m.col(0);
  m.col(2).setZero();
  EXPECT_THROW(qr_thin(m), RankDeficientError);
}

TEST(SvdValues, IdentityAllOnes) {
  for (double s : svd_values(CMatrix::Identity(5, 5))) EXPECT_NEAR(s, 1.0, 1e-14);
}

TEST(SvdValues, DiagonalDescending) {
  CMatrix m = CMatrix::Zero(3, 3);
  m.diagonal() << 1.0, 3.0, 0.0;
  const auto s = svd_values(m);
  EXPECT_NEAR(s[0], 3.0, 1e-14);
  EXPECT_NEAR(s[1], 1.0, 1e-14);
  EXPECT_NEAR(s[2], 0.0, 1e-14);
}

TEST(SvdValues, LogSumMatchesLogdet) {
  for (std::uint64_t seed = 40; seed < 50; ++seed) {
    const CMatrix m = random_matrix(6, 6, seed);
    const auto s = svd_values(m);
    double acc = 0.0;
    for (double v : s) acc += std::log(v);
    const double ld = lu_logdet(m).log_magnitude;
    EXPECT_LE(std::abs(acc - ld), 1e-8 * std::max(1.0, std::abs(ld)));
    EXPECT_TRUE(std::is_sorted(s.rbegin(), s.rend()));
  }
}

TEST(SvdValues, MatchesEigenJacobi) {
  const CMatrix m = random_matrix(7, 5, 51);
  const auto s = svd_values(m);
  const Eigen::JacobiSVD<CMatrix> ref(m);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(s[static_cast<std::size_t>(i)], ref.singularValues()(i), 1e-8 * s[0]);
}

TEST(Eigvals, DiagonalMatrix) {
  CMatrix m = CMatrix::Zero(3, 3);
  m.diagonal() << Complex(1, 1), 2.0, Complex(0, -3);
  auto ev = eigvals(m);
  for (int i = 0; i < 3; ++i) {
    const auto it = std::find_if(ev.begin(), ev.end(), [&](Complex l) { return std::abs(l - m(i, i)) < 1e-12; });
    EXPECT_NE(it, ev.end());
  }
}

TEST(Eigvals, CompanionOfXSquaredMinusOne) {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  auto ev = eigvals(m);
  std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
  EXPECT_NEAR(std::abs(ev[0] + 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(ev[1] - 1.0), 0.0, 1e-14);
}

TEST(Eigvals, TraceAndDeterminantIdentities) {
  for (bool real : {true, false}) {
    CMatrix m = random_matrix(50, 50, real ? 60 : 61);
    if (real) m = m.real().cast<Complex>();
    const auto ev = eigvals(m);
    const Complex sum = std::accumulate(ev.begin(), ev.end(), Complex(0.0));
    EXPECT_LT(std::abs(sum - m.trace()), 1e-6 * 50);
    double log_prod = 0.0;
    for (Complex l : ev) log_prod += std::log(std::abs(l));
    EXPECT_LT(std::abs(std::expm1(log_prod - lu_logdet(m).log_magnitude)), 1e-4);
  }
}

TEST(Eigvals, CapEnforced) { EXPECT_THROW(eigvals(CMatrix::Zero(10, 10), 5), SizeCapError); }

TEST(UnitaryComplement, CanonicalBottomFrame) {
  CMatrix q = CMatrix::Zero(4, 2);
  q(2, 0) = 1.0;
  q(3, 1) = 1.0;
  const CMatrix perp = unitary_complement(q);
  EXPECT_LT(perp.bottomRows(2).norm(), 1e-14);
  EXPECT_NEAR(std::abs((perp.topRows(2).adjoint() * perp.topRows(2)).determinant()), 1.0, 1e-14);
}

TEST(UnitaryComplement, DiagonalDirectionAtEllOne) {
  CMatrix q(2, 1);
  q << M_SQRT1_2, M_SQRT1_2;
  const CMatrix perp = unitary_complement(q);
  EXPECT_NEAR(std::abs(perp(0, 0)), M_SQRT1_2, 1e-14);
  EXPECT_NEAR(std::abs(perp(0, 0) + perp(1, 0)), 0.0, 1e-14);
}

TEST(UnitaryComplement, RandomUnitarity) {
  for (std::uint64_t seed = 70; seed < 80; ++seed) {
    const CMatrix q = support::random_isometry(8, 4, seed);
    CMatrix full(8, 8);
    full << unitary_complement(q), q;
    EXPECT_LT((full.adjoint() * full - CMatrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(UnitaryComplement, NonOrthonormalRejected) {
  EXPECT_THROW(unitary_complement(2.0 * support::random_isometry(4, 2, 81)), InvalidArgument);
}

TEST(HermitianInverseSqrt, SquaresToInverse) {
  const CMatrix g = random_matrix(5, 5, 90);
  const CMatrix h = g.adjoint() * g + CMatrix::Identity(5, 5);
  const CMatrix s = hermitian_inverse_sqrt(h);
  EXPECT_LT((s * h * s - CMatrix::Identity(5, 5)).norm(), 1e-12);
  EXPECT_THROW(hermitian_inverse_sqrt(CMatrix::Zero(3, 3)), FrameError);
}
