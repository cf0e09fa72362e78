#include <gtest/gtest.h>

#include <cmath>

#include "bandlab/bandlab.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace bandlab;

namespace {

BoundaryFrames frames_for(int ell, std::uint64_t seed) {
  Stream s(seed);
  return random_frames(ell, s);
}

long count_nonzero(const CMatrix& m) { return (m.array() != Complex(0.0)).count(); }

}  // namespace

TEST(SampleTridiagonal, SmallestCase) {
  const auto t = sample_tridiagonal(1, 1, {}, 1);
  EXPECT_EQ(t.dimension(), 1);
  EXPECT_EQ(to_dense(t).rows(), 1);
}

TEST(SampleTridiagonal, OuterBlocksVanish) {
  const auto t = sample_tridiagonal(3, 2, {}, 2);
  const CMatrix m = to_dense(t);
  ASSERT_EQ(m.rows(), 6);
  EXPECT_EQ(m.block(0, 4, 2, 2).norm(), 0.0);
  EXPECT_EQ(m.block(4, 0, 2, 2).norm(), 0.0);
  EXPECT_GT(m.block(0, 2, 2, 2).norm(), 0.0);
}

TEST(SampleTridiagonal, FrobeniusNormPerDimension) {
  double acc = 0.0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const auto t = sample_tridiagonal(100, 20, {}, 3, trial);
    acc += to_dense(t).squaredNorm() / static_cast<double>(t.dimension());
  }
  EXPECT_NEAR(acc / 20.0, 1.0, 0.05);
}

TEST(SampleTridiagonal, DeterministicAndTrialDependent) {
  const auto a = sample_tridiagonal(4, 3, {}, 7, 1);
  const auto b = sample_tridiagonal(4, 3, {}, 7, 1);
  const auto c = sample_tridiagonal(4, 3, {}, 7, 2);
  EXPECT_TRUE(to_dense(a) == to_dense(b));
  EXPECT_FALSE(to_dense(a) == to_dense(c));
}

TEST(SampleTridiagonal, RejectsEmptyShape) {
  EXPECT_THROW(sample_tridiagonal(0, 2, {}, 1), InvalidArgument);
  EXPECT_THROW(sample_tridiagonal(2, 0, {}, 1), InvalidArgument);
}

TEST(ToDense, PlainMatchesEntrywiseAssembly) {
  const auto t = sample_tridiagonal(5, 3, {AtomKind::complex_gaussian}, 4);
  for (Complex z : {Complex(0.0), Complex(0.3, -0.2)})
    EXPECT_TRUE(to_dense(t, z) == oracle::dense_plain(t, z));
}

TEST(ToDense, SparsityCount) {
  for (int n : {1, 2, 5}) {
    const auto t = sample_tridiagonal(n, 3, {}, 5);
    EXPECT_LE(count_nonzero(to_dense(t)), static_cast<long>(3 * n - 2) * 9);
  }
}

TEST(ToDense, BorderedShiftSkipsBoundaryRows) {
  const auto t = sample_tridiagonal(1, 1, {}, 6);
  const auto e = build_bordered(t, BoundaryFrames::canonical(1));
  const CMatrix at0 = to_dense(e, 0.0);
  const CMatrix at1 = to_dense(e, 1.0);
  EXPECT_EQ(at1(0, 0), at0(0, 0));
  EXPECT_EQ(at1(2, 2), at0(2, 2));
  EXPECT_EQ(at1(1, 1), at0(1, 1) - 1.0);
}

TEST(ToDense, SizeCap) {
  const auto t = sample_tridiagonal(10, 10, {}, 7);
  EXPECT_THROW(to_dense(t, 0.0, 50), SizeCapError);
}

TEST(ToDense, PeriodicDiffersOnlyInCorners) {
  const int n = 5, ell = 3;
  const auto p = sample_periodic(n, ell, {}, 8);
  const CMatrix diff = to_dense(p) - to_dense(p.base);
  EXPECT_EQ(count_nonzero(diff), 2L * ell * ell);
  EXPECT_TRUE(diff.block(0, (n - 1) * ell, ell, ell) == p.corner_top_right);
  EXPECT_TRUE(diff.block((n - 1) * ell, 0, ell, ell) == p.corner_bottom_left);
}

TEST(SamplePeriodic, CornersAreFreshDraws) {
  const auto p = sample_periodic(4, 2, {}, 9);
  for (const auto* list : {&p.base.a, &p.base.b, &p.base.c})
    for (const auto& m : *list) {
      EXPECT_FALSE(m == p.corner_top_right);
      EXPECT_FALSE(m == p.corner_bottom_left);
    }
  EXPECT_THROW(sample_periodic(2, 2, {}, 9), InvalidArgument);
}

TEST(BuildBordered, CanonicalFrames) {
  const int ell = 2;
  const auto e = build_bordered(sample_tridiagonal(3, ell, {}, 10), BoundaryFrames::canonical(ell));
  const CMatrix id = CMatrix::Identity(ell, ell);
  EXPECT_LT(e.U().norm(), 1e-14);
  EXPECT_LT((e.V().adjoint() * e.V() - id).norm(), 1e-14);
  EXPECT_LT(e.S_plus().norm(), 1e-14);
  EXPECT_LT((e.C_plus() - id).norm(), 1e-14);
}

TEST(BuildBordered, RandomFramesSatisfyInvariants) {
  for (int ell = 1; ell <= 4; ++ell) {
    const auto f = frames_for(ell, 100 + static_cast<std::uint64_t>(ell));
    EXPECT_NEAR(std::abs((f.pi * f.pi.adjoint()).determinant()), 1.0, 1e-10);
    EXPECT_NEAR(std::abs((f.xi.adjoint() * f.xi).determinant()), 1.0, 1e-10);
    const auto e = build_bordered(sample_tridiagonal(3, ell, {}, 11), f);
    const CMatrix id = CMatrix::Identity(ell, ell);
    EXPECT_LT((e.top_row * e.top_row.adjoint() - id).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((e.bottom_row * e.bottom_row.adjoint() - id).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BuildBordered, EllOneComplementOfSecondAxis) {
  BoundaryFrames f;
  f.pi = CMatrix(1, 2);
  f.pi << 1.0, 0.0;
  f.xi = CMatrix(2, 1);
  f.xi << 0.0, 1.0;
  const auto e = build_bordered(sample_tridiagonal(2, 1, {}, 12), f);
  // acting on the state (x_1; x_0) the row is [U, V]; it must annihilate Ξ
  EXPECT_NEAR(std::abs(e.U()(0, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.V()(0, 0)), 0.0, 1e-14);
}

TEST(BuildBordered, TopRowAnnihilatesXi) {
  const int ell = 3;
  const auto f = frames_for(ell, 13);
  const auto e = build_bordered(sample_tridiagonal(2, ell, {}, 13), f);
  CMatrix state_row(ell, 2 * ell);
  state_row << e.U(), e.V();
  EXPECT_LT((state_row * f.xi).norm(), 1e-12);
}

TEST(BuildBordered, UnnormalizedFramesRejected) {
  auto f = BoundaryFrames::canonical(2);
  f.xi *= 2.0;
  EXPECT_THROW(build_bordered(sample_tridiagonal(2, 2, {}, 14), f), FrameError);
}

TEST(BuildBordered, SingularXiRejected) {
  auto f = BoundaryFrames::canonical(2);
  f.xi.col(1) = f.xi.col(0);
  EXPECT_THROW(build_bordered(sample_tridiagonal(2, 2, {}, 15), f), FrameError);
}

TEST(OperatorNormCheck, SampledInstances) {
  EXPECT_TRUE(operator_norm_check(build_bordered(sample_tridiagonal(6, 4, {}, 16), frames_for(4, 16))));
  for (std::uint64_t trial = 0; trial < 50; ++trial)
    EXPECT_TRUE(operator_norm_check(
        build_bordered(sample_tridiagonal(8, 8, {}, 17, trial), frames_for(8, 1000 + trial))));
}

TEST(OperatorNormCheck, ZeroInteriorHasNormAtMostTwo) {
  auto t = sample_tridiagonal(4, 3, {}, 18);
  for (auto* list : {&t.a, &t.b, &t.c})
    for (auto& m : *list) m.setZero();
  const auto e = build_bordered(t, frames_for(3, 18));
  EXPECT_LE(operator_norm(to_dense(e)), 2.0 + 1e-12);
  EXPECT_TRUE(operator_norm_check(e));
}
