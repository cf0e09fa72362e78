#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "bandlab/bandlab.hpp"

using namespace bandlab;

namespace {

struct Moments {
  double mean_re = 0, mean_im = 0, var_re = 0, var_im = 0, abs2 = 0, abs4 = 0;
};

Moments moments(const AtomLaw& law, std::uint64_t seed, int count) {
  Stream s(seed);
  Moments m;
  double s_re = 0, s_im = 0, s_re2 = 0, s_im2 = 0, s4 = 0;
  for (int i = 0; i < count; ++i) {
    const Complex x = sample_atom(law, s);
    s_re += x.real();
    s_im += x.imag();
    s_re2 += x.real() * x.real();
    s_im2 += x.imag() * x.imag();
    s4 += std::norm(x) * std::norm(x);
  }
  m.mean_re = s_re / count;
  m.mean_im = s_im / count;
  m.var_re = s_re2 / count - m.mean_re * m.mean_re;
  m.var_im = s_im2 / count - m.mean_im * m.mean_im;
  m.abs2 = (s_re2 + s_im2) / count;
  m.abs4 = s4 / count;
  return m;
}

AtomLaw law_of(AtomKind k) {
  AtomLaw law;
  law.kind = k;
  if (k == AtomKind::smoothed_rademacher) law.smoothing_ell = 100;
  return law;
}

}  // namespace

TEST(Entropy, RealGaussianMeanNearZero) {
  const auto m = moments(law_of(AtomKind::real_gaussian), 11, 1'000'000);
  EXPECT_LT(std::abs(m.mean_re), 0.005);
  EXPECT_EQ(m.mean_im, 0.0);
}

TEST(Entropy, ComplexGaussianUnitVarianceSplitEvenly) {
  const auto m = moments(law_of(AtomKind::complex_gaussian), 12, 1'000'000);
  EXPECT_NEAR(m.abs2, 1.0, 0.005);
  EXPECT_NEAR(m.var_re, 0.5, 0.005);
  EXPECT_NEAR(m.var_im, 0.5, 0.005);
}

TEST(Entropy, RealKindsHaveZeroImaginaryPart) {
  for (auto k : {AtomKind::real_gaussian, AtomKind::real_uniform, AtomKind::smoothed_rademacher}) {
    Stream s(3);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_atom(law_of(k), s).imag(), 0.0);
  }
}

TEST(Entropy, MomentsWithinFiveStandardErrors) {
  constexpr int count = 400'000;
  for (auto k : {AtomKind::real_gaussian, AtomKind::complex_gaussian, AtomKind::real_uniform,
                 AtomKind::smoothed_rademacher}) {
    const auto m = moments(law_of(k), 99 + static_cast<int>(k), count);
    const double se_mean = 1.0 / std::sqrt(count);
    // Var(|ζ|²) = E|ζ|⁴ - 1
    const double se_var = std::sqrt(std::max(m.abs4 - 1.0, 1e-12) / count);
    EXPECT_LT(std::abs(m.mean_re), 5 * se_mean) << to_string(k);
    EXPECT_LT(std::abs(m.mean_im), 5 * se_mean) << to_string(k);
    EXPECT_LT(std::abs(m.abs2 - 1.0), 5 * se_var + 1e-12) << to_string(k);
  }
}

TEST(Entropy, SmoothedRademacherMatchesDefiningFormula) {
  AtomLaw law = law_of(AtomKind::smoothed_rademacher);
  law.smoothing_exponent = 1.0;
  Stream a(5), replay(5);
  for (int i = 0; i < 1000; ++i) {
    const double draw = sample_atom(law, a).real();
    const double sign = replay.coin() ? 1.0 : -1.0;
    const double g = replay.normal();
    EXPECT_DOUBLE_EQ(draw, sign * std::sqrt(1.0 - 1e-4) + 1e-2 * g);
  }
}

TEST(Entropy, SmoothedRademacherFourthMomentMatchesMonteCarloOfFormula) {
  const auto m = moments(law_of(AtomKind::smoothed_rademacher), 21, 1'000'000);
  std::mt19937_64 gen(777);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal;
  double acc = 0.0;
  constexpr int count = 1'000'000;
  for (int i = 0; i < count; ++i) {
    const double x = (coin(gen) ? 1.0 : -1.0) * std::sqrt(1.0 - 1e-4) + 1e-2 * normal(gen);
    acc += x * x * x * x;
  }
  const double reference = acc / count;
  EXPECT_NEAR(m.abs4 / reference, 1.0, 0.02);
}

TEST(Entropy, FillBlockScalarVarianceOneThird) {
  const AtomLaw law;
  Stream s(8);
  double acc = 0.0;
  constexpr int count = 1'000'000;
  for (int i = 0; i < count; ++i) acc += std::norm(fill_block(1, law, s)(0, 0));
  EXPECT_NEAR(acc / count, 1.0 / 3.0, 0.01 / 3.0);
}

TEST(Entropy, FillBlockEntryVarianceAtFifty) {
  const AtomLaw law;
  double acc = 0.0;
  long count = 0;
  for (int t = 0; t < 40; ++t) {
    Stream s(1000 + static_cast<std::uint64_t>(t));
    const CMatrix b = fill_block(50, law, s);
    acc += b.cwiseAbs2().sum();
    count += b.size();
  }
  EXPECT_NEAR(acc / static_cast<double>(count) * 150.0, 1.0, 0.02);
}

TEST(Entropy, FillBlockOperatorNormBounded) {
  const AtomLaw law;
  const double bound = 10.0 * std::sqrt(50.0) / std::sqrt(150.0);
  int within = 0;
  for (int t = 0; t < 100; ++t) {
    Stream s(2000 + static_cast<std::uint64_t>(t));
    if (operator_norm(fill_block(50, law, s)) <= bound) ++within;
  }
  EXPECT_GE(within, 99);
}

TEST(Entropy, SeedSchemeReproducesStreamsBitExactly) {
  const SeedScheme a(42), b(42);
  auto s1 = a.stream(3, 7, Role::block_b);
  auto s2 = b.stream(3, 7, Role::block_b);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(s1.normal(), s2.normal());
}

TEST(Entropy, DistinctTuplesGiveDistinctSeeds) {
  const SeedScheme seeds(42);
  std::set<std::uint64_t> seen;
  for (std::uint64_t trial = 0; trial < 20; ++trial)
    for (std::uint64_t block = 0; block < 20; ++block)
      for (auto role : {Role::block_a, Role::block_b, Role::block_c, Role::frame_xi})
        seen.insert(seeds.derive(trial, block, role));
  EXPECT_EQ(seen.size(), 20u * 20u * 4u);
  EXPECT_NE(SeedScheme(1).derive(0, 0, Role::generic), SeedScheme(2).derive(0, 0, Role::generic));
}

TEST(Entropy, DistinctStreamsAreUncorrelated) {
  const SeedScheme seeds(9);
  auto x = seeds.stream(0, 1, Role::block_a);
  auto y = seeds.stream(0, 2, Role::block_a);
  constexpr int count = 200'000;
  double acc = 0.0;
  for (int i = 0; i < count; ++i) acc += x.normal() * y.normal();
  EXPECT_LT(std::abs(acc / count), 5.0 / std::sqrt(count));
}

TEST(Entropy, LawNamesRoundTrip) {
  for (auto k : {AtomKind::real_gaussian, AtomKind::complex_gaussian, AtomKind::real_uniform,
                 AtomKind::smoothed_rademacher})
    EXPECT_EQ(parse_atom_kind(to_string(k)), k);
  EXPECT_THROW(parse_atom_kind("cauchy"), InvalidArgument);
}

TEST(Entropy, NegativeSmoothingExponentRejected) {
  AtomLaw law = law_of(AtomKind::smoothed_rademacher);
  law.smoothing_exponent = -1.0;
  EXPECT_THROW(law.validate(), InvalidArgument);
}
