#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fluxmine/representations.hpp"

using namespace fluxmine;

namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Inverse normal CDF by bisection, independent of the library's approximation.
double bisect_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> random_series(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<double> s(n);
  for (double& v : s) v = g(rng);
  return s;
}

}  // namespace

TEST(Paa, ExactBlockMeans) {
  std::vector<double> s{1, 3, 5, 7};
  auto p = paa(s, 2);
  EXPECT_EQ(p.values, (std::vector<double>{2, 6}));
  EXPECT_EQ(p.n, 4);
  EXPECT_EQ(p.w, 2);
}

TEST(Paa, ConstantSeries) {
  std::vector<double> s(1440, 4.25);
  for (int w : {1, 7, 144, 1440})
    for (double v : paa(s, w).values) EXPECT_DOUBLE_EQ(v, 4.25);
}

TEST(Paa, TenMinuteBlocks) {
  std::vector<double> s(1440);
  for (int i = 0; i < 1440; ++i) s[i] = i;
  auto p = paa(s, 144);
  ASSERT_EQ(p.values.size(), 144u);
  for (int b = 0; b < 144; ++b) EXPECT_DOUBLE_EQ(p.values[b], 10.0 * b + 4.5);
}

TEST(Paa, UnevenBlocksUseActualLength) {
  // n=5, w=2: blocks [0,3) and [2,5)
  std::vector<double> s{1, 2, 3, 4, 5};
  auto p = paa(s, 2);
  EXPECT_DOUBLE_EQ(p.values[0], 2.0);
  EXPECT_DOUBLE_EQ(p.values[1], 4.0);
}

TEST(Paa, IdentityAtFullWidthAndLinear) {
  std::mt19937_64 rng(3);
  auto s = random_series(rng, 100);
  EXPECT_EQ(paa(s, 100).values, s);
  std::vector<double> t(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = 2.5 * s[i] - 1.0;
  auto ps = paa(s, 9), pt = paa(t, 9);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(pt.values[i], 2.5 * ps.values[i] - 1.0, 1e-12);
}

TEST(Paa, RejectsBadWidth) {
  std::vector<double> s{1, 2, 3};
  for (int w : {0, 4}) {
    try {
      paa(s, w);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::invalid_width);
    }
  }
}

TEST(ZNormalize, Examples) {
  std::vector<double> two{0, 2};
  EXPECT_EQ(z_normalize(two).values, (std::vector<double>{-1, 1}));
  std::vector<double> four{1, 2, 3, 4};
  auto z = z_normalize(four).values;
  EXPECT_NEAR(z[0], -1.3416, 1e-4);
  EXPECT_NEAR(z[1], -0.4472, 1e-4);
  EXPECT_NEAR(z[2], 0.4472, 1e-4);
  EXPECT_NEAR(z[3], 1.3416, 1e-4);
}

TEST(ZNormalize, ConstantIsDegenerate) {
  std::vector<double> c(20, 7.0);
  auto z = z_normalize(c);
  EXPECT_TRUE(z.degenerate);
  for (double v : z.values) EXPECT_EQ(v, 0.0);
}

TEST(ZNormalize, ZeroMeanUnitStd) {
  std::mt19937_64 rng(5);
  auto s = random_series(rng, 1440);
  for (double& v : s) v = 30.0 + 4.0 * v;
  auto z = z_normalize(s).values;
  double mean = 0, ss = 0;
  for (double v : z) mean += v;
  mean /= z.size();
  for (double v : z) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(ss / z.size()), 1.0, 1e-12);
}

TEST(Breakpoints, SmallAlphabets) {
  EXPECT_EQ(gaussian_breakpoints(2).betas, std::vector<double>{0.0});
  auto b4 = gaussian_breakpoints(4).betas;
  ASSERT_EQ(b4.size(), 3u);
  EXPECT_NEAR(b4[0], -0.6745, 1e-4);
  EXPECT_EQ(b4[1], 0.0);
  EXPECT_NEAR(b4[2], 0.6745, 1e-4);
}

TEST(Breakpoints, MatchBisectionOracleAndEqualMass) {
  for (int a = 2; a <= 26; ++a) {
    auto bp = gaussian_breakpoints(a);
    ASSERT_EQ(int(bp.betas.size()), a - 1);
    for (int i = 1; i < a; ++i) {
      EXPECT_NEAR(bp.betas[i - 1], bisect_quantile(double(i) / a), 1e-12) << "a=" << a << " i=" << i;
      EXPECT_NEAR(bp.betas[i - 1] + bp.betas[a - i - 1], 0.0, 1e-9);
      if (i > 1) {
        EXPECT_LT(bp.betas[i - 2], bp.betas[i - 1]);
      }
    }
    for (int j = 1; j <= a; ++j) {
      const double lo = j == 1 ? 0.0 : phi(bp.beta(j - 1));
      const double hi = j == a ? 1.0 : phi(bp.beta(j));
      EXPECT_NEAR(hi - lo, 1.0 / a, 1e-9);
    }
  }
}

TEST(Breakpoints, NineSymbolsSymmetric) {
  auto bp = gaussian_breakpoints(9);
  ASSERT_EQ(bp.betas.size(), 8u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(bp.betas[i], -bp.betas[7 - i]);
}

TEST(Breakpoints, RejectsBadAlphabet) {
  for (int a : {0, 1, 27}) {
    try {
      gaussian_breakpoints(a);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::invalid_alphabet);
    }
  }
}

TEST(Breakpoints, HalfOpenBins) {
  const auto& bp = cached_breakpoints(4);
  EXPECT_EQ(bp.symbol_of(-1.0), 1);
  EXPECT_EQ(bp.symbol_of(0.1), 3);
  EXPECT_EQ(bp.symbol_of(0.9), 4);
  EXPECT_EQ(bp.symbol_of(0.0), 3);
  EXPECT_EQ(bp.symbol_of(bp.betas[0]), 2);
}

TEST(Sax, SmallExample) {
  // z-normalisation keeps the ordering and moves each value into the same bin
  std::vector<double> s{-1.0, 0.1, 0.9};
  auto word = sax(s, 3, 4);
  EXPECT_EQ(word.symbols, (std::vector<std::uint8_t>{1, 3, 4}));
  EXPECT_EQ(word.letters(), "acd");
}

TEST(Sax, ConstantSeriesMapsToTheBinOfZero) {
  std::vector<double> c(1440, 12.0);
  for (auto s : sax(c, 144, 9).symbols) EXPECT_EQ(s, 5);
  for (auto s : sax(c, 144, 4).symbols) EXPECT_EQ(s, 3);
}

TEST(Sax, DefaultShape) {
  std::mt19937_64 rng(11);
  auto s = random_series(rng, 1440);
  auto w = sax(s, 144, 9);
  EXPECT_EQ(w.symbols.size(), 144u);
  EXPECT_EQ(w.flavor, WordFlavor::sax);
  for (auto c : w.symbols) {
    EXPECT_GE(c, 1);
    EXPECT_LE(c, 9);
  }
}

TEST(Sax, UniformSymbolFrequencies) {
  // w = n so every normalised sample is binned; i.i.d. N(0,1) input
  constexpr int kSamples = 100000;
  constexpr int kAlphabet = 9;
  std::mt19937_64 rng(2024);
  auto s = random_series(rng, kSamples);
  auto w = sax(s, kSamples, kAlphabet);
  std::vector<int> freq(kAlphabet + 1, 0);
  for (auto c : w.symbols) ++freq[c];
  const double p = 1.0 / kAlphabet, mean = kSamples * p, sd = std::sqrt(kSamples * p * (1 - p));
  for (int j = 1; j <= kAlphabet; ++j) EXPECT_NEAR(freq[j], mean, 3 * sd) << "symbol " << j;
}

TEST(Esax, TripletIsMinMeanMax) {
  const double r = std::sqrt(1.5);
  std::vector<double> seg{-r, r, 0.0};  // already mean 0, std 1
  auto w = esax(seg, 1, 4);
  EXPECT_EQ(w.symbols, (std::vector<std::uint8_t>{1, 3, 4}));
}

TEST(Esax, ConstantSeriesTriplesEqual) {
  std::vector<double> c(30, 1.0);
  auto w = esax(c, 10, 5);
  ASSERT_EQ(w.symbols.size(), 30u);
  for (std::size_t i = 0; i < 30; i += 3) {
    EXPECT_EQ(w.symbols[i], w.symbols[i + 1]);
    EXPECT_EQ(w.symbols[i + 1], w.symbols[i + 2]);
  }
}

TEST(Esax, LengthAndMiddleSymbolIsSax) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    auto s = random_series(rng, 1440);
    auto e = esax(s, 144, 9);
    auto x = sax(s, 144, 9);
    ASSERT_EQ(e.symbols.size(), 432u);
    for (int i = 0; i < 144; ++i) {
      EXPECT_EQ(e.symbols[3 * i + 1], x.symbols[i]);
      EXPECT_LE(e.symbols[3 * i], e.symbols[3 * i + 1]);
      EXPECT_LE(e.symbols[3 * i + 1], e.symbols[3 * i + 2]);
    }
  }
}

TEST(SymbolicWord, LettersRoundTrip) {
  auto w = SymbolicWord::from_letters("abcabc", WordFlavor::esax, 3, 20, 2);
  EXPECT_EQ(w.letters(), "abcabc");
  EXPECT_THROW(SymbolicWord::from_letters("abd", WordFlavor::sax, 3, 3, 3), Error);
  EXPECT_THROW(SymbolicWord::from_letters("ab", WordFlavor::sax, 3, 3, 3), Error);
}
