#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fluxmine/error.hpp"

namespace fluxmine {

/// Table-2 style defaults: 144 ten-minute segments, 9-letter alphabet.
inline constexpr int kDefaultPaaWidth = 144;
inline constexpr int kDefaultAlphabet = 9;
inline constexpr int kMaxAlphabet = 26;

struct PaaSeries {
  std::vector<double> values;
  int n = 0;  // original length
  int w = 0;  // number of segments

  bool operator==(const PaaSeries&) const = default;
};

/// Segment [begin, end) of the i-th PAA block (0-based). The bounds are
/// floor(n*i/w) and ceil(n*(i+1)/w), so neighbouring blocks share a sample
/// when w does not divide n.
struct Block {
  std::size_t begin;
  std::size_t end;
};

inline Block paa_block(std::size_t n, std::size_t w, std::size_t i) {
  return {(n * i) / w, (n * (i + 1) + w - 1) / w};
}

inline PaaSeries paa(std::span<const double> series, int w) {
  const int n = int(series.size());
  if (w < 1 || w > n)
    throw Error(ErrorCode::invalid_width,
                "PAA width " + std::to_string(w) + " not in [1, " + std::to_string(n) + "]");
  PaaSeries out{std::vector<double>(w), n, w};
  for (int i = 0; i < w; ++i) {
    auto [b, e] = paa_block(n, w, i);
    double sum = 0.0;
    for (std::size_t j = b; j < e; ++j) sum += series[j];
    out.values[i] = sum / double(e - b);
  }
  return out;
}

struct Normalized {
  std::vector<double> values;
  bool degenerate = false;
};

inline constexpr double kDegenerateStd = 1e-9;

/// Per-series z-normalisation with the population standard deviation.
/// A (near-)constant series maps to all zeros and is flagged degenerate.
inline Normalized z_normalize(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw Error(ErrorCode::invalid_argument, "z_normalize needs at least 2 samples");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / double(n);
  double ss = 0.0;
  for (double x : series) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / double(n));
  Normalized out{std::vector<double>(n, 0.0), false};
  if (sd < kDegenerateStd) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) out.values[i] = (series[i] - mean) / sd;
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian breakpoints

namespace detail {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Standard normal quantile: Acklam's rational approximation followed by one
/// Halley step against erfc, which brings it to full double accuracy.
inline double normal_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

}  // namespace detail

/// Equiprobable cut points of N(0,1): betas[i-1] = Phi^-1(i / alphabet).
struct Breakpoints {
  int alphabet = 0;
  std::vector<double> betas;  // alphabet - 1 values, strictly increasing

  /// beta_j for j in [0, alphabet], with beta_0 = -inf and beta_alphabet = +inf.
  double beta(int j) const {
    if (j <= 0) return -HUGE_VAL;
    if (j >= alphabet) return HUGE_VAL;
    return betas[j - 1];
  }

  /// 1-based symbol of x under the half-open rule beta_{j-1} <= x < beta_j.
  int symbol_of(double x) const {
    return 1 + int(std::upper_bound(betas.begin(), betas.end(), x) - betas.begin());
  }
};

inline Breakpoints gaussian_breakpoints(int alphabet) {
  if (alphabet < 2 || alphabet > kMaxAlphabet)
    throw Error(ErrorCode::invalid_alphabet, "alphabet size " + std::to_string(alphabet) + " not in [2, 26]");
  Breakpoints bp{alphabet, std::vector<double>(alphabet - 1)};
  for (int i = 1; i < alphabet; ++i) {
    // exact zero and exact mirror symmetry
    if (2 * i == alphabet)
      bp.betas[i - 1] = 0.0;
    else if (2 * i > alphabet)
      bp.betas[i - 1] = -bp.betas[alphabet - i - 1];
    else
      bp.betas[i - 1] = detail::normal_quantile(double(i) / alphabet);
  }
  return bp;
}

/// Breakpoints are immutable; one shared instance per alphabet size.
inline const Breakpoints& cached_breakpoints(int alphabet) {
  static const std::vector<Breakpoints> table = [] {
    std::vector<Breakpoints> t(kMaxAlphabet + 1);
    for (int a = 2; a <= kMaxAlphabet; ++a) t[a] = gaussian_breakpoints(a);
    return t;
  }();
  if (alphabet < 2 || alphabet > kMaxAlphabet)
    throw Error(ErrorCode::invalid_alphabet, "alphabet size " + std::to_string(alphabet) + " not in [2, 26]");
  return table[alphabet];
}

// ---------------------------------------------------------------------------
// Symbolic words

enum class WordFlavor { sax, esax };

inline std::string_view to_string(WordFlavor f) { return f == WordFlavor::sax ? "sax" : "esax"; }

struct SymbolicWord {
  std::vector<std::uint8_t> symbols;  // 1-based indices into the alphabet
  WordFlavor flavor = WordFlavor::sax;
  int alphabet = 0;
  int n = 0;
  int w = 0;

  std::size_t expected_length() const { return flavor == WordFlavor::sax ? std::size_t(w) : 3 * std::size_t(w); }

  bool same_shape(const SymbolicWord& o) const {
    return flavor == o.flavor && alphabet == o.alphabet && n == o.n && w == o.w &&
           symbols.size() == o.symbols.size();
  }

  /// Letters a..z.
  std::string letters() const {
    std::string s(symbols.size(), '?');
    for (std::size_t i = 0; i < symbols.size(); ++i) s[i] = char('a' + symbols[i] - 1);
    return s;
  }

  static SymbolicWord from_letters(std::string_view text, WordFlavor flavor, int alphabet, int n, int w) {
    SymbolicWord word{{}, flavor, alphabet, n, w};
    word.symbols.reserve(text.size());
    for (char ch : text) {
      const int s = ch - 'a' + 1;
      if (s < 1 || s > alphabet) throw Error(ErrorCode::invalid_symbol, std::string("letter '") + ch + "'");
      word.symbols.push_back(std::uint8_t(s));
    }
    if (word.symbols.size() != word.expected_length())
      throw Error(ErrorCode::shape_mismatch, "word length does not match flavor and width");
    return word;
  }

  bool operator==(const SymbolicWord&) const = default;
};

inline SymbolicWord sax(std::span<const double> series, int w, int alphabet) {
  const auto& bp = cached_breakpoints(alphabet);
  auto norm = z_normalize(series);
  auto p = paa(norm.values, w);
  SymbolicWord word{std::vector<std::uint8_t>(w), WordFlavor::sax, alphabet, p.n, w};
  for (int i = 0; i < w; ++i) word.symbols[i] = std::uint8_t(bp.symbol_of(p.values[i]));
  return word;
}

/// Extended SAX: per segment the (min, mean, max) of the normalised values,
/// binned, in that fixed order.
inline SymbolicWord esax(std::span<const double> series, int w, int alphabet) {
  const auto& bp = cached_breakpoints(alphabet);
  auto norm = z_normalize(series);
  const int n = int(series.size());
  if (w < 1 || w > n)
    throw Error(ErrorCode::invalid_width,
                "PAA width " + std::to_string(w) + " not in [1, " + std::to_string(n) + "]");
  SymbolicWord word{std::vector<std::uint8_t>(3 * std::size_t(w)), WordFlavor::esax, alphabet, n, w};
  for (int i = 0; i < w; ++i) {
    auto [b, e] = paa_block(n, w, i);
    double lo = norm.values[b], hi = norm.values[b], sum = 0.0;
    for (std::size_t j = b; j < e; ++j) {
      lo = std::min(lo, norm.values[j]);
      hi = std::max(hi, norm.values[j]);
      sum += norm.values[j];
    }
    word.symbols[3 * i] = std::uint8_t(bp.symbol_of(lo));
    word.symbols[3 * i + 1] = std::uint8_t(bp.symbol_of(sum / double(e - b)));
    word.symbols[3 * i + 2] = std::uint8_t(bp.symbol_of(hi));
  }
  return word;
}

}  // namespace fluxmine
