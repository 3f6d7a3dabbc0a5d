#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fluxmine/averaging.hpp"
#include "fluxmine/distances.hpp"
#include "fluxmine/representations.hpp"

namespace fluxmine {

/// A clustering space bundles a point type with its distance and the
/// averaging operation that minimises the (weighted) squared distance.
///
/// average(points, weights, init) must return a point of the same shape;
/// members with zero weight do not contribute. `init` is the previous
/// centroid when one exists (iterative averagers start from it) or nullptr.
template <class S>
concept ClusterSpace = requires(const S& s, const typename S::Point& p, std::span<const typename S::Point> pts,
                                std::span<const double> w) {
  { s.distance(p, p) } -> std::convertible_to<double>;
  { s.average(pts, w, &p) } -> std::same_as<typename S::Point>;
  { s.name() } -> std::convertible_to<std::string>;
};

/// Raw series under the Euclidean norm; centroids are arithmetic means.
struct EuclideanSpace {
  using Point = std::vector<double>;

  double distance(const Point& a, const Point& b) const { return euclidean(a, b); }

  Point average(std::span<const Point> pts, std::span<const double> w, const Point* /*init*/) const {
    return mean_centroid(pts, w).value;
  }

  std::string name() const { return "E"; }
};

/// PAA series under the rescaled Euclidean norm; centroids are means.
struct PaaEuclideanSpace {
  using Point = PaaSeries;

  double distance(const Point& a, const Point& b) const { return paa_euclidean(a, b); }

  Point average(std::span<const Point> pts, std::span<const double> w, const Point* /*init*/) const {
    auto get = [&](std::size_t i) { return std::span<const double>(pts[i].values); };
    return {detail::weighted_mean(pts.size(), get, w), pts.front().n, pts.front().w};
  }

  std::string name() const { return "PAAE"; }
};

/// SAX or ESAX words under MINDIST; centroids are symbolic averages.
struct SymbolicSpace {
  using Point = SymbolicWord;
  WordFlavor flavor = WordFlavor::sax;

  double distance(const Point& a, const Point& b) const { return mindist(a, b); }

  Point average(std::span<const Point> pts, std::span<const double> w, const Point* /*init*/) const {
    return weighted_symbolic_average(pts, w);
  }

  std::string name() const { return flavor == WordFlavor::sax ? "SAX" : "ESAX"; }
};

/// PAA series under banded DTW (rescaled by sqrt(n/w)); centroids by
/// weighted DBA started from the previous centroid.
struct PdtwSpace {
  using Point = PaaSeries;
  BandConfig band = BandConfig::sakoe_chiba(kDefaultBandRadius);
  int dba_iters = kDefaultDbaIterations;
  double dba_tol = kDefaultDbaTolerance;
  std::uint64_t seed = 0;

  double distance(const Point& a, const Point& b) const { return pdtw(a, b, band); }

  Point average(std::span<const Point> pts, std::span<const double> w, const Point* init) const {
    detail::check_weights(pts.size(), w);
    auto get = [&](std::size_t i) { return std::span<const double>(pts[i].values); };
    std::vector<double> current;
    if (init) {
      current = init->values;
    } else {
      std::vector<std::vector<double>> members;
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (detail::weight_at(w, i) > 0.0) members.push_back(pts[i].values);
      current = members[dba_initial_guess(members, band, seed)];
    }
    for (int it = 0; it < dba_iters; ++it) {
      auto step = detail::dba_step(pts.size(), get, w, current, band);
      double change = 0.0;
      for (std::size_t c = 0; c < current.size(); ++c)
        change = std::max(change, std::abs(step.centroid[c] - current[c]));
      current = std::move(step.centroid);
      if (change < dba_tol) break;
    }
    return {std::move(current), pts.front().n, pts.front().w};
  }

  std::string name() const { return "PDTW"; }
};

/// Multivariate bundles: features represented independently, distances
/// summed, centroids averaged feature by feature.
template <ClusterSpace Base>
struct MultivariateSpace {
  using Point = std::vector<typename Base::Point>;
  Base base;

  double distance(const Point& a, const Point& b) const {
    return multivariate_distance<typename Base::Point>(
        a, b, [&](const auto& x, const auto& y) { return base.distance(x, y); });
  }

  Point average(std::span<const Point> pts, std::span<const double> w, const Point* init) const {
    const std::size_t features = pts.front().size();
    Point out;
    std::vector<typename Base::Point> column(pts.size());
    for (std::size_t f = 0; f < features; ++f) {
      for (std::size_t i = 0; i < pts.size(); ++i) column[i] = pts[i][f];
      out.push_back(base.average(column, w, init ? &(*init)[f] : nullptr));
    }
    return out;
  }

  std::string name() const { return "MV-" + base.name(); }
};

// ---------------------------------------------------------------------------
// Named configurations

/// The five representation / similarity pairs.
enum class Representation { e, paae, sax, esax, pdtw };

inline std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::e: return "e";
    case Representation::paae: return "paae";
    case Representation::sax: return "sax";
    case Representation::esax: return "esax";
    case Representation::pdtw: return "pdtw";
  }
  return "?";
}

inline std::optional<Representation> parse_representation(std::string_view s) {
  if (s == "e" || s == "E") return Representation::e;
  if (s == "paae" || s == "PAAE") return Representation::paae;
  if (s == "sax" || s == "SAX") return Representation::sax;
  if (s == "esax" || s == "ESAX") return Representation::esax;
  if (s == "pdtw" || s == "PDTW") return Representation::pdtw;
  return std::nullopt;
}

struct RepresentationParams {
  int paa_width = kDefaultPaaWidth;
  int alphabet = kDefaultAlphabet;
  int band_radius = kDefaultBandRadius;
};

/// Encoders from a raw series into each space's point type.
inline std::vector<double> encode_raw(std::span<const double> s, const RepresentationParams&) {
  return {s.begin(), s.end()};
}
inline PaaSeries encode_paa(std::span<const double> s, const RepresentationParams& p) { return paa(s, p.paa_width); }
inline SymbolicWord encode_sax(std::span<const double> s, const RepresentationParams& p) {
  return sax(s, p.paa_width, p.alphabet);
}
inline SymbolicWord encode_esax(std::span<const double> s, const RepresentationParams& p) {
  return esax(s, p.paa_width, p.alphabet);
}

/// Calls fn(space, encoder) with the concrete space of the representation.
template <class Fn>
decltype(auto) with_space(Representation repr, const RepresentationParams& params, Fn&& fn) {
  switch (repr) {
    case Representation::e: return fn(EuclideanSpace{}, encode_raw);
    case Representation::paae: return fn(PaaEuclideanSpace{}, encode_paa);
    case Representation::sax: return fn(SymbolicSpace{WordFlavor::sax}, encode_sax);
    case Representation::esax: return fn(SymbolicSpace{WordFlavor::esax}, encode_esax);
    case Representation::pdtw: {
      PdtwSpace space;
      space.band = BandConfig::sakoe_chiba(params.band_radius);
      return fn(space, encode_paa);
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown representation");
}

}  // namespace fluxmine
