#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fluxmine/anomaly.hpp"
#include "fluxmine/clustering.hpp"
#include "fluxmine/date.hpp"
#include "fluxmine/error.hpp"
#include "fluxmine/ingest.hpp"
#include "fluxmine/representations.hpp"
#include "fluxmine/synth.hpp"

namespace fluxmine {

using json = nlohmann::json;

inline void to_json(json& j, const Date& d) { j = d.iso(); }
inline void from_json(const json& j, Date& d) {
  auto parsed = Date::parse(j.get<std::string>());
  if (!parsed) throw Error(ErrorCode::parse_error, "bad date " + j.dump());
  d = *parsed;
}

inline void to_json(json& j, const PaaSeries& p) { j = {{"n", p.n}, {"w", p.w}, {"values", p.values}}; }
inline void from_json(const json& j, PaaSeries& p) {
  j.at("n").get_to(p.n);
  j.at("w").get_to(p.w);
  j.at("values").get_to(p.values);
}

inline void to_json(json& j, const SymbolicWord& s) {
  j = {{"flavor", to_string(s.flavor)}, {"alphabet", s.alphabet}, {"n", s.n}, {"w", s.w}, {"letters", s.letters()}};
}
inline void from_json(const json& j, SymbolicWord& s) {
  const auto flavor = j.at("flavor").get<std::string>() == "esax" ? WordFlavor::esax : WordFlavor::sax;
  s = SymbolicWord::from_letters(j.at("letters").get<std::string>(), flavor, j.at("alphabet").get<int>(),
                                 j.at("n").get<int>(), j.at("w").get<int>());
}

inline void to_json(json& j, const Provenance& p) {
  j = {{"space", p.space}, {"seed", p.seed}, {"hyperparameters", p.hyperparameters}};
}
inline void from_json(const json& j, Provenance& p) {
  j.at("space").get_to(p.space);
  j.at("seed").get_to(p.seed);
  j.at("hyperparameters").get_to(p.hyperparameters);
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary sibling and renames it over the target.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::io_error, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot replace " + path.string() + ": " + ec.message());
}

inline json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Models

/// Manifest for a model; the membership matrix, when present, is stored
/// next to it as binary (uint64 N, then N x k float64, little endian).
template <class Point>
json model_to_json(const ClusterModel<Point>& m) {
  return {{"method", to_string(m.method)},
          {"k", m.k},
          {"centroids", m.centroids},
          {"labels", m.labels},
          {"objective", m.objective},
          {"objective_history", m.objective_history},
          {"iterations", m.iterations},
          {"converged", m.converged},
          {"fuzzy", m.fuzzy()},
          {"provenance", m.provenance}};
}

template <class Point>
ClusterModel<Point> model_from_json(const json& j) {
  ClusterModel<Point> m;
  auto engine = parse_engine(j.at("method").get<std::string>());
  if (!engine) throw Error(ErrorCode::parse_error, "unknown method in model");
  m.method = *engine;
  j.at("k").get_to(m.k);
  j.at("centroids").get_to(m.centroids);
  j.at("labels").get_to(m.labels);
  j.at("objective").get_to(m.objective);
  j.at("objective_history").get_to(m.objective_history);
  j.at("iterations").get_to(m.iterations);
  j.at("converged").get_to(m.converged);
  j.at("provenance").get_to(m.provenance);
  return m;
}

inline void write_membership(std::ostream& out, std::span<const double> membership, std::size_t k) {
  DistanceMatrix::write_u64(out, k == 0 ? 0 : membership.size() / k);
  for (double v : membership) DistanceMatrix::write_f64(out, v);
  if (!out) throw Error(ErrorCode::io_error, "failed writing membership matrix");
}

inline std::vector<double> read_membership(std::istream& in, std::size_t k) {
  const std::uint64_t n = DistanceMatrix::read_u64(in);
  std::vector<double> u(n * k);
  for (double& v : u) v = DistanceMatrix::read_f64(in);
  if (!in) throw Error(ErrorCode::io_error, "truncated membership matrix");
  return u;
}

// ---------------------------------------------------------------------------
// Anomaly artifacts

inline json report_to_json(const AnomalyReport& r) {
  json arr = json::array();
  for (const auto& e : r.entries) {
    arr.push_back({{"sensor_id", e.sensor_id},
                   {"date", e.date},
                   {"scores", e.scores},
                   {"agg", e.agg},
                   {"pos", e.pos},
                   {"topAGG_rank", e.top_agg_rank ? json(*e.top_agg_rank) : json(nullptr)},
                   {"topPOS_rank", e.top_pos_rank ? json(*e.top_pos_rank) : json(nullptr)},
                   {"confidence", e.confidence},
                   {"severity", to_string(e.severity)}});
  }
  return arr;
}

inline json history_to_json(const AnomalyHistory& h) {
  json j = json::object();
  for (const auto& [sensor, dates] : h.flagged) {
    json list = json::array();
    for (const auto& d : dates) list.push_back(d);
    j[sensor] = list;
  }
  return j;
}

inline AnomalyHistory history_from_json(const json& j) {
  AnomalyHistory h;
  for (const auto& [sensor, dates] : j.items())
    for (const auto& d : dates) h.flagged[sensor].insert(d.get<Date>());
  return h;
}

inline AnomalyHistory load_history(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return history_from_json(read_json(path));
}

inline void save_history(const std::filesystem::path& path, const AnomalyHistory& h) {
  write_json(path, history_to_json(h));
}

// ---------------------------------------------------------------------------
// Ingest artifacts

inline json cleaning_report_to_json(std::span<const Removal> removed) {
  json arr = json::array();
  for (const auto& r : removed)
    arr.push_back({{"sensor_id", r.series.sensor_id},
                   {"date", r.series.date},
                   {"macro_class", to_string(r.series.macro_class)},
                   {"lane_scope", to_string(r.series.lane_scope)},
                   {"reason", to_string(r.reason)}});
  return arr;
}

inline constexpr std::string_view kSeriesHeader = "sensor_id,station_id,date,macro_class,lane_scope,values";

/// One series per line; the 1440 values are space separated, empty = missing.
inline void write_series_store(std::ostream& out, std::span<const DailySeries> series) {
  out << kSeriesHeader << '\n';
  for (const auto& s : series) {
    out << s.sensor_id << ',' << s.station_id << ',' << s.date.iso() << ',' << to_string(s.macro_class) << ','
        << to_string(s.lane_scope) << ',';
    for (std::size_t m = 0; m < s.values.size(); ++m) {
      if (m) out << ' ';
      if (s.values[m]) out << *s.values[m];
      else out << '_';
    }
    out << '\n';
  }
}

inline std::vector<DailySeries> read_series_store(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim_cr(line) != kSeriesHeader)
    throw Error(ErrorCode::parse_error, "series store header mismatch");
  std::vector<DailySeries> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = detail::trim_cr(line);
    if (row.empty()) continue;
    auto f = detail::split_commas(row);
    auto fail = [&](const std::string& what) {
      return Error(ErrorCode::parse_error, "series store line " + std::to_string(lineno) + ": " + what);
    };
    if (f.size() != 6) throw fail("expected 6 fields");
    DailySeries s;
    s.sensor_id = std::string(f[0]);
    s.station_id = std::string(f[1]);
    auto date = Date::parse(f[2]);
    auto mc = parse_macro_class(f[3]);
    auto scope = parse_lane_scope(f[4]);
    if (!date || !mc || !scope) throw fail("bad date, class or lane scope");
    s.date = *date;
    s.macro_class = *mc;
    s.lane_scope = *scope;
    std::istringstream vs{std::string(f[5])};
    std::string tok;
    std::size_t m = 0;
    while (vs >> tok) {
      if (m >= s.values.size()) throw fail("too many values");
      if (tok == "_") s.values[m] = std::nullopt;
      else s.values[m] = std::stoi(tok);
      ++m;
    }
    if (m != s.values.size()) throw fail("expected 1440 values");
    out.push_back(std::move(s));
  }
  return out;
}

inline constexpr std::string_view kWordHeader = "sensor_id,date,flavor,letters";

inline void write_word_row(std::ostream& out, const std::string& sensor, const Date& date, const SymbolicWord& w) {
  out << sensor << ',' << date.iso() << ',' << to_string(w.flavor) << ',' << w.letters() << '\n';
}

// ---------------------------------------------------------------------------
// Synthetic ground truth

inline json manifest_to_json(std::span<const synth::ManifestEntry> manifest) {
  json arr = json::array();
  for (const auto& e : manifest)
    arr.push_back({{"sensor_id", e.sensor_id}, {"date", e.date}, {"kind", e.kind}, {"params", e.params}});
  return arr;
}

inline std::vector<synth::ManifestEntry> manifest_from_json(const json& j) {
  std::vector<synth::ManifestEntry> out;
  for (const auto& e : j)
    out.push_back({e.at("sensor_id").get<std::string>(), e.at("date").get<Date>(), e.at("kind").get<std::string>(),
                   e.at("params").get<std::map<std::string, double>>()});
  return out;
}

}  // namespace fluxmine
