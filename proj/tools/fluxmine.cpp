#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include "CLI11.hpp"
#endif
#include "fluxmine/fluxmine.hpp"
#include "fluxmine/io.hpp"

namespace fs = std::filesystem;
using namespace fluxmine;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNoStablePhase = 3 };

struct Failure {
  ExitCode code;
  std::string message;
};

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{kUsage, msg}; }
[[noreturn]] void data_error(const std::string& msg) { throw Failure{kData, msg}; }

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) data_error("missing artifact: " + path);
}

ExitCode exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::io_error:
    case ErrorCode::length_mismatch:
    case ErrorCode::shape_mismatch:
    case ErrorCode::lane_absent:
    case ErrorCode::target_not_found:
    case ErrorCode::empty_cluster:
    case ErrorCode::kind_mismatch: return kData;
    default: return kUsage;
  }
}

std::optional<Date> parse_date_opt(const std::string& text, const char* what) {
  if (text.empty()) return std::nullopt;
  auto d = Date::parse(text);
  if (!d) usage_error(std::string(what) + ": not an ISO date: " + text);
  return d;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = std::stoul(text);
      return {v, v};
    }
    return {std::stoul(text.substr(0, dots)), std::stoul(text.substr(dots + 2))};
  } catch (const std::exception&) {
    usage_error("bad range '" + text + "', expected a..b");
  }
}

// Every artifact gets a sidecar with the full command configuration.
void write_provenance(const fs::path& artifact, const CLI::App& cmd) {
  json j = {{"command", cmd.get_name()}, {"config", cmd.config_to_str(true, false)}};
  write_json(artifact.string() + ".provenance.json", j);
}

std::vector<DailySeries> load_series(const std::string& path) {
  require_file(path);
  std::istringstream in(read_text(path));
  return read_series_store(in);
}

std::vector<DailySeries> complete_only(std::vector<DailySeries> series) {
  std::erase_if(series, [](const DailySeries& s) { return !s.complete(); });
  return series;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  int sensors = 50;
  int days = 30;
  std::string start = "2022-01-01";
  std::uint64_t seed = 1;
  std::string out;
  std::string clean_out;
  std::string inject;
  int random_injections = 0;
  std::string manifest_out;
};

std::vector<synth::InjectionSpec> random_injections(const std::vector<synth::SensorDay>& clean, int count,
                                                    std::uint64_t seed) {
  if (std::size_t(count) > clean.size()) usage_error("more injections than sensor-days");
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::vector<std::size_t> order(clean.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<synth::InjectionSpec> out;
  for (int i = 0; i < count; ++i) {
    const auto& target = clean[order[i]];
    synth::InjectionKind kind;
    switch (i % 4) {
      case 0: kind = synth::ZeroRun{std::uniform_int_distribution<int>(360, 840)(rng), 300}; break;
      case 1: {
        auto s = target.series();
        kind = synth::Spike{int(std::max_element(s.begin(), s.end()) - s.begin()), 10.0};
        break;
      }
      case 2: kind = synth::ConstantReading{std::uniform_int_distribution<std::int32_t>(0, 3)(rng)}; break;
      default: kind = synth::CongestionDip{std::uniform_int_distribution<int>(420, 960)(rng), 180, 0.1}; break;
    }
    out.push_back({kind, target.sensor_id, target.date});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.date, a.sensor_id) < std::tie(b.date, b.sensor_id);
  });
  return out;
}

void run_synth(const SynthOptions& o, const CLI::App& cmd) {
  const auto start = parse_date_opt(o.start, "--start");
  if (o.sensors < 1 || o.days < 1) usage_error("--sensors and --days must be >= 1");
  if (!o.inject.empty() && o.random_injections > 0) usage_error("--inject and --random-injections are exclusive");
  if (!o.inject.empty()) require_file(o.inject);

  auto fleet = synth::archetype_fleet(o.sensors, o.seed);
  auto clean = synth::generate(fleet, *start, o.days);
  std::vector<synth::SensorDay> stream;
  std::vector<synth::ManifestEntry> manifest;
  if (!o.inject.empty()) {
    manifest = manifest_from_json(read_json(o.inject));
    stream = synth::replay(clean, manifest);
  } else {
    auto result = synth::inject(clean, random_injections(clean, o.random_injections, o.seed));
    stream = std::move(result.stream);
    manifest = std::move(result.manifest);
  }

  std::ostringstream csv;
  synth::write_csv(csv, stream);
  write_text_atomic(o.out, csv.str());
  write_provenance(o.out, cmd);
  if (!o.clean_out.empty()) {
    std::ostringstream c;
    synth::write_csv(c, clean);
    write_text_atomic(o.clean_out, c.str());
    write_provenance(o.clean_out, cmd);
  }
  if (!o.manifest_out.empty()) {
    write_json(o.manifest_out, manifest_to_json(manifest));
    write_provenance(o.manifest_out, cmd);
  }
  std::cerr << "synth: " << stream.size() << " sensor-days, " << manifest.size() << " injections\n";
}

// ---------------------------------------------------------------------------
// ingest

struct IngestOptions {
  std::string in;
  std::string out;
  std::string removed;
  std::string macro = "all";
  std::int64_t min_total_flux = kDefaultMinTotalFlux;
};

void run_ingest(const IngestOptions& o, const CLI::App& cmd) {
  auto macro = parse_macro_class(o.macro);
  if (!macro) usage_error("--macro must be light, heavy or all");
  if (o.min_total_flux < 0) usage_error("--min-total-flux must be >= 0");
  require_file(o.in);

  std::ifstream in(o.in);
  auto parsed = parse_records(in);
  for (const auto& e : parsed.errors) std::cerr << o.in << ":" << e.line << ": " << e.message << '\n';
  if (parsed.records.empty()) data_error("no valid records in " + o.in);
  auto cleaned = clean_dataset(assemble_daily_series(parsed.records, *macro), o.min_total_flux);

  std::ostringstream store;
  write_series_store(store, cleaned.kept);
  write_text_atomic(o.out, store.str());
  write_provenance(o.out, cmd);
  if (!o.removed.empty()) {
    write_json(o.removed, cleaning_report_to_json(cleaned.removed));
    write_provenance(o.removed, cmd);
  }
  std::cerr << "ingest: " << parsed.records.size() << " records (" << parsed.rejected() << " rejected), "
            << cleaned.kept.size() << " series kept, " << cleaned.removed.size() << " removed\n";
}

// ---------------------------------------------------------------------------
// cluster

struct ReprOptions {
  int w = kDefaultPaaWidth;
  int alphabet = kDefaultAlphabet;
  int radius = kDefaultBandRadius;

  RepresentationParams params() const { return {w, alphabet, radius}; }
  json to_json() const { return {{"w", w}, {"alphabet", alphabet}, {"radius", radius}}; }
};

void check_repr(const ReprOptions& r) {
  if (r.w < 1 || r.w > kMinutesPerDay) usage_error("--w must lie in [1, 1440]");
  if (r.alphabet < 2 || r.alphabet > 26) usage_error("--alphabet must lie in [2, 26]");
  if (r.radius < 0) usage_error("--radius must be >= 0");
}

struct ClusterOptions {
  std::string series;
  std::string out;
  std::string engine = "kmeans";
  std::string repr = "pdtw";
  ReprOptions r;
  std::size_t k = 3;
  double m = 2.0;
  std::uint64_t seed = 1;
  int max_iters = 100;
  std::size_t p = 0;
  double min_plateau_frac = kDefaultMinPlateauFrac;
  std::size_t min_cluster_size = 1;
  std::string dump_repr;
  std::string dump_distances;
};

template <class Point>
void dump_points(const std::string& path, const std::vector<DailySeries>& series, const std::vector<Point>& pts) {
  std::ostringstream out;
  if constexpr (std::is_same_v<Point, SymbolicWord>) {
    out << kWordHeader << '\n';
    for (std::size_t i = 0; i < pts.size(); ++i) write_word_row(out, series[i].sensor_id, series[i].date, pts[i]);
  } else {
    out << "sensor_id,date,values\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out << series[i].sensor_id << ',' << series[i].date.iso() << ',';
      const std::vector<double>* v;
      if constexpr (std::is_same_v<Point, PaaSeries>) v = &pts[i].values;
      else v = &pts[i];
      for (std::size_t t = 0; t < v->size(); ++t) out << (t ? " " : "") << (*v)[t];
      out << '\n';
    }
  }
  write_text_atomic(path, out.str());
}

void run_cluster(const ClusterOptions& o, const CLI::App& cmd) {
  auto engine = parse_engine(o.engine);
  auto repr = parse_representation(o.repr);
  if (!engine) usage_error("--engine must be kmeans, fuzzy or hca");
  if (!repr) usage_error("--repr must be e, paae, sax, esax or pdtw");
  check_repr(o.r);
  if (o.k < 1) usage_error("--k must be >= 1");
  if (!(o.m > 1.0)) usage_error("--m must be > 1");
  if (!(o.min_plateau_frac > 0.0 && o.min_plateau_frac < 1.0)) usage_error("--min-plateau-frac must lie in (0, 1)");
  if (o.min_cluster_size < 1) usage_error("--min-cluster-size must be >= 1");
  if (*engine == Engine::hca && (*repr == Representation::e || *repr == Representation::paae ||
                                 *repr == Representation::pdtw))
    std::cerr << "warning: HCA on a non-normalized representation tends to group by flux magnitude\n";

  auto series = complete_only(load_series(o.series));
  if (series.empty()) data_error("no complete series in " + o.series);
  const auto params = o.r.params();

  const ExitCode code = with_space(*repr, params, [&](auto space, auto encode) {
    using Space = decltype(space);
    using Point = typename Space::Point;
    if constexpr (std::is_same_v<Space, PdtwSpace>) space.seed = o.seed;
    std::vector<Point> pts;
    pts.reserve(series.size());
    for (const auto& s : series) pts.push_back(encode(s.as_real(), params));
    if (!o.dump_repr.empty()) dump_points(o.dump_repr, series, pts);
    if (!o.dump_distances.empty()) {
      auto dm = pairwise_distances<Point>(pts, [&](const Point& a, const Point& b) { return space.distance(a, b); });
      std::ofstream bin(o.dump_distances, std::ios::binary);
      dm.write_binary(bin);
      if (!bin) data_error("cannot write " + o.dump_distances);
      json order = json::array();
      for (const auto& s : series) order.push_back({{"sensor_id", s.sensor_id}, {"date", s.date}});
      write_json(o.dump_distances + ".json", {{"order", order}, {"space", space.name()}});
    }

    ClusterModel<Point> model;
    switch (*engine) {
      case Engine::kmeans: model = kmeans<Space>(pts, space, {o.k, o.seed, o.max_iters}); break;
      case Engine::fuzzy: {
        FuzzyOptions fo;
        fo.c = o.k;
        fo.m = o.m;
        fo.seed = o.seed;
        fo.max_iters = o.max_iters;
        model = fuzzy_cmeans<Space>(pts, space, fo);
        break;
      }
      case Engine::hca: {
        HcaOptions ho;
        if (o.p > 0) ho.p = o.p;
        ho.min_plateau_frac = o.min_plateau_frac;
        ho.min_cluster_size = o.min_cluster_size;
        HcaOutcome outcome;
        auto result = hca_model<Space>(pts, space, ho, &outcome);
        if (!result) {
          std::cerr << "no_stable_phase: longest plateau " << outcome.cut.plateau_length << " of "
                    << outcome.dendrogram.merges.size() << " merge steps\n";
          return kNoStablePhase;
        }
        model = std::move(*result);
        break;
      }
    }

    json j = model_to_json(model);
    j["representation"] = to_string(*repr);
    j["params"] = o.r.to_json();
    j["m"] = o.m;
    json ids = json::array();
    for (const auto& s : series) ids.push_back({{"sensor_id", s.sensor_id}, {"date", s.date}});
    j["series"] = ids;
    j["config"] = cmd.config_to_str(true, false);
    if (model.fuzzy()) {
      const std::string bin_path = o.out + ".membership.bin";
      std::ostringstream bin;
      write_membership(bin, model.membership, model.k);
      write_text_atomic(bin_path, bin.str());
      j["membership_file"] = fs::path(bin_path).filename().string();
    }
    write_json(o.out, j);
    std::cerr << "cluster: " << model.k << " clusters over " << pts.size() << " series, objective "
              << model.objective << '\n';
    return kOk;
  });
  if (code != kOk) throw Failure{code, "no stable phase found"};
}

// ---------------------------------------------------------------------------
// validate

struct ValidateOptions {
  std::string series;
  std::string out;
  std::string engine = "kmeans";
  std::string repr = "all";
  std::string k = "2..20";
  ReprOptions r;
  std::uint64_t seed = 1;
  int max_iters = 100;
};

void run_validate(const ValidateOptions& o, const CLI::App& cmd) {
  auto engine = parse_engine(o.engine);
  if (!engine || *engine == Engine::hca) usage_error("--engine must be kmeans or fuzzy");
  check_repr(o.r);
  std::vector<Representation> reprs;
  if (o.repr == "all") {
    reprs = {Representation::e, Representation::paae, Representation::sax, Representation::esax,
             Representation::pdtw};
  } else {
    auto r = parse_representation(o.repr);
    if (!r) usage_error("--repr must be e, paae, sax, esax, pdtw or all");
    reprs = {*r};
  }
  const auto [k_min, k_max] = parse_range(o.k);
  if (k_min < 2 || k_max < k_min) usage_error("--k range must satisfy 2 <= a <= b");

  auto series = complete_only(load_series(o.series));
  if (series.size() < k_max) data_error("fewer complete series than the largest k");
  const auto params = o.r.params();
  std::vector<SweepRow> rows;
  for (auto repr : reprs) {
    with_space(repr, params, [&](auto space, auto encode) {
      using Space = decltype(space);
      std::vector<typename Space::Point> pts;
      for (const auto& s : series) pts.push_back(encode(s.as_real(), params));
      auto part = index_sweep<Space>(pts, space, *engine, k_min, k_max, o.seed, std::string(to_string(repr)),
                                     o.max_iters);
      rows.insert(rows.end(), part.begin(), part.end());
    });
  }
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  write_text_atomic(o.out, csv.str());
  write_provenance(o.out, cmd);
  std::cerr << "validate: " << rows.size() << " sweep rows\n";
}

// ---------------------------------------------------------------------------
// detect

struct DetectOptions {
  std::string series;
  std::vector<std::string> models;
  std::string from;
  std::string to;
  std::string history;
  std::string out_dir;
  std::size_t k = kDefaultTopK;
  std::size_t g = kDefaultMinRepeats;
  int h = kDefaultHorizonDays;
  bool agg_minmax = false;
};

Detector load_detector(const std::string& path) {
  require_file(path);
  const json j = read_json(path);
  auto repr = parse_representation(j.at("representation").get<std::string>());
  if (!repr) data_error(path + ": unknown representation");
  const auto& pj = j.at("params");
  const RepresentationParams params{pj.at("w").get<int>(), pj.at("alphabet").get<int>(), pj.at("radius").get<int>()};
  const double m = j.value("m", 2.0);
  const std::string name = fs::path(path).stem().string();
  return with_space(*repr, params, [&](auto space, auto encode) {
    using Point = typename decltype(space)::Point;
    auto model = model_from_json<Point>(j);
    if (model.centroids.empty()) data_error(path + ": model has no centroids");
    return make_detector(name, model, space, encode, params, m);
  });
}

std::string report_name(const Date& d) { return "report-" + d.iso() + ".json"; }

void run_detect(const DetectOptions& o, const CLI::App& cmd) {
  if (o.models.empty()) usage_error("at least one --model is required");
  if (o.k < 1 || o.g < 1 || o.h < 1) usage_error("--top-k, --min-repeats and --horizon must be >= 1");
  auto from = parse_date_opt(o.from, "--from");
  auto to = parse_date_opt(o.to, "--to");
  if (from && to && *to < *from) usage_error("--to precedes --from");

  std::vector<Detector> detectors;
  for (const auto& m : o.models) detectors.push_back(load_detector(m));
  auto series = load_series(o.series);
  std::map<Date, std::vector<DayEntry>> by_day;
  for (const auto& s : series) by_day[s.date].push_back({s.sensor_id, s.as_real()});
  if (by_day.empty()) data_error("no series in " + o.series);
  if (!from) from = by_day.begin()->first;
  if (!to) to = by_day.rbegin()->first;

  fs::create_directories(o.out_dir);
  const std::string history_path = o.history.empty() ? (fs::path(o.out_dir) / "history.json").string() : o.history;
  AnomalyHistory history = load_history(history_path);
  AnomalyConfig cfg;
  cfg.k = o.k;
  cfg.g = o.g;
  cfg.h = o.h;
  cfg.agg_minmax = o.agg_minmax;

  int days = 0;
  for (Date d = *from; d <= *to; d = d.plus_days(1)) {
    auto it = by_day.find(d);
    std::vector<DayEntry> entries = it == by_day.end() ? std::vector<DayEntry>{} : it->second;
    std::set<std::string> seen;
    for (const auto& e : entries)
      if (!seen.insert(e.sensor_id).second)
        data_error("sensor " + e.sensor_id + " appears twice on " + d.iso() + " (mixed macro classes?)");
    std::erase_if(entries, [](const DayEntry& e) {
      return std::any_of(e.values.begin(), e.values.end(), [](double v) { return std::isnan(v); });
    });
    auto [report, next] = run_day(d, entries, detectors, history, cfg);
    history = std::move(next);
    const fs::path path = fs::path(o.out_dir) / report_name(d);
    write_json(path, report_to_json(report));
    json prov = {{"command", cmd.get_name()},
                 {"config", cmd.config_to_str(true, false)},
                 {"detectors", report.detectors},
                 {"degenerate_day", report.degenerate_day}};
    write_json(path.string() + ".provenance.json", prov);
    save_history(history_path, history);
    ++days;
  }
  std::cerr << "detect: " << days << " daily reports in " << o.out_dir << '\n';
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
  std::string series;
  std::string reports;
  std::string out_dir;
  std::string from;
  std::string to;
  double sigma = kDefaultSmoothingSigma;
  std::string min_severity = "mild";
};

void run_report(const ReportOptions& o, const CLI::App& cmd) {
  const std::map<std::string, int> grade{{"none", 0}, {"mild", 1}, {"moderate", 2}, {"severe", 3}};
  if (!grade.count(o.min_severity)) usage_error("--min-severity must be none, mild, moderate or severe");
  if (!(o.sigma > 0.0)) usage_error("--sigma must be > 0");
  auto from = parse_date_opt(o.from, "--from");
  auto to = parse_date_opt(o.to, "--to");
  if (!fs::is_directory(o.reports)) data_error("missing artifact: " + o.reports);

  std::map<std::pair<std::string, Date>, const DailySeries*> lookup;
  auto series = load_series(o.series);
  for (const auto& s : series) lookup[{s.sensor_id, s.date}] = &s;

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.reports)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("report-", 0) == 0 && entry.path().extension() == ".json" &&
        name.find(".provenance") == std::string::npos)
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  fs::create_directories(o.out_dir);

  json summary = json::array();
  for (const auto& file : files) {
    const json day = read_json(file);
    for (const auto& e : day) {
      const Date date = e.at("date").get<Date>();
      if ((from && date < *from) || (to && *to < date)) continue;
      const bool flagged = !e.at("topAGG_rank").is_null() || !e.at("topPOS_rank").is_null();
      const auto severity = e.at("severity").get<std::string>();
      if (!flagged || grade.at(severity) < grade.at(o.min_severity)) continue;
      const auto sensor = e.at("sensor_id").get<std::string>();
      json item = {{"date", date},         {"sensor_id", sensor},        {"confidence", e.at("confidence")},
                   {"severity", severity}, {"agg", e.at("agg")},         {"pos", e.at("pos")},
                   {"topAGG_rank", e.at("topAGG_rank")}, {"topPOS_rank", e.at("topPOS_rank")}};
      auto it = lookup.find({sensor, date});
      if (it != lookup.end()) {
        const std::string plot = date.iso() + "_" + sensor + ".svg";
        std::vector<PlotLine> lines{{it->second->as_real(), "#9a9a9a", 1.0},
                                    {gaussian_smooth(*it->second, o.sigma), "#1f5fbf", 2.0}};
        std::ostringstream svg;
        write_svg_plot(svg, sensor + " " + date.iso() + " (" + severity + ", confidence " +
                                std::to_string(e.at("confidence").get<int>()) + ")",
                       lines);
        write_text_atomic(fs::path(o.out_dir) / plot, svg.str());
        item["plot"] = plot;
      } else {
        item["plot"] = nullptr;
      }
      summary.push_back(item);
    }
  }
  const fs::path out = fs::path(o.out_dir) / "report.json";
  write_json(out, summary);
  write_provenance(out, cmd);
  std::cerr << "report: " << summary.size() << " flagged series from " << files.size() << " daily reports\n";
}

void add_repr_options(CLI::App* cmd, ReprOptions& r) {
  cmd->add_option("--w", r.w, "PAA segments per day")->capture_default_str();
  cmd->add_option("--alphabet", r.alphabet, "SAX/ESAX alphabet size")->capture_default_str();
  cmd->add_option("--radius", r.radius, "Sakoe-Chiba band radius for PDTW")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic flux time-series clustering and anomaly detection"};
  app.set_config("--config", "", "INI configuration file (sections named after commands)");
  app.require_subcommand(1);
  app.fallthrough();
  unsigned jobs = 0;
  app.add_option("--jobs", jobs, "worker threads for data-parallel phases (0 = all cores)")->capture_default_str();

  SynthOptions so;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic flux CSV with optional injected anomalies");
  synth_cmd->add_option("--sensors", so.sensors)->capture_default_str();
  synth_cmd->add_option("--days", so.days)->capture_default_str();
  synth_cmd->add_option("--start", so.start, "first day (ISO date)")->capture_default_str();
  synth_cmd->add_option("--seed", so.seed)->capture_default_str();
  synth_cmd->add_option("--out", so.out, "output CSV")->required();
  synth_cmd->add_option("--clean-out", so.clean_out, "CSV without injections");
  synth_cmd->add_option("--inject", so.inject, "manifest JSON to replay");
  synth_cmd->add_option("--random-injections", so.random_injections, "number of random injections")
      ->capture_default_str();
  synth_cmd->add_option("--manifest-out", so.manifest_out, "ground-truth manifest JSON");

  IngestOptions io;
  auto* ingest_cmd = app.add_subcommand("ingest", "parse, aggregate and clean a minute-level CSV");
  ingest_cmd->add_option("--in", io.in, "input CSV")->required();
  ingest_cmd->add_option("--out", io.out, "series store")->required();
  ingest_cmd->add_option("--removed", io.removed, "cleaning report JSON");
  ingest_cmd->add_option("--macro", io.macro, "light, heavy or all")->capture_default_str();
  ingest_cmd->add_option("--min-total-flux", io.min_total_flux)->capture_default_str();

  ClusterOptions co;
  auto* cluster_cmd = app.add_subcommand("cluster", "train a clustering model");
  cluster_cmd->add_option("--series", co.series, "series store")->required();
  cluster_cmd->add_option("--out", co.out, "model JSON")->required();
  cluster_cmd->add_option("--engine", co.engine, "kmeans, fuzzy or hca")->capture_default_str();
  cluster_cmd->add_option("--repr", co.repr, "e, paae, sax, esax or pdtw")->capture_default_str();
  add_repr_options(cluster_cmd, co.r);
  cluster_cmd->add_option("--k,--c", co.k, "number of clusters")->capture_default_str();
  cluster_cmd->add_option("--m", co.m, "fuzzifier")->capture_default_str();
  cluster_cmd->add_option("--seed", co.seed)->capture_default_str();
  cluster_cmd->add_option("--max-iters", co.max_iters)->capture_default_str();
  cluster_cmd->add_option("--p", co.p, "p-significance threshold (0 = default for N)")->capture_default_str();
  cluster_cmd->add_option("--min-plateau-frac", co.min_plateau_frac)->capture_default_str();
  cluster_cmd->add_option("--min-cluster-size", co.min_cluster_size)->capture_default_str();
  cluster_cmd->add_option("--dump-repr", co.dump_repr, "write the encoded series");
  cluster_cmd->add_option("--dump-distances", co.dump_distances, "write the condensed distance matrix");

  ValidateOptions vo;
  auto* validate_cmd = app.add_subcommand("validate", "validity-index sweep over k");
  validate_cmd->add_option("--series", vo.series, "series store")->required();
  validate_cmd->add_option("--out", vo.out, "sweep CSV")->required();
  validate_cmd->add_option("--engine", vo.engine, "kmeans or fuzzy")->capture_default_str();
  validate_cmd->add_option("--repr", vo.repr, "representation or all")->capture_default_str();
  validate_cmd->add_option("--k", vo.k, "range a..b")->capture_default_str();
  add_repr_options(validate_cmd, vo.r);
  validate_cmd->add_option("--seed", vo.seed)->capture_default_str();
  validate_cmd->add_option("--max-iters", vo.max_iters)->capture_default_str();

  DetectOptions dop;
  auto* detect_cmd = app.add_subcommand("detect", "daily anomaly reports over a date range");
  detect_cmd->add_option("--series", dop.series, "series store")->required();
  detect_cmd->add_option("--model", dop.models, "detector model JSON (repeatable)")->required();
  detect_cmd->add_option("--from", dop.from, "first day (default: first in store)");
  detect_cmd->add_option("--to", dop.to, "last day (default: last in store)");
  detect_cmd->add_option("--history", dop.history, "history JSON (default: <out-dir>/history.json)");
  detect_cmd->add_option("--out-dir", dop.out_dir)->required();
  detect_cmd->add_option("--top-k", dop.k, "size of topAGG and topPOS")->capture_default_str();
  detect_cmd->add_option("--min-repeats", dop.g, "flagged days needed for the history bonus")->capture_default_str();
  detect_cmd->add_option("--horizon", dop.h, "history horizon in days")->capture_default_str();
  detect_cmd->add_flag("--agg-minmax", dop.agg_minmax, "rescale AGG rows by (x-min)/(max-min)");

  ReportOptions ro;
  auto* report_cmd = app.add_subcommand("report", "plots and summary for flagged series");
  report_cmd->add_option("--series", ro.series, "series store")->required();
  report_cmd->add_option("--reports", ro.reports, "directory of daily reports")->required();
  report_cmd->add_option("--out-dir", ro.out_dir)->required();
  report_cmd->add_option("--from", ro.from);
  report_cmd->add_option("--to", ro.to);
  report_cmd->add_option("--sigma", ro.sigma, "smoothing width in minutes")->capture_default_str();
  report_cmd->add_option("--min-severity", ro.min_severity)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    set_parallelism(jobs);
    if (*synth_cmd) run_synth(so, *synth_cmd);
    if (*ingest_cmd) run_ingest(io, *ingest_cmd);
    if (*cluster_cmd) run_cluster(co, *cluster_cmd);
    if (*validate_cmd) run_validate(vo, *validate_cmd);
    if (*detect_cmd) run_detect(dop, *detect_cmd);
    if (*report_cmd) run_report(ro, *report_cmd);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_for(e.code());
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON artifact: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
