#include "drs/io/formats.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "drs/error.hpp"
#include "drs/io/csv.hpp"

namespace drs::io {

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
}

RateUnit parse_rate_unit(std::string_view text) {
  if (text == "kbps") return RateUnit::Kbps;
  if (text == "mbps") return RateUnit::Mbps;
  throw Error(ErrorCode::ParseError, "unknown rate unit '" + std::string(text) + "'");
}

double to_kbps(double value, RateUnit unit) noexcept {
  return unit == RateUnit::Mbps ? value * 1000.0 : value;
}

namespace {

std::string num(double v) { return format_number(v); }

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

int parse_dim(const CsvTable& t, std::size_t r, std::size_t col) {
  long long v = parse_integer(t.rows[r][col], t.line_numbers[r], t.header[col]);
  if (v <= 0 || v > 1 << 16)
    throw Error(ErrorCode::ParseError, "line " + std::to_string(t.line_numbers[r]) + ": dimension out of range");
  return static_cast<int>(v);
}

double parse_rate(const CsvTable& t, std::size_t r, std::size_t col, RateUnit unit) {
  double v = to_kbps(parse_number(t.rows[r][col], t.line_numbers[r], t.header[col]), unit);
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(ErrorCode::ParseError, "line " + std::to_string(t.line_numbers[r]) + ": bitrate must be positive");
  return v;
}

double parse_finite(const CsvTable& t, std::size_t r, std::size_t col) {
  double v = parse_number(t.rows[r][col], t.line_numbers[r], t.header[col]);
  if (!std::isfinite(v))
    throw Error(ErrorCode::NonFinite, "line " + std::to_string(t.line_numbers[r]) + ", column '" + t.header[col] + "'");
  return v;
}

int parse_gop_index(const CsvTable& t, std::size_t r, std::size_t col) {
  long long v = parse_integer(t.rows[r][col], t.line_numbers[r], t.header[col]);
  if (v < 0 || v > 1LL << 31)
    throw Error(ErrorCode::ParseError, "line " + std::to_string(t.line_numbers[r]) + ": gop_index must be nonnegative");
  return static_cast<int>(v);
}

Json resolution_json(const Resolution& r) { return Json::array({r.width, r.height}); }

Resolution resolution_from(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw Error(ErrorCode::ParseError, "resolution must be [width, height]");
  Resolution r{j[0].get<int>(), j[1].get<int>()};
  if (r.width <= 0 || r.height <= 0) throw Error(ErrorCode::ParseError, "resolution must be positive");
  return r;
}

double rate_from(const Json& j, const char* key, RateUnit unit) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_number())
    throw Error(ErrorCode::ParseError, std::string("missing numeric '") + key + "'");
  double v = to_kbps(j[key].get<double>(), unit);
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::ParseError, std::string(key) + " must be positive");
  return v;
}

}  // namespace

// ---- quality log ------------------------------------------------------------

std::vector<ladder::QualityEntry> parse_quality_log(std::string_view csv, RateUnit unit) {
  CsvTable t = parse_csv(csv);
  const std::size_t c_id = t.column("content_id"), c_gop = t.column("gop_index"),
                    c_rate = t.column("bitrate_kbps"), c_w = t.column("width"), c_h = t.column("height"),
                    c_score = t.column("vqm_score");
  std::vector<ladder::QualityEntry> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    ladder::QualityEntry e;
    e.content_id = t.rows[r][c_id];
    e.gop_index = parse_gop_index(t, r, c_gop);
    e.rung_kbps = parse_rate(t, r, c_rate, unit);
    e.resolution = {parse_dim(t, r, c_w), parse_dim(t, r, c_h)};
    e.score = parse_finite(t, r, c_score);
    out.push_back(std::move(e));
  }
  if (out.empty()) throw Error(ErrorCode::EmptyInput, "quality log has no rows");
  return out;
}

std::string format_quality_log(std::span<const ladder::QualityEntry> entries) {
  std::string out = "content_id,gop_index,bitrate_kbps,width,height,vqm_score\n";
  for (const auto& e : entries) {
    const std::string f[] = {e.content_id, std::to_string(e.gop_index), num(e.rung_kbps),
                             std::to_string(e.resolution.width), std::to_string(e.resolution.height),
                             num(e.score)};
    out += csv_line(f);
  }
  return out;
}

// ---- scored points ------------------------------------------------------------

std::vector<rcql::ScoredPoint> parse_scored_points(std::string_view csv, RateUnit unit) {
  CsvTable t = parse_csv(csv);
  const std::size_t c_id = t.column("content_id"), c_res = t.column("resolution"),
                    c_rate = t.column("bitrate_kbps"), c_subj = t.column("subjective_jod"),
                    c_obj = t.column("objective_score");
  std::vector<rcql::ScoredPoint> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    rcql::ScoredPoint p;
    p.content_id = t.rows[r][c_id];
    try {
      p.resolution = parse_resolution(t.rows[r][c_res]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(t.line_numbers[r]) + ": " + e.what());
    }
    p.bitrate_kbps = parse_rate(t, r, c_rate, unit);
    p.subjective_jod = parse_finite(t, r, c_subj);
    p.objective_score = parse_finite(t, r, c_obj);
    out.push_back(std::move(p));
  }
  if (out.empty()) throw Error(ErrorCode::EmptyInput, "scored-point file has no rows");
  return out;
}

std::string format_scored_points(std::span<const rcql::ScoredPoint> points) {
  std::string out = "content_id,resolution,bitrate_kbps,subjective_jod,objective_score\n";
  for (const auto& p : points) {
    const std::string f[] = {p.content_id, to_string(p.resolution), num(p.bitrate_kbps), num(p.subjective_jod),
                             num(p.objective_score)};
    out += csv_line(f);
  }
  return out;
}

// ---- feature log ------------------------------------------------------------

FeatureLog parse_feature_log(std::string_view csv, RateUnit unit) {
  CsvTable t = parse_csv(csv);
  const std::size_t c_id = t.column("content_id"), c_gop = t.column("gop_index"),
                    c_rate = t.column("bitrate_kbps"), c_w = t.column("width"), c_h = t.column("height");
  std::optional<std::size_t> c_label;
  if (t.has_column("label_jod")) c_label = t.column("label_jod");
  const std::set<std::size_t> identity = {c_id, c_gop, c_rate, c_w, c_h};

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (identity.count(c) || (c_label && c == *c_label)) continue;
    feature_cols.push_back(c);
    names.push_back(t.header[c]);
  }
  const bool add_log_rate = !t.has_column("log_bitrate");
  const bool add_log_pixels = !t.has_column("log_pixels");
  if (add_log_rate) names.push_back("log_bitrate");
  if (add_log_pixels) names.push_back("log_pixels");

  FeatureLog log{vqm::FeatureSchema(names), {}};
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    vqm::GopRecord rec;
    rec.content_id = t.rows[r][c_id];
    rec.gop_index = parse_gop_index(t, r, c_gop);
    rec.bitrate_kbps = parse_rate(t, r, c_rate, unit);
    rec.resolution = {parse_dim(t, r, c_w), parse_dim(t, r, c_h)};
    for (std::size_t c : feature_cols) rec.features.push_back(parse_finite(t, r, c));
    if (add_log_rate) rec.features.push_back(std::log(rec.bitrate_kbps));
    if (add_log_pixels) rec.features.push_back(std::log(static_cast<double>(rec.resolution.pixels())));
    if (c_label) {
      const auto& cell = t.rows[r][*c_label];
      if (cell.find_first_not_of(" \t") != std::string::npos) rec.label_jod = parse_finite(t, r, *c_label);
    }
    log.records.push_back(std::move(rec));
  }
  if (log.records.empty()) throw Error(ErrorCode::EmptyInput, "feature log has no rows");
  return log;
}

std::string format_feature_log(const FeatureLog& log) {
  bool labeled = false;
  for (const auto& r : log.records) labeled = labeled || r.label_jod.has_value();
  std::vector<std::string> header = {"content_id", "gop_index", "bitrate_kbps", "width", "height"};
  for (const auto& n : log.schema.names()) header.push_back(n);
  if (labeled) header.push_back("label_jod");
  std::string out = csv_line(header);
  for (const auto& r : log.records) {
    if (r.features.size() != log.schema.size())
      throw Error(ErrorCode::SchemaMismatch, "record width differs from the schema");
    std::vector<std::string> f = {r.content_id, std::to_string(r.gop_index), num(r.bitrate_kbps),
                                  std::to_string(r.resolution.width), std::to_string(r.resolution.height)};
    for (double v : r.features) f.push_back(num(v));
    if (labeled) f.push_back(r.label_jod ? num(*r.label_jod) : std::string());
    out += csv_line(f);
  }
  return out;
}

std::string format_gop_features(std::string_view content_id, std::span<const avc::GopFeatureRow> rows) {
  std::vector<std::string> header = {"content_id", "gop_index", "bitrate_kbps", "width", "height"};
  for (const auto& n : avc::gop_feature_names()) header.push_back(n);
  std::string out = csv_line(header);
  for (const auto& row : rows) {
    std::vector<std::string> f = {std::string(content_id), std::to_string(row.gop_index), num(row.bitrate_kbps),
                                  std::to_string(row.width), std::to_string(row.height)};
    for (double v : avc::feature_values(row)) f.push_back(num(v));
    out += csv_line(f);
  }
  return out;
}

// ---- ladders and manifests ----------------------------------------------------

ladder::Ladder parse_ladder(std::string_view text, RateUnit unit) {
  Json j = parse_json(text);
  // A ladder-selection result carries its ladder under "ladder".
  if (j.is_object() && !j.contains("rungs") && j.contains("ladder")) j = j["ladder"];
  if (!j.is_object() || !j.contains("rungs") || !j["rungs"].is_array())
    throw Error(ErrorCode::ParseError, "ladder JSON needs a 'rungs' array");
  std::vector<ladder::LadderRung> rungs;
  for (const auto& r : j["rungs"]) {
    ladder::LadderRung rung;
    rung.kbps = rate_from(r, "bitrate_kbps", unit);
    if (!r.contains("resolutions") || !r["resolutions"].is_array())
      throw Error(ErrorCode::ParseError, "ladder rung needs a 'resolutions' array");
    for (const auto& res : r["resolutions"]) rung.resolutions.push_back(resolution_from(res));
    rungs.push_back(std::move(rung));
  }
  return ladder::make_ladder(std::move(rungs));
}

Json ladder_json(const ladder::Ladder& ladder) {
  Json rungs = Json::array();
  for (const auto& r : ladder.rungs) {
    Json res = Json::array();
    for (const auto& x : r.resolutions) res.push_back(resolution_json(x));
    rungs.push_back(Json{{"bitrate_kbps", r.kbps}, {"resolutions", res}});
  }
  return Json{{"rungs", rungs}};
}

sim::SegmentManifest parse_manifest(std::string_view text, RateUnit unit) {
  Json j = parse_json(text);
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
    throw Error(ErrorCode::ParseError, "manifest JSON needs an 'entries' array");
  sim::SegmentManifest m;
  if (j.contains("segment_index")) {
    if (!j["segment_index"].is_number_integer()) throw Error(ErrorCode::ParseError, "segment_index must be an integer");
    m.segment_index = j["segment_index"].get<int>();
  }
  for (const auto& e : j["entries"]) {
    sim::ManifestEntry me;
    me.rung_kbps = rate_from(e, "bitrate_kbps", unit);
    if (!e.contains("resolution")) throw Error(ErrorCode::ParseError, "manifest entry needs 'resolution'");
    me.resolution = resolution_from(e["resolution"]);
    if (e.contains("uri")) {
      if (!e["uri"].is_string()) throw Error(ErrorCode::ParseError, "uri must be a string");
      me.uri = e["uri"].get<std::string>();
    }
    if (!e.contains("score") || !e["score"].is_number())
      throw Error(ErrorCode::ParseError, "manifest entry needs a numeric 'score'");
    me.score = e["score"].get<double>();
    m.entries.push_back(std::move(me));
  }
  return m;
}

Json manifest_json(const sim::SegmentManifest& manifest) {
  Json entries = Json::array();
  for (const auto& e : manifest.entries)
    entries.push_back(Json{{"bitrate_kbps", e.rung_kbps},
                           {"resolution", resolution_json(e.resolution)},
                           {"uri", e.uri},
                           {"score", e.score}});
  return Json{{"segment_index", manifest.segment_index}, {"entries", entries}};
}

// ---- analysis outputs ---------------------------------------------------------

Json solution_json(const ladder::LadderSolution& solution) {
  Json trace = Json::array();
  for (const auto& s : solution.trace)
    trace.push_back(Json{{"bitrate_kbps", s.candidate.rung_kbps},
                         {"resolution", resolution_json(s.candidate.resolution)},
                         {"gain", s.gain},
                         {"objective", s.objective},
                         {"seed", s.seed}});
  return Json{{"objective", solution.objective},
              {"representations", solution.selected.size()},
              {"ladder", ladder_json(ladder::to_ladder(solution.selected))},
              {"trace", trace}};
}

std::string format_probability(const ladder::ProbabilityTable& table) {
  std::vector<std::string> header = {"bitrate_kbps"};
  for (const auto& r : table.resolutions) header.push_back("p_" + to_string(r));
  std::string out = csv_line(header);
  for (std::size_t i = 0; i < table.rungs.size(); ++i) {
    std::vector<std::string> f = {num(table.rungs[i])};
    for (double p : table.probability[i]) f.push_back(num(p));
    out += csv_line(f);
  }
  return out;
}

std::string format_trace(const sim::DrsTrace& trace) {
  std::string out = "gop,rung_kbps,width,height,score\n";
  for (const auto& e : trace.entries) {
    const std::string f[] = {std::to_string(e.gop), num(e.rung_kbps), std::to_string(e.resolution.width),
                             std::to_string(e.resolution.height), num(e.score)};
    out += csv_line(f);
  }
  return out;
}

std::string format_rung_summary(const sim::DrsTrace& trace) {
  std::set<Resolution> all;
  for (const auto& r : trace.rungs)
    for (const auto& [res, n] : r.usage) all.insert(res);
  std::vector<std::string> header = {"rung_kbps", "mean_quality", "flips"};
  for (const auto& r : all) header.push_back("gops_" + to_string(r));
  std::string out = csv_line(header);
  for (const auto& r : trace.rungs) {
    std::vector<std::string> f = {num(r.rung_kbps), num(r.mean_quality), std::to_string(r.flips)};
    for (const auto& res : all) {
      auto it = r.usage.find(res);
      f.push_back(std::to_string(it == r.usage.end() ? 0 : it->second));
    }
    out += csv_line(f);
  }
  return out;
}

std::string format_rd_points(std::span<const rd::RDPoint> points) {
  std::string out = "bitrate_kbps,quality\n";
  for (const auto& p : points) {
    const std::string f[] = {num(p.bitrate_kbps), num(p.quality)};
    out += csv_line(f);
  }
  return out;
}

Json bd_json(const sim::BdResult& r) {
  return Json{{"bd_rate_percent", number_or_null(r.bd_rate_percent)},
              {"bd_quality", number_or_null(r.bd_quality)},
              {"quality_interval", Json::array({r.quality_lo, r.quality_hi})},
              {"log10_rate_interval", Json::array({r.log_rate_lo, r.log_rate_hi})}};
}

Json gain_json(const sim::GainStats& s) {
  return Json{{"gops", s.deltas.size()}, {"mean", s.mean}, {"median", s.median}, {"p5", s.p5},
              {"p25", s.p25},            {"p75", s.p75},   {"p95", s.p95},       {"min", s.min},
              {"max", s.max}};
}

std::string format_histogram(std::span<const sim::HistogramBin> bins) {
  std::string out = "left,right,count\n";
  for (const auto& b : bins) {
    const std::string f[] = {num(b.left), num(b.right), std::to_string(b.count)};
    out += csv_line(f);
  }
  return out;
}

Json logistic_json(const Resolution& resolution, const rd::LogisticParams& p) {
  return Json{{"resolution", to_string(resolution)},
              {"beta1", p.beta1},
              {"beta2", p.beta2},
              {"beta3", p.beta3},
              {"beta4", p.beta4},
              {"rss", p.rss},
              {"r_min", p.r_min},
              {"iterations", p.iterations}};
}

Json crossover_json(const rd::CrossOverResult& r) {
  return Json{{"lower", to_string(r.lower_curve)},
              {"higher", to_string(r.higher_curve)},
              {"status", rd::to_string(r.status)},
              {"bitrate_kbps", r.bitrate_kbps ? Json(*r.bitrate_kbps) : Json(nullptr)},
              {"sign_changes", r.sign_changes},
              {"range_kbps", Json::array({r.range.lo, r.range.hi})}};
}

Json rcql_report_json(const rcql::RcqlReport& report) {
  Json summaries = Json::array();
  for (const auto& s : report.summaries)
    summaries.push_back(Json{{"low", to_string(s.pair.low)},
                             {"high", to_string(s.pair.high)},
                             {"contents", s.contents},
                             {"delta_bitrate_kbps", number_or_null(s.delta_bitrate_kbps)},
                             {"rcql_s", number_or_null(s.rcql_s)},
                             {"rcql_avg", number_or_null(s.rcql_avg)},
                             {"acc_percent", number_or_null(s.acc_percent)},
                             {"ql_jod", number_or_null(s.ql_jod)},
                             {"acc_contents", s.acc_contents}});
  Json skipped = Json::array();
  for (const auto& s : report.skipped) skipped.push_back(s);
  return Json{{"srocc", number_or_null(report.correlation.srocc)},
              {"plcc", number_or_null(report.correlation.plcc)},
              {"pairs", summaries},
              {"skipped", skipped}};
}

std::string format_rcql_rows(const rcql::RcqlReport& report) {
  std::string out = csv_line(std::vector<std::string>{
      "low", "high", "content_id", "subjective_xover_kbps", "objective_xover_kbps", "delta_bitrate_kbps",
      "delta_imputed", "rcql_s", "rcql_avg", "acc_percent", "ql_jod"});
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  for (const auto& r : report.rows) {
    const std::string f[] = {to_string(r.pair.low),
                             to_string(r.pair.high),
                             r.content_id,
                             opt(r.subjective_xover.bitrate_kbps),
                             opt(r.objective_xover.bitrate_kbps),
                             num(r.delta_bitrate_kbps),
                             r.delta_imputed ? "1" : "0",
                             num(r.rcql_s),
                             num(r.rcql_avg),
                             opt(r.acc_percent),
                             opt(r.ql_jod)};
    out += csv_line(f);
  }
  return out;
}

Json cv_json(const vqm::CvResult& result) {
  Json per = Json::object();
  for (const auto& [id, m] : result.per_content) {
    auto arr = [](const std::vector<double>& v) {
      Json a = Json::array();
      for (double x : v) a.push_back(number_or_null(x));
      return a;
    };
    per[id] = Json{{"srocc", arr(m.srocc)}, {"plcc", arr(m.plcc)}, {"rmse", arr(m.rmse)}};
  }
  return Json{{"srocc", number_or_null(result.srocc)},
              {"plcc", number_or_null(result.plcc)},
              {"rmse", number_or_null(result.rmse)},
              {"leakage_checks", result.leakage_checks},
              {"per_content", per}};
}

Json gfs_json(const vqm::GfsResult& result) {
  Json steps = Json::array();
  for (const auto& s : result.steps) {
    Json cands = Json::object();
    for (const auto& [name, score] : s.candidate_scores) cands[name] = number_or_null(score);
    steps.push_back(Json{{"feature", s.feature},
                         {"score", number_or_null(s.score)},
                         {"improvement", number_or_null(s.improvement)},
                         {"candidate_scores", cands}});
  }
  return Json{{"selected", result.selected}, {"steps", steps}};
}

}  // namespace drs::io
