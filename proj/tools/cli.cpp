#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "drs/avc/gop_features.hpp"
#include "drs/drs_sim.hpp"
#include "drs/error.hpp"
#include "drs/io/csv.hpp"
#include "drs/io/formats.hpp"
#include "drs/ladder.hpp"
#include "drs/rcql.hpp"
#include "drs/rd_model.hpp"
#include "drs/synthetic.hpp"
#include "drs/vqm.hpp"

namespace drs::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

constexpr const char* kConfigFormat = "drs-run-config";

struct Common {
  std::string units = "kbps";
  int threads = 1;
  std::uint64_t seed = 0;

  io::RateUnit unit() const { return io::parse_rate_unit(units); }
};

// Option values after parsing, defaults included, so the echo is complete.
Json options_json(const CLI::App& sub) {
  Json o = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name.empty()) continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
    } else {
      value = opt->get_default_str();
    }
    o[name] = value;
  }
  return o;
}

class Runner {
 public:
  Runner(std::vector<std::string> args, std::ostream& out, std::ostream& err)
      : args_(std::move(args)), out_(out), err_(err) {}

  int run();

 private:
  void add_common(CLI::App* sub, bool rates, bool threads, bool seed);
  void echo(const CLI::App& sub, const fs::path& path);
  void write_single(const CLI::App& sub, const fs::path& out, const std::string& content);
  void write_in_dir(const fs::path& dir, const std::string& name, const std::string& content);

  // Records in `columns` order, or all when empty.
  io::FeatureLog select_features(io::FeatureLog log, const std::string& columns) const;
  vqm::Hyperparams hyperparams() const;
  vqm::CvConfig cv_config() const;

  void extract_features(const CLI::App& sub);
  void fit(const CLI::App& sub);
  void crossover(const CLI::App& sub);
  void bench_rcql(const CLI::App& sub);
  void analyze_gops(const CLI::App& sub);
  void select_ladder(const CLI::App& sub);
  void simulate(const CLI::App& sub);
  void report(const CLI::App& sub);
  void train(const CLI::App& sub);
  void predict(const CLI::App& sub);
  void cv(const CLI::App& sub);
  void gfs(const CLI::App& sub);
  void filter_manifest(const CLI::App& sub);
  void synthesize(const CLI::App& sub);
  int replay();

  std::vector<std::string> args_;
  std::ostream& out_;
  std::ostream& err_;
  Common common_;

  // Shared option storage; each subcommand binds the subset it uses.
  std::string input_, output_, out_dir_, ladder_, baseline_, quality_, manifest_, model_;
  std::string content_id_;
  double fps_ = 30.0, gop_seconds_ = 2.0;
  std::string low_, high_, score_ = "subjective", pairs_;
  double tie_eps_ = 1e-9;
  std::optional<std::size_t> k_, additional_;
  std::string method_ = "greedy", weights_ = "uniform", bandwidth_;
  std::size_t granularity_ = 1, bins_ = 20;
  std::string bd_method_ = "pchip";
  std::string features_, base_features_, candidates_;
  int trees_ = 100, depth_ = 12, min_leaf_ = 4, mtry_ = 0;
  bool no_bootstrap_ = false;
  int folds_ = 5, runs_ = 1000;
  std::string objective_ = "srocc";
  double epsilon_ = 1e-4;
  std::size_t max_features_ = 0;
  std::string rungs_;
  std::size_t gops_ = 1800;
  double noise_ = 0.15;
  std::string config_;
};

void Runner::add_common(CLI::App* sub, bool rates, bool threads, bool seed) {
  if (rates) sub->add_option("--units", common_.units, "Bitrate unit of inputs")->check(CLI::IsMember({"kbps", "mbps"}));
  if (threads) sub->add_option("--threads", common_.threads, "Worker threads")->check(CLI::PositiveNumber);
  if (seed) sub->add_option("--seed", common_.seed, "Random seed");
}

void Runner::echo(const CLI::App& sub, const fs::path& path) {
  Json j{{"format", kConfigFormat},
         {"version", 1},
         {"command", sub.get_name()},
         {"argv", args_},
         {"options", options_json(sub)}};
  io::write_file(path, io::dump(j));
}

void Runner::write_single(const CLI::App& sub, const fs::path& out, const std::string& content) {
  io::write_file(out, content);
  fs::path cfg = out;
  cfg += ".config.json";
  echo(sub, cfg);
}

void Runner::write_in_dir(const fs::path& dir, const std::string& name, const std::string& content) {
  io::write_file(dir / name, content);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_rate_list(const std::string& text, io::RateUnit unit) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(io::to_kbps(io::parse_number(item, 0, "list"), unit));
  return out;
}

io::FeatureLog Runner::select_features(io::FeatureLog log, const std::string& columns) const {
  if (columns.empty()) return log;
  const auto names = split_list(columns);
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    auto i = log.schema.index_of(n);
    if (!i) throw Error(ErrorCode::SchemaMismatch, "unknown feature '" + n + "'");
    idx.push_back(*i);
  }
  return {log.schema.select(names), vqm::project(log.records, idx)};
}

vqm::Hyperparams Runner::hyperparams() const {
  vqm::Hyperparams hp;
  hp.n_trees = trees_;
  hp.max_depth = depth_;
  hp.min_leaf = min_leaf_;
  hp.feature_subsample = mtry_;
  hp.bootstrap = !no_bootstrap_;
  hp.threads = common_.threads;
  if (!base_features_.empty()) hp.base_features = split_list(base_features_);
  return hp;
}

vqm::CvConfig Runner::cv_config() const {
  vqm::CvConfig cv;
  cv.folds = folds_;
  cv.runs = runs_;
  cv.seed = common_.seed;
  cv.threads = common_.threads;
  return cv;
}

// ---- commands ---------------------------------------------------------------

void Runner::extract_features(const CLI::App& sub) {
  const auto bytes = io::read_binary(input_);
  const auto result = avc::extract_gop_features(bytes, gop_seconds_, fps_);
  const std::string id = content_id_.empty() ? fs::path(input_).stem().string() : content_id_;
  const auto& d = result.diagnostics;
  if (d.malformed_units || d.unsupported_units || d.missing_parameter_set_units)
    err_ << "warning: malformed=" << d.malformed_units << " unsupported=" << d.unsupported_units
         << " missing_parameter_set=" << d.missing_parameter_set_units << "\n";
  write_single(sub, output_, io::format_gop_features(id, result.rows));
}

namespace {

struct Group {
  std::vector<rd::RDPoint> subjective, objective;
};

std::map<std::pair<std::string, Resolution>, Group> group_points(const std::vector<rcql::ScoredPoint>& pts) {
  std::map<std::pair<std::string, Resolution>, Group> groups;
  for (const auto& p : pts) {
    auto& g = groups[{p.content_id, p.resolution}];
    g.subjective.push_back({p.bitrate_kbps, p.subjective_jod});
    g.objective.push_back({p.bitrate_kbps, p.objective_score});
  }
  return groups;
}

}  // namespace

void Runner::fit(const CLI::App& sub) {
  const auto pts = io::parse_scored_points(io::read_file(input_), common_.unit());
  Json fits = Json::array();
  Json skipped = Json::array();
  for (const auto& [key, g] : group_points(pts)) {
    if (g.subjective.size() < 4) {
      skipped.push_back(key.first + " " + to_string(key.second) + ": fewer than 4 points");
      continue;
    }
    const rd::RDCurve subj(key.second, g.subjective), obj(key.second, g.objective);
    fits.push_back(Json{{"content_id", key.first},
                        {"subjective", io::logistic_json(key.second, rd::fit_logistic(subj))},
                        {"objective", io::logistic_json(key.second, rd::fit_logistic(obj))}});
  }
  write_single(sub, output_, io::dump(Json{{"fits", fits}, {"skipped", skipped}}));
}

void Runner::crossover(const CLI::App& sub) {
  const auto pts = io::parse_scored_points(io::read_file(input_), common_.unit());
  const Resolution lo = parse_resolution(low_), hi = parse_resolution(high_);
  const bool use_subjective = score_ == "subjective";
  const auto groups = group_points(pts);
  std::set<std::string> contents;
  for (const auto& p : pts) contents.insert(p.content_id);
  Json rows = Json::array();
  Json skipped = Json::array();
  for (const auto& id : contents) {
    auto a = groups.find({id, lo}), b = groups.find({id, hi});
    if (a == groups.end() || b == groups.end()) {
      skipped.push_back(id + ": missing resolution");
      continue;
    }
    const auto& pa = use_subjective ? a->second.subjective : a->second.objective;
    const auto& pb = use_subjective ? b->second.subjective : b->second.objective;
    if (pa.size() < 4 || pb.size() < 4) {
      skipped.push_back(id + ": fewer than 4 points");
      continue;
    }
    const rd::RDCurve ca(lo, pa), cb(hi, pb);
    const rd::BitrateRange range{std::min(ca.min_bitrate(), cb.min_bitrate()),
                                 std::max(ca.max_bitrate(), cb.max_bitrate())};
    auto x = rd::find_crossover(rd::FittedCurve{lo, rd::fit_logistic(ca)}, rd::FittedCurve{hi, rd::fit_logistic(cb)},
                                range);
    Json row = io::crossover_json(x);
    row["content_id"] = id;
    rows.push_back(row);
  }
  write_single(sub, output_, io::dump(Json{{"score", score_}, {"crossovers", rows}, {"skipped", skipped}}));
}

void Runner::bench_rcql(const CLI::App& sub) {
  const auto pts = io::parse_scored_points(io::read_file(input_), common_.unit());
  std::vector<rcql::ResolutionPair> pairs;
  for (const auto& item : split_list(pairs_)) {
    auto colon = item.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::ParseError, "pair must be LOW:HIGH, got '" + item + "'");
    pairs.push_back({parse_resolution(item.substr(0, colon)), parse_resolution(item.substr(colon + 1))});
  }
  if (pairs.empty()) throw Error(ErrorCode::ParseError, "no resolution pairs given");
  rcql::BenchOptions opt;
  opt.tie_eps = tie_eps_;
  const auto report = rcql::bench(pts, pairs, opt);
  for (const auto& s : report.skipped) err_ << "note: skipped " << s << "\n";
  write_in_dir(out_dir_, "rcql_report.json", io::dump(io::rcql_report_json(report)));
  write_in_dir(out_dir_, "rcql_rows.csv", io::format_rcql_rows(report));
  echo(sub, fs::path(out_dir_) / "config.json");
}

void Runner::analyze_gops(const CLI::App& sub) {
  const auto entries = io::parse_quality_log(io::read_file(quality_), common_.unit());
  const auto log = ladder::QualityLog::from_entries(entries);
  const auto table = ladder::best_resolution_probability(log);
  write_in_dir(out_dir_, "probability.csv", io::format_probability(table));
  write_in_dir(out_dir_, "cumulative.csv", io::format_probability(ladder::cumulative_probability(table)));
  echo(sub, fs::path(out_dir_) / "config.json");
}

void Runner::select_ladder(const CLI::App& sub) {
  const auto unit = common_.unit();
  const auto log = ladder::QualityLog::from_entries(io::parse_quality_log(io::read_file(quality_), unit));
  const std::size_t n_rungs = log.rungs().size();

  std::vector<double> weights;
  if (!bandwidth_.empty()) {
    const auto table = io::parse_csv(io::read_file(bandwidth_));
    const std::size_t col = table.column("bandwidth_kbps");
    std::vector<double> samples;
    for (std::size_t r = 0; r < table.rows.size(); ++r)
      samples.push_back(io::to_kbps(io::parse_number(table.rows[r][col], table.line_numbers[r], "bandwidth_kbps"), unit));
    weights = ladder::weights_from_bandwidth(samples, log.rungs());
  } else if (weights_ == "uniform") {
    weights.assign(n_rungs, 1.0 / static_cast<double>(n_rungs));
  } else {
    for (const auto& w : split_list(weights_)) weights.push_back(io::parse_number(w, 0, "--weights"));
  }

  std::vector<ladder::Candidate> required;
  if (!baseline_.empty()) required = io::parse_ladder(io::read_file(baseline_), unit).candidates();

  std::size_t k = 0;
  if (k_) {
    k = *k_;
  } else if (additional_) {
    if (required.empty()) throw Error(ErrorCode::InvalidRange, "--additional needs --baseline");
    k = required.size() + *additional_;
  } else {
    throw Error(ErrorCode::InvalidRange, "give --k or --additional");
  }

  const auto problem = ladder::make_problem(log, weights, k, {}, required);
  const auto solution =
      method_ == "exhaustive" ? ladder::optimize_exhaustive(problem) : ladder::optimize_greedy(problem);
  Json j = io::solution_json(solution);
  j["method"] = method_;
  j["k"] = k;
  j["weights"] = weights;
  write_single(sub, output_, io::dump(j));
}

namespace {

rd::RDCurve curve_of(const sim::DrsTrace& t) { return rd::RDCurve(Resolution{}, t.rd_points()); }

sim::BdMethod bd_method_of(const std::string& s) {
  return s == "logistic" ? sim::BdMethod::Logistic : sim::BdMethod::Pchip;
}

std::vector<rd::RDPoint> read_rd_points(const fs::path& path) {
  const auto t = io::parse_csv(io::read_file(path));
  const std::size_t cr = t.column("bitrate_kbps"), cq = t.column("quality");
  std::vector<rd::RDPoint> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    out.push_back({io::parse_number(t.rows[r][cr], t.line_numbers[r], "bitrate_kbps"),
                   io::parse_number(t.rows[r][cq], t.line_numbers[r], "quality")});
  return out;
}

}  // namespace

void Runner::simulate(const CLI::App& sub) {
  const auto unit = common_.unit();
  const auto log = ladder::QualityLog::from_entries(io::parse_quality_log(io::read_file(quality_), unit));
  const auto lad = io::parse_ladder(io::read_file(ladder_), unit);
  const auto trace = sim::simulate(log, lad, granularity_);
  const auto method = bd_method_of(bd_method_);
  std::optional<sim::DrsTrace> base;
  std::optional<sim::BdResult> bd;
  if (!baseline_.empty()) {
    base = sim::simulate(log, io::parse_ladder(io::read_file(baseline_), unit), granularity_);
    bd = sim::bd_compare(curve_of(*base), curve_of(trace), method);
  }

  const fs::path dir = out_dir_;
  write_in_dir(dir, "trace.csv", io::format_trace(trace));
  write_in_dir(dir, "rungs.csv", io::format_rung_summary(trace));
  write_in_dir(dir, "rd.csv", io::format_rd_points(trace.rd_points()));
  if (base) {
    write_in_dir(dir, "baseline_trace.csv", io::format_trace(*base));
    write_in_dir(dir, "baseline_rungs.csv", io::format_rung_summary(*base));
    write_in_dir(dir, "baseline_rd.csv", io::format_rd_points(base->rd_points()));
    write_in_dir(dir, "bd.json", io::dump(io::bd_json(*bd)));
    Json gains = Json::array();
    std::vector<double> pooled;
    for (const auto& r : trace.rungs) {
      const auto g = sim::gain_distribution(*base, trace, r.rung_kbps);
      Json j = io::gain_json(g);
      j["rung_kbps"] = r.rung_kbps;
      gains.push_back(j);
      pooled.insert(pooled.end(), g.deltas.begin(), g.deltas.end());
    }
    write_in_dir(dir, "gains.json", io::dump(Json{{"rungs", gains}}));
    write_in_dir(dir, "gain_histogram.csv", io::format_histogram(sim::histogram(pooled, bins_)));
  }
  echo(sub, dir / "config.json");
}

void Runner::report(const CLI::App& sub) {
  const fs::path dir = input_;
  const auto drs_pts = read_rd_points(dir / "rd.csv");
  const auto base_pts = read_rd_points(dir / "baseline_rd.csv");
  const auto bd = sim::bd_compare(rd::RDCurve(Resolution{}, base_pts), rd::RDCurve(Resolution{}, drs_pts),
                                  bd_method_of(bd_method_));
  Json rungs = Json::array();
  std::ostringstream table;
  table << "rung_kbps  baseline  drs  delta\n";
  for (std::size_t i = 0; i < std::min(drs_pts.size(), base_pts.size()); ++i) {
    const double d = drs_pts[i].quality - base_pts[i].quality;
    rungs.push_back(Json{{"rung_kbps", drs_pts[i].bitrate_kbps},
                         {"baseline", base_pts[i].quality},
                         {"drs", drs_pts[i].quality},
                         {"delta", d}});
    table << io::format_number(drs_pts[i].bitrate_kbps) << "  " << io::format_number(base_pts[i].quality) << "  "
          << io::format_number(drs_pts[i].quality) << "  " << io::format_number(d) << "\n";
  }
  Json j{{"bd", io::bd_json(bd)}, {"rungs", rungs}};
  if (fs::exists(dir / "gains.json")) j["gains"] = io::parse_json(io::read_file(dir / "gains.json"))["rungs"];
  write_single(sub, output_, io::dump(j));
  out_ << table.str() << "bd_rate_percent " << io::format_number(bd.bd_rate_percent) << "\nbd_quality "
       << io::format_number(bd.bd_quality) << "\n";
}

void Runner::train(const CLI::App& sub) {
  auto log = select_features(io::parse_feature_log(io::read_file(input_), common_.unit()), features_);
  const auto model = vqm::train(log.records, log.schema, hyperparams(), common_.seed);
  write_single(sub, output_, vqm::to_json(model));
}

void Runner::predict(const CLI::App& sub) {
  const auto model = vqm::model_from_json(io::read_file(model_));
  const auto log = io::parse_feature_log(io::read_file(input_), common_.unit());
  std::vector<std::size_t> idx;
  for (const auto& n : model.schema.names()) {
    auto i = log.schema.index_of(n);
    if (!i) throw Error(ErrorCode::SchemaMismatch, "feature log lacks model feature '" + n + "'");
    idx.push_back(*i);
  }
  std::vector<ladder::QualityEntry> entries;
  for (const auto& r : vqm::project(log.records, idx))
    entries.push_back({r.content_id, r.gop_index, r.bitrate_kbps, r.resolution, vqm::predict(model, r.features)});
  write_single(sub, output_, io::format_quality_log(entries));
}

void Runner::cv(const CLI::App& sub) {
  auto log = select_features(io::parse_feature_log(io::read_file(input_), common_.unit()), features_);
  const auto result = vqm::cross_validate(log.records, log.schema, cv_config(), hyperparams(), common_.seed);
  write_in_dir(out_dir_, "cv.json", io::dump(io::cv_json(result)));
  echo(sub, fs::path(out_dir_) / "config.json");
}

void Runner::gfs(const CLI::App& sub) {
  auto log = select_features(io::parse_feature_log(io::read_file(input_), common_.unit()), candidates_);
  vqm::GfsOptions opt;
  opt.objective = vqm::parse_objective(objective_);
  opt.epsilon = epsilon_;
  if (max_features_ > 0) opt.max_features = max_features_;
  opt.cv = cv_config();
  opt.hyperparams = hyperparams();
  opt.seed = common_.seed;
  const auto result = vqm::greedy_feature_selection(log.records, log.schema, opt);
  write_single(sub, output_, io::dump(io::gfs_json(result)));
}

void Runner::filter_manifest(const CLI::App& sub) {
  const auto unit = common_.unit();
  const auto manifest = io::parse_manifest(io::read_file(manifest_), unit);
  std::vector<double> rungs;
  if (!ladder_.empty()) {
    for (const auto& r : io::parse_ladder(io::read_file(ladder_), unit).rungs) rungs.push_back(r.kbps);
  } else {
    rungs = parse_rate_list(rungs_, unit);
  }
  write_single(sub, output_, io::dump(io::manifest_json(sim::filter_manifest(manifest, rungs))));
}

void Runner::synthesize(const CLI::App& sub) {
  synthetic::QualityLogOptions opt;
  opt.gops = gops_;
  opt.noise = noise_;
  opt.seed = common_.seed;
  if (!content_id_.empty()) opt.content_id = content_id_;
  write_single(sub, output_, io::format_quality_log(synthetic::quality_log(opt)));
}

int Runner::replay() {
  const Json cfg = io::parse_json(io::read_file(config_));
  if (!cfg.is_object() || cfg.value("format", "") != kConfigFormat || !cfg.contains("argv"))
    throw Error(ErrorCode::ParseError, "'" + config_ + "' is not a run config");
  const auto argv = cfg["argv"].get<std::vector<std::string>>();
  if (argv.empty() || argv.front() == "replay") throw Error(ErrorCode::ParseError, "config holds no replayable run");
  return Runner(argv, out_, err_).run();
}

int Runner::run() {
  CLI::App app{"Dynamic resolution selection toolkit", "drs"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  auto* ef = app.add_subcommand("extract-features", "Per-GOP bitstream features from an H.264 Annex B stream");
  ef->add_option("-i,--input", input_, "Input .264 file")->required();
  ef->add_option("--fps", fps_, "Frame rate")->check(CLI::PositiveNumber);
  ef->add_option("--gop-seconds", gop_seconds_, "Nominal GOP duration")->check(CLI::PositiveNumber);
  ef->add_option("--content-id", content_id_, "Content id column (default: file stem)");
  ef->add_option("-o,--out", output_, "Feature-log CSV")->required();

  auto* fi = app.add_subcommand("fit", "Logistic RD fits per (content, resolution)");
  fi->add_option("-i,--input", input_, "Scored-point CSV")->required();
  fi->add_option("-o,--out", output_, "Fits JSON")->required();
  add_common(fi, true, false, false);

  auto* xo = app.add_subcommand("crossover", "Cross-over bitrate between two resolutions per content");
  xo->add_option("-i,--input", input_, "Scored-point CSV")->required();
  xo->add_option("--low", low_, "Lower resolution, WxH")->required();
  xo->add_option("--high", high_, "Higher resolution, WxH")->required();
  xo->add_option("--score", score_, "Score column")->check(CLI::IsMember({"subjective", "objective"}));
  xo->add_option("-o,--out", output_, "Cross-over JSON")->required();
  add_common(xo, true, false, false);

  auto* br = app.add_subcommand("bench-rcql", "Cross-over-aware quality-metric benchmark");
  br->add_option("-i,--input", input_, "Scored-point CSV")->required();
  br->add_option("--pairs", pairs_, "Resolution pairs LOW:HIGH,...")->required();
  br->add_option("--tie-eps", tie_eps_, "Subjective tie tolerance");
  br->add_option("--out-dir", out_dir_, "Output directory")->required();
  add_common(br, true, false, false);

  auto* ag = app.add_subcommand("analyze-gops", "Best-resolution probability per rung");
  ag->add_option("-q,--quality-log", quality_, "Quality-log CSV")->required();
  ag->add_option("--out-dir", out_dir_, "Output directory")->required();
  add_common(ag, true, false, false);

  auto* sl = app.add_subcommand("select-ladder", "Choose resolutions per rung");
  sl->add_option("-q,--quality-log", quality_, "Quality-log CSV")->required();
  sl->add_option("--baseline", baseline_, "Ladder JSON whose representations are kept");
  auto* k_opt = sl->add_option("--k", k_, "Total representation budget");
  sl->add_option("--additional", additional_, "Representations on top of the baseline")->excludes(k_opt);
  sl->add_option("--method", method_, "Solver")->check(CLI::IsMember({"greedy", "exhaustive"}));
  auto* w_opt = sl->add_option("--weights", weights_, "'uniform' or one weight per rung");
  sl->add_option("--bandwidth", bandwidth_, "CSV with a bandwidth_kbps column")->excludes(w_opt);
  sl->add_option("-o,--out", output_, "Solution JSON")->required();
  add_common(sl, true, false, false);

  auto* si = app.add_subcommand("simulate", "Per-GOP resolution switching over a ladder");
  si->add_option("-q,--quality-log", quality_, "Quality-log CSV")->required();
  si->add_option("--ladder", ladder_, "Ladder or solution JSON")->required();
  si->add_option("--baseline", baseline_, "Static ladder to compare against");
  si->add_option("--granularity", granularity_, "GOPs per switching window")->check(CLI::PositiveNumber);
  si->add_option("--bins", bins_, "Gain histogram bins")->check(CLI::PositiveNumber);
  si->add_option("--bd-method", bd_method_, "BD interpolation")->check(CLI::IsMember({"pchip", "logistic"}));
  si->add_option("--out-dir", out_dir_, "Output directory")->required();
  add_common(si, true, false, false);

  auto* rp = app.add_subcommand("report", "BD summary of a simulate output directory");
  rp->add_option("-i,--input", input_, "simulate --out-dir with a baseline")->required();
  rp->add_option("--bd-method", bd_method_, "BD interpolation")->check(CLI::IsMember({"pchip", "logistic"}));
  rp->add_option("-o,--out", output_, "Report JSON")->required();

  auto add_forest = [this](CLI::App* sub) {
    sub->add_option("--trees", trees_, "Trees")->check(CLI::PositiveNumber);
    sub->add_option("--depth", depth_, "Max depth (<= 0 unlimited)");
    sub->add_option("--min-leaf", min_leaf_, "Min samples per leaf")->check(CLI::PositiveNumber);
    sub->add_option("--mtry", mtry_, "Features tried per split (0: ceil sqrt d)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--no-bootstrap", no_bootstrap_, "Train each tree on all records");
    sub->add_option("--base-features", base_features_, "Affine base features, comma separated");
  };
  auto add_cv = [this](CLI::App* sub) {
    sub->add_option("--folds", folds_, "Folds")->check(CLI::PositiveNumber);
    sub->add_option("--runs", runs_, "Repetitions")->check(CLI::PositiveNumber);
  };

  auto* tr = app.add_subcommand("train", "Train the GOP quality model");
  tr->add_option("-i,--input", input_, "Labeled feature-log CSV")->required();
  tr->add_option("--features", features_, "Feature subset, comma separated (default: all)");
  add_forest(tr);
  tr->add_option("-o,--out", output_, "Model JSON")->required();
  add_common(tr, true, true, true);

  auto* pr = app.add_subcommand("predict", "Score a feature log into a quality log");
  pr->add_option("-m,--model", model_, "Model JSON")->required();
  pr->add_option("-i,--input", input_, "Feature-log CSV")->required();
  pr->add_option("-o,--out", output_, "Quality-log CSV")->required();
  add_common(pr, true, false, false);

  auto* cvc = app.add_subcommand("cv", "Content-split repeated k-fold cross-validation");
  cvc->add_option("-i,--input", input_, "Labeled feature-log CSV")->required();
  cvc->add_option("--features", features_, "Feature subset, comma separated (default: all)");
  add_forest(cvc);
  add_cv(cvc);
  cvc->add_option("--out-dir", out_dir_, "Output directory")->required();
  add_common(cvc, true, true, true);

  auto* gf = app.add_subcommand("gfs", "Greedy forward feature selection");
  gf->add_option("-i,--input", input_, "Labeled feature-log CSV")->required();
  gf->add_option("--candidates", candidates_, "Candidate features, comma separated (default: all)");
  gf->add_option("--objective", objective_, "Selection objective")->check(CLI::IsMember({"srocc", "rmse"}));
  gf->add_option("--epsilon", epsilon_, "Minimum improvement");
  gf->add_option("--max-features", max_features_, "Cap on selected features (0: none)");
  add_forest(gf);
  add_cv(gf);
  gf->add_option("-o,--out", output_, "Selection JSON")->required();
  add_common(gf, true, true, true);

  auto* fm = app.add_subcommand("filter-manifest", "Keep the best representation per rung");
  fm->add_option("-m,--manifest", manifest_, "Segment manifest JSON")->required();
  auto* l_opt = fm->add_option("--ladder", ladder_, "Ladder JSON giving the rungs");
  fm->add_option("--rungs", rungs_, "Rungs, comma separated")->excludes(l_opt);
  fm->add_option("-o,--out", output_, "Filtered manifest JSON")->required();
  add_common(fm, true, false, false);

  auto* sy = app.add_subcommand("synthesize", "Synthetic quality log on the sports rungs");
  sy->add_option("--gops", gops_, "GOP count")->check(CLI::PositiveNumber);
  sy->add_option("--noise", noise_, "Per-cell score jitter")->check(CLI::NonNegativeNumber);
  sy->add_option("--content-id", content_id_, "Content id column");
  sy->add_option("-o,--out", output_, "Quality-log CSV")->required();
  add_common(sy, false, false, true);

  auto* re = app.add_subcommand("replay", "Re-run a command from its config echo");
  re->add_option("config", config_, "config.json written by an earlier run")->required();

  std::vector<std::string> reversed(args_.rbegin(), args_.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out_, err_);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out_, err_);
  } catch (const CLI::ParseError& e) {
    err_ << "error: code=UsageError message=" << e.what() << "\n";
    return 2;
  }

  try {
    common_.unit();
    if (fm->parsed() && ladder_.empty() && rungs_.empty()) throw Error(ErrorCode::InvalidRange, "give --ladder or --rungs");
    if (ef->parsed()) extract_features(*ef);
    else if (fi->parsed()) fit(*fi);
    else if (xo->parsed()) crossover(*xo);
    else if (br->parsed()) bench_rcql(*br);
    else if (ag->parsed()) analyze_gops(*ag);
    else if (sl->parsed()) select_ladder(*sl);
    else if (si->parsed()) simulate(*si);
    else if (rp->parsed()) report(*rp);
    else if (tr->parsed()) train(*tr);
    else if (pr->parsed()) predict(*pr);
    else if (cvc->parsed()) cv(*cvc);
    else if (gf->parsed()) gfs(*gf);
    else if (fm->parsed()) filter_manifest(*fm);
    else if (sy->parsed()) synthesize(*sy);
    else if (re->parsed()) return replay();
  } catch (const Error& e) {
    err_ << "error: code=" << to_string(e.code()) << " message=" << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err_ << "error: code=Internal message=" << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return Runner(args, out, err).run();
}

}  // namespace drs::cli
