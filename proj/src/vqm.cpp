#include "drs/vqm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include <Eigen/Dense>
#include <json.hpp>

#include "drs/error.hpp"
#include "drs/rcql.hpp"
#include "drs/rng.hpp"
#include "drs/stats.hpp"

namespace drs::vqm {

namespace {

constexpr double kScoreMin = 0.0;
constexpr double kScoreMax = 10.0;

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled exactly once, so results written by index need no reduction order.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

// ---- schema -----------------------------------------------------------------

FeatureSchema::FeatureSchema(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw Error(ErrorCode::SchemaMismatch, "empty feature name");
    if (!seen.insert(n).second) throw Error(ErrorCode::SchemaMismatch, "duplicate feature '" + n + "'");
  }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

FeatureSchema FeatureSchema::select(std::span<const std::string> subset) const {
  for (const auto& n : subset) {
    if (!index_of(n)) throw Error(ErrorCode::SchemaMismatch, "unknown feature '" + n + "'");
  }
  return FeatureSchema(std::vector<std::string>(subset.begin(), subset.end()));
}

std::vector<GopRecord> project(std::span<const GopRecord> records, std::span<const std::size_t> columns) {
  std::vector<GopRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    GopRecord p = r;
    p.features.clear();
    for (std::size_t c : columns) {
      if (c >= r.features.size()) throw Error(ErrorCode::SchemaMismatch, "column out of range");
      p.features.push_back(r.features[c]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

const std::vector<std::string>& default_base_features() {
  static const std::vector<std::string> names = {"log_bitrate", "log_pixels", "qp_mean"};
  return names;
}

// ---- model evaluation ---------------------------------------------------------

double Tree::eval(std::span<const double> x) const {
  if (nodes.empty()) return 0.0;
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

double BaseModel::eval(std::span<const double> x) const {
  double v = intercept;
  for (std::size_t k = 0; k < feature_indices.size(); ++k) v += coefficients[k] * x[feature_indices[k]];
  return v;
}

double ForestModel::residual(std::span<const double> x) const {
  if (trees.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : trees) sum += t.eval(x);
  return sum / static_cast<double>(trees.size());
}

double ForestModel::raw_predict(std::span<const double> x) const {
  return base.eval(x) + residual(x);
}

double predict(const ForestModel& model, std::span<const double> features) {
  if (features.size() != model.schema.size()) {
    throw Error(ErrorCode::SchemaMismatch, "feature vector has " + std::to_string(features.size()) +
                                               " values, schema has " + std::to_string(model.schema.size()));
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite feature value");
  }
  return std::clamp(model.raw_predict(features), kScoreMin, kScoreMax);
}

// ---- training -------------------------------------------------------------------

namespace {

struct TrainingData {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> x;  // row-major n x d
  std::vector<double> y;
  double at(std::size_t row, std::size_t col) const { return x[row * d + col]; }
};

TrainingData collect(std::span<const GopRecord> records, const FeatureSchema& schema) {
  TrainingData data;
  data.d = schema.size();
  for (const auto& r : records) {
    if (r.features.size() != data.d) {
      throw Error(ErrorCode::SchemaMismatch, "record " + r.content_id + "/" + std::to_string(r.gop_index) +
                                                 " has " + std::to_string(r.features.size()) +
                                                 " features, schema has " + std::to_string(data.d));
    }
    if (!r.label_jod) continue;
    if (!std::isfinite(*r.label_jod)) throw Error(ErrorCode::NonFinite, "non-finite label");
    for (double v : r.features) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite feature value");
    }
    data.x.insert(data.x.end(), r.features.begin(), r.features.end());
    data.y.push_back(*r.label_jod);
    ++data.n;
  }
  if (data.n == 0) throw Error(ErrorCode::EmptyTrainingSet, "no labeled records");
  return data;
}

BaseModel fit_base(const TrainingData& data, const FeatureSchema& schema, const Hyperparams& hp) {
  BaseModel base;
  if (hp.base_features) {
    for (const auto& name : *hp.base_features) {
      const auto idx = schema.index_of(name);
      if (!idx) throw Error(ErrorCode::SchemaMismatch, "base feature '" + name + "' not in schema");
      base.feature_indices.push_back(*idx);
    }
  } else {
    for (const auto& name : default_base_features()) {
      if (const auto idx = schema.index_of(name)) base.feature_indices.push_back(*idx);
    }
  }
  const std::size_t k = base.feature_indices.size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(data.n), static_cast<Eigen::Index>(k + 1));
  Eigen::VectorXd b(static_cast<Eigen::Index>(data.n));
  for (std::size_t i = 0; i < data.n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    a(row, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      a(row, static_cast<Eigen::Index>(j + 1)) = data.at(i, base.feature_indices[j]);
    }
    b(row) = data.y[i];
  }
  const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);
  base.intercept = sol(0);
  for (std::size_t j = 0; j < k; ++j) base.coefficients.push_back(sol(static_cast<Eigen::Index>(j + 1)));
  if (!std::isfinite(base.intercept) ||
      !std::all_of(base.coefficients.begin(), base.coefficients.end(), [](double c) { return std::isfinite(c); })) {
    throw Error(ErrorCode::NonFinite, "base model fit produced non-finite coefficients");
  }
  return base;
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingData& data, const std::vector<double>& residuals, const Hyperparams& hp,
              std::size_t mtry, Rng& rng)
      : data_(data), r_(residuals), hp_(hp), mtry_(mtry), rng_(rng) {}

  Tree build(std::vector<std::size_t> rows) {
    Tree tree;
    tree_ = &tree;
    grow(rows, 0);
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  int grow(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(tree_->nodes.size());
    tree_->nodes.emplace_back();
    double sum = 0.0;
    for (std::size_t i : rows) sum += r_[i];
    const double n = static_cast<double>(rows.size());
    const double mean = sum / n;
    double sse = 0.0;
    for (std::size_t i : rows) sse += (r_[i] - mean) * (r_[i] - mean);
    tree_->nodes[static_cast<std::size_t>(id)].value = mean;

    const std::size_t min_leaf = static_cast<std::size_t>(std::max(hp_.min_leaf, 1));
    const bool depth_ok = hp_.max_depth <= 0 || depth < hp_.max_depth;
    if (!depth_ok || rows.size() < 2 * min_leaf || !(sse > 1e-24 * n)) return id;

    const Split best = best_split(rows, sum, sse, min_leaf);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : rows) {
      (data_.at(i, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(i);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    TreeNode& node = tree_->nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.gain = best.gain;
    node.left = l;
    node.right = r;
    return id;
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> f(data_.d);
    std::iota(f.begin(), f.end(), 0);
    if (mtry_ >= data_.d) return f;
    for (std::size_t i = 0; i < mtry_; ++i) {
      std::swap(f[i], f[i + uniform_index(rng_, data_.d - i)]);
    }
    f.resize(mtry_);
    std::sort(f.begin(), f.end());
    return f;
  }

  Split best_split(const std::vector<std::size_t>& rows, double sum, double sse, std::size_t min_leaf) {
    Split best;
    const double n = static_cast<double>(rows.size());
    const double base_term = sum * sum / n;
    std::vector<std::size_t> order(rows);
    for (std::size_t f : candidate_features()) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double xa = data_.at(a, f);
        const double xb = data_.at(b, f);
        return xa < xb || (xa == xb && a < b);
      });
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        left_sum += r_[order[i]];
        const std::size_t nl = i + 1;
        const std::size_t nr = order.size() - nl;
        if (nl < min_leaf) continue;
        if (nr < min_leaf) break;
        const double xa = data_.at(order[i], f);
        const double xb = data_.at(order[i + 1], f);
        if (!(xa < xb)) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) - base_term;
        if (gain > best.gain) {
          double t = xa + (xb - xa) / 2.0;
          if (!(t < xb)) t = xa;
          best = {static_cast<int>(f), t, gain};
        }
      }
    }
    if (!(best.gain > 1e-12 * sse)) return {};
    return best;
  }

  const TrainingData& data_;
  const std::vector<double>& r_;
  const Hyperparams& hp_;
  std::size_t mtry_;
  Rng& rng_;
  Tree* tree_ = nullptr;
};

}  // namespace

ForestModel train(std::span<const GopRecord> records, const FeatureSchema& schema,
                  const Hyperparams& hp, std::uint64_t seed) {
  if (hp.n_trees < 0 || hp.min_leaf < 1 || hp.feature_subsample < 0) {
    throw Error(ErrorCode::InvalidRange, "n_trees >= 0, min_leaf >= 1, feature_subsample >= 0 required");
  }
  const TrainingData data = collect(records, schema);

  ForestModel model;
  model.schema = schema;
  model.hyperparams = hp;
  model.seed = seed;
  model.base = fit_base(data, schema, hp);

  std::vector<double> residuals(data.n);
  for (std::size_t i = 0; i < data.n; ++i) {
    residuals[i] = data.y[i] - model.base.eval(std::span<const double>(&data.x[i * data.d], data.d));
  }

  std::size_t mtry = hp.feature_subsample > 0
                         ? static_cast<std::size_t>(hp.feature_subsample)
                         : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(data.d))));
  mtry = std::clamp<std::size_t>(mtry, 1, std::max<std::size_t>(data.d, 1));

  model.trees.resize(static_cast<std::size_t>(hp.n_trees));
  if (data.d == 0) return model;  // nothing to split on; trees stay empty-ish
  parallel_for(model.trees.size(), hp.threads, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<std::size_t> rows(data.n);
    if (hp.bootstrap) {
      for (auto& r : rows) r = uniform_index(rng, data.n);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeBuilder builder(data, residuals, hp, mtry, rng);
    model.trees[t] = builder.build(std::move(rows));
  });
  return model;
}

std::map<std::string, double> feature_importance(const ForestModel& model) {
  std::vector<double> total(model.schema.size(), 0.0);
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (node.feature >= 0) total[static_cast<std::size_t>(node.feature)] += node.gain;
    }
  }
  const double sum = std::accumulate(total.begin(), total.end(), 0.0);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < total.size(); ++i) {
    out[model.schema.names()[i]] = sum > 0.0 ? total[i] / sum : 0.0;
  }
  return out;
}

// ---- serialization ----------------------------------------------------------------

namespace {

constexpr const char* kModelFormat = "drs-forest-model";
constexpr int kModelVersion = 1;

}  // namespace

std::string to_json(const ForestModel& m) {
  using nlohmann::json;
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["seed"] = m.seed;
  j["schema"] = m.schema.names();
  json base;
  std::vector<std::string> base_names;
  for (std::size_t idx : m.base.feature_indices) base_names.push_back(m.schema.names()[idx]);
  base["features"] = base_names;
  base["coefficients"] = m.base.coefficients;
  base["intercept"] = m.base.intercept;
  j["base"] = base;
  const Hyperparams& hp = m.hyperparams;
  j["hyperparams"] = {{"n_trees", hp.n_trees},         {"max_depth", hp.max_depth},
                      {"min_leaf", hp.min_leaf},       {"feature_subsample", hp.feature_subsample},
                      {"bootstrap", hp.bootstrap}};
  json trees = json::array();
  for (const auto& t : m.trees) {
    json jt;
    std::vector<int> feature, left, right;
    std::vector<double> threshold, value, gain;
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      left.push_back(n.left);
      right.push_back(n.right);
      threshold.push_back(n.threshold);
      value.push_back(n.value);
      gain.push_back(n.gain);
    }
    jt["feature"] = feature;
    jt["threshold"] = threshold;
    jt["left"] = left;
    jt["right"] = right;
    jt["value"] = value;
    jt["gain"] = gain;
    trees.push_back(std::move(jt));
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

ForestModel model_from_json(std::string_view text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw Error(ErrorCode::SchemaMismatch, "not a forest model file");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorCode::SchemaMismatch, "unsupported model version " + j.at("version").dump());
    }
    ForestModel m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.schema = FeatureSchema(j.at("schema").get<std::vector<std::string>>());
    const json& base = j.at("base");
    std::vector<std::string> base_names = base.at("features").get<std::vector<std::string>>();
    for (const auto& name : base_names) {
      const auto idx = m.schema.index_of(name);
      if (!idx) throw Error(ErrorCode::SchemaMismatch, "base feature '" + name + "' not in schema");
      m.base.feature_indices.push_back(*idx);
    }
    m.base.coefficients = base.at("coefficients").get<std::vector<double>>();
    m.base.intercept = base.at("intercept").get<double>();
    if (m.base.coefficients.size() != m.base.feature_indices.size()) {
      throw Error(ErrorCode::SchemaMismatch, "base coefficient count mismatch");
    }
    const json& hp = j.at("hyperparams");
    m.hyperparams.n_trees = hp.at("n_trees").get<int>();
    m.hyperparams.max_depth = hp.at("max_depth").get<int>();
    m.hyperparams.min_leaf = hp.at("min_leaf").get<int>();
    m.hyperparams.feature_subsample = hp.at("feature_subsample").get<int>();
    m.hyperparams.bootstrap = hp.at("bootstrap").get<bool>();
    m.hyperparams.base_features = base_names;
    for (const json& jt : j.at("trees")) {
      const auto feature = jt.at("feature").get<std::vector<int>>();
      const auto threshold = jt.at("threshold").get<std::vector<double>>();
      const auto left = jt.at("left").get<std::vector<int>>();
      const auto right = jt.at("right").get<std::vector<int>>();
      const auto value = jt.at("value").get<std::vector<double>>();
      const auto gain = jt.at("gain").get<std::vector<double>>();
      const std::size_t n = feature.size();
      if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n || gain.size() != n) {
        throw Error(ErrorCode::SchemaMismatch, "tree arrays differ in length");
      }
      Tree t;
      for (std::size_t i = 0; i < n; ++i) {
        TreeNode node{feature[i], threshold[i], left[i], right[i], value[i], gain[i]};
        if (node.feature >= 0) {
          // Children must come after the parent so evaluation cannot loop.
          const auto ok = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
          if (static_cast<std::size_t>(node.feature) >= m.schema.size() || !ok(node.left) || !ok(node.right)) {
            throw Error(ErrorCode::SchemaMismatch, "malformed tree node");
          }
        }
        t.nodes.push_back(node);
      }
      m.trees.push_back(std::move(t));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("model JSON: ") + e.what());
  }
}

// ---- cross-validation ------------------------------------------------------------

Trainer forest_trainer(FeatureSchema schema, Hyperparams hyperparams, std::uint64_t seed) {
  return [schema = std::move(schema), hyperparams = std::move(hyperparams),
          seed](std::span<const GopRecord> train_set) -> Predictor {
    auto model = std::make_shared<const ForestModel>(train(train_set, schema, hyperparams, seed));
    return [model](const GopRecord& r) { return predict(*model, r.features); };
  };
}

std::vector<int> assign_folds(std::span<const std::string> sorted_content_ids, int folds,
                              std::uint64_t seed, int run) {
  std::vector<std::size_t> order(sorted_content_ids.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(run)));
  shuffle(order, rng);
  std::vector<int> fold(sorted_content_ids.size());
  for (std::size_t p = 0; p < order.size(); ++p) fold[order[p]] = static_cast<int>(p % static_cast<std::size_t>(folds));
  return fold;
}

namespace {

struct RunOutput {
  std::vector<double> predictions;
  std::vector<double> srocc, plcc, rmse;  // per content, sorted-id order
  std::size_t checks = 0;
};

}  // namespace

CvResult cross_validate(std::span<const GopRecord> records, const CvConfig& cv, const Trainer& trainer) {
  if (cv.folds < 2 || cv.runs < 1) throw Error(ErrorCode::InvalidRange, "folds >= 2 and runs >= 1 required");
  for (const auto& r : records) {
    if (!r.label_jod) throw Error(ErrorCode::EmptyTrainingSet, "cross-validation needs a label on every record");
  }
  std::vector<std::string> contents;
  for (const auto& r : records) contents.push_back(r.content_id);
  std::sort(contents.begin(), contents.end());
  contents.erase(std::unique(contents.begin(), contents.end()), contents.end());
  if (contents.size() < static_cast<std::size_t>(cv.folds)) {
    throw Error(ErrorCode::InsufficientContents, std::to_string(contents.size()) + " contents for " +
                                                     std::to_string(cv.folds) + " folds");
  }
  std::vector<std::size_t> content_of(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    content_of[i] = static_cast<std::size_t>(
        std::lower_bound(contents.begin(), contents.end(), records[i].content_id) - contents.begin());
  }

  std::vector<RunOutput> runs(static_cast<std::size_t>(cv.runs));
  parallel_for(runs.size(), cv.threads, [&](std::size_t run) {
    RunOutput& out = runs[run];
    const std::vector<int> fold = assign_folds(contents, cv.folds, cv.seed, static_cast<int>(run));
    out.predictions.assign(records.size(), std::numeric_limits<double>::quiet_NaN());
    for (int f = 0; f < cv.folds; ++f) {
      std::vector<GopRecord> train_set;
      std::vector<std::size_t> test_rows;
      std::set<std::size_t> train_contents;
      std::set<std::size_t> test_contents;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (fold[content_of[i]] == f) {
          test_rows.push_back(i);
          test_contents.insert(content_of[i]);
        } else {
          train_set.push_back(records[i]);
          train_contents.insert(content_of[i]);
        }
      }
      for (std::size_t c : test_contents) {
        if (train_contents.count(c)) invariant_failure("content '" + contents[c] + "' in both train and test");
      }
      ++out.checks;
      if (test_rows.empty()) continue;
      const Predictor predictor = trainer(train_set);
      for (std::size_t i : test_rows) out.predictions[i] = predictor(records[i]);
    }
    std::vector<std::vector<double>> pred(contents.size());
    std::vector<std::vector<double>> label(contents.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      pred[content_of[i]].push_back(out.predictions[i]);
      label[content_of[i]].push_back(*records[i].label_jod);
    }
    for (std::size_t c = 0; c < contents.size(); ++c) {
      out.srocc.push_back(stats::spearman(pred[c], label[c]));
      out.plcc.push_back(stats::pearson(pred[c], label[c]));
      out.rmse.push_back(stats::rmse(pred[c], label[c]));
    }
  });

  CvResult result;
  std::map<std::string, std::vector<double>> srocc, plcc, rmse;
  for (std::size_t c = 0; c < contents.size(); ++c) {
    ContentMetrics& m = result.per_content[contents[c]];
    for (const RunOutput& run : runs) {
      m.srocc.push_back(run.srocc[c]);
      m.plcc.push_back(run.plcc[c]);
      m.rmse.push_back(run.rmse[c]);
    }
    srocc[contents[c]] = m.srocc;
    plcc[contents[c]] = m.plcc;
    rmse[contents[c]] = m.rmse;
  }
  result.srocc = rcql::median_then_mean(srocc);
  result.plcc = rcql::median_then_mean(plcc);
  result.rmse = rcql::median_then_mean(rmse);
  for (RunOutput& run : runs) {
    result.leakage_checks += run.checks;
    if (cv.keep_predictions) result.predictions.push_back(std::move(run.predictions));
  }
  return result;
}

CvResult cross_validate(std::span<const GopRecord> records, const FeatureSchema& schema,
                        const CvConfig& cv, const Hyperparams& hyperparams, std::uint64_t seed) {
  return cross_validate(records, cv, forest_trainer(schema, hyperparams, seed));
}

// ---- greedy feature selection ---------------------------------------------------------

std::string to_string(Objective o) {
  return o == Objective::Srocc ? "srocc" : "rmse";
}

Objective parse_objective(std::string_view text) {
  if (text == "srocc" || text == "SROCC") return Objective::Srocc;
  if (text == "rmse" || text == "RMSE") return Objective::Rmse;
  throw Error(ErrorCode::ParseError, "unknown objective '" + std::string(text) + "'");
}

GfsResult greedy_feature_selection(std::span<const GopRecord> records, const FeatureSchema& candidates,
                                   const GfsOptions& opt) {
  if (candidates.size() < 2) throw Error(ErrorCode::SchemaMismatch, "GFS needs at least two candidate features");
  for (const auto& r : records) {
    if (r.features.size() != candidates.size()) {
      throw Error(ErrorCode::SchemaMismatch, "record feature count differs from the candidate schema");
    }
  }
  std::set<std::string> contents;
  for (const auto& r : records) contents.insert(r.content_id);
  if (contents.size() < static_cast<std::size_t>(std::max(opt.cv.folds, 2))) {
    throw Error(ErrorCode::InsufficientContents, std::to_string(contents.size()) + " contents for " +
                                                     std::to_string(opt.cv.folds) + " folds");
  }

  GfsResult result;
  std::vector<std::size_t> selected_idx;
  double previous = -std::numeric_limits<double>::infinity();
  const std::size_t cap = std::min(opt.max_features, candidates.size());
  while (result.selected.size() < cap) {
    GfsStep step;
    double best = -std::numeric_limits<double>::infinity();
    std::optional<std::size_t> best_idx;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (std::find(selected_idx.begin(), selected_idx.end(), c) != selected_idx.end()) continue;
      std::vector<std::size_t> cols = selected_idx;
      cols.push_back(c);
      std::vector<std::string> names;
      for (std::size_t k : cols) names.push_back(candidates.names()[k]);
      const FeatureSchema sub(names);
      Hyperparams hp = opt.hyperparams;
      if (hp.base_features) {
        std::vector<std::string> kept;
        for (const auto& b : *hp.base_features) {
          if (sub.index_of(b)) kept.push_back(b);
        }
        hp.base_features = kept;
      }
      const auto projected = project(records, cols);
      const CvResult cv = cross_validate(projected, sub, opt.cv, hp, opt.seed);
      double score = opt.objective == Objective::Srocc ? cv.srocc : -cv.rmse;
      if (std::isnan(score)) score = -std::numeric_limits<double>::infinity();
      step.candidate_scores[candidates.names()[c]] = score;
      if (!best_idx || score > best) {
        best = score;
        best_idx = c;
      }
    }
    const double improvement = best - previous;
    if (!best_idx || !(improvement > opt.epsilon)) break;
    step.feature = candidates.names()[*best_idx];
    step.score = best;
    step.improvement = improvement;
    selected_idx.push_back(*best_idx);
    result.selected.push_back(step.feature);
    result.steps.push_back(std::move(step));
    previous = best;
  }
  return result;
}

}  // namespace drs::vqm
