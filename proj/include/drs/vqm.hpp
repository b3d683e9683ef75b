#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drs/types.hpp"

namespace drs::vqm {

/// Ordered, unique feature names. A trained model keeps its schema for life.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  /// Throws SchemaMismatch on duplicate or empty names.
  explicit FeatureSchema(std::vector<std::string> names);

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Schema restricted to `subset`, in the order given. Throws SchemaMismatch.
  FeatureSchema select(std::span<const std::string> subset) const;

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  std::vector<std::string> names_;
};

struct GopRecord {
  std::string content_id;
  int gop_index = 0;
  double bitrate_kbps = 0.0;
  Resolution resolution;
  std::vector<double> features;
  std::optional<double> label_jod;
};

/// Copies of `records` whose feature vectors keep only `columns` (indices
/// into the source schema), in that order.
std::vector<GopRecord> project(std::span<const GopRecord> records, std::span<const std::size_t> columns);

/// Defaults used when Hyperparams::base_features is unset.
const std::vector<std::string>& default_base_features();

struct Hyperparams {
  int n_trees = 100;
  int max_depth = 12;  // <= 0 means unlimited
  int min_leaf = 4;
  int feature_subsample = 0;  // per split; 0 means ceil(sqrt(d))
  bool bootstrap = true;
  /// Features of the affine base model. Unset: default_base_features() present in the schema.
  std::optional<std::vector<std::string>> base_features;
  int threads = 1;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output (mean residual)
  double gain = 0.0;   // SSE decrease of the split
};

struct Tree {
  std::vector<TreeNode> nodes;
  double eval(std::span<const double> x) const;
};

struct BaseModel {
  std::vector<std::size_t> feature_indices;
  std::vector<double> coefficients;
  double intercept = 0.0;
  double eval(std::span<const double> x) const;
};

struct ForestModel {
  FeatureSchema schema;
  BaseModel base;
  std::vector<Tree> trees;
  Hyperparams hyperparams;
  std::uint64_t seed = 0;

  /// Mean tree output; 0 with no trees.
  double residual(std::span<const double> x) const;
  /// base + residual, not clamped.
  double raw_predict(std::span<const double> x) const;
};

/// Errors: EmptyTrainingSet (no labeled records), SchemaMismatch, NonFinite.
/// Unlabeled records are ignored.
ForestModel train(std::span<const GopRecord> records, const FeatureSchema& schema,
                  const Hyperparams& hyperparams, std::uint64_t seed);

/// raw_predict clamped to [0, 10]. Errors: SchemaMismatch.
double predict(const ForestModel& model, std::span<const double> features);

/// Normalized SSE decrease per feature over all splits; all zeros when no
/// tree has a split.
std::map<std::string, double> feature_importance(const ForestModel& model);

/// Versioned JSON. from_json errors: ParseError, SchemaMismatch.
std::string to_json(const ForestModel& model);
ForestModel model_from_json(std::string_view text);

// ---- cross-validation -----------------------------------------------------

struct CvConfig {
  int folds = 5;
  int runs = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
  bool keep_predictions = false;
};

using Predictor = std::function<double(const GopRecord&)>;
/// Builds a predictor from the training partition.
using Trainer = std::function<Predictor(std::span<const GopRecord> train)>;

/// Trainer for the forest over the records' full feature vectors.
Trainer forest_trainer(FeatureSchema schema, Hyperparams hyperparams, std::uint64_t seed);

/// Fold index for each of the sorted distinct `content_ids` in one run.
std::vector<int> assign_folds(std::span<const std::string> sorted_content_ids, int folds,
                              std::uint64_t seed, int run);

struct ContentMetrics {
  // One entry per run; NaN where undefined (e.g. constant predictions).
  std::vector<double> srocc;
  std::vector<double> plcc;
  std::vector<double> rmse;
};

struct CvResult {
  std::map<std::string, ContentMetrics> per_content;
  // Mean over contents of the per-content median over runs.
  double srocc = 0.0;
  double plcc = 0.0;
  double rmse = 0.0;
  /// Record-aligned out-of-fold predictions per run (when requested).
  std::vector<std::vector<double>> predictions;
  std::size_t leakage_checks = 0;
};

/// Content-split repeated k-fold CV. Every record needs a label.
/// Errors: InsufficientContents, InvalidRange, EmptyTrainingSet.
CvResult cross_validate(std::span<const GopRecord> records, const CvConfig& cv, const Trainer& trainer);
CvResult cross_validate(std::span<const GopRecord> records, const FeatureSchema& schema,
                        const CvConfig& cv, const Hyperparams& hyperparams, std::uint64_t seed);

// ---- greedy feature selection -----------------------------------------------

enum class Objective { Srocc, Rmse };
std::string to_string(Objective o);
Objective parse_objective(std::string_view text);

struct GfsOptions {
  Objective objective = Objective::Srocc;
  double epsilon = 1e-4;
  std::size_t max_features = static_cast<std::size_t>(-1);
  CvConfig cv;
  Hyperparams hyperparams;
  std::uint64_t seed = 0;
};

struct GfsStep {
  std::string feature;
  double score = 0.0;        // higher is better (negated RMSE for that objective)
  double improvement = 0.0;  // over the previous step; the empty set scores -inf
  std::map<std::string, double> candidate_scores;
};

struct GfsResult {
  std::vector<std::string> selected;
  std::vector<GfsStep> steps;
};

/// Forward selection over `candidates` (a schema naming the records' columns).
/// Stops when the best candidate improves by no more than epsilon, or at the cap.
/// Errors: SchemaMismatch (fewer than two candidates), InsufficientContents.
GfsResult greedy_feature_selection(std::span<const GopRecord> records, const FeatureSchema& candidates,
                                   const GfsOptions& options);

}  // namespace drs::vqm
