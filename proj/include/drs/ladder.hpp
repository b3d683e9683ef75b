#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drs/types.hpp"

namespace drs::ladder {

/// One scored representation of one GOP.
struct QualityEntry {
  std::string content_id;
  int gop_index = 0;
  double rung_kbps = 0.0;
  Resolution resolution;
  double score = 0.0;
};

/// Dense score cube over (gop, rung, resolution). GOPs are ordered by
/// (content_id, gop_index); rungs ascending; resolutions ascending by pixels.
/// Missing cells hold NaN.
class QualityLog {
 public:
  QualityLog() = default;
  QualityLog(std::vector<double> rungs, std::vector<Resolution> resolutions, std::size_t gops);

  /// Errors: EmptyInput, NonFinite, SchemaMismatch (duplicate cell).
  static QualityLog from_entries(std::span<const QualityEntry> entries);

  const std::vector<double>& rungs() const noexcept { return rungs_; }
  const std::vector<Resolution>& resolutions() const noexcept { return resolutions_; }
  std::size_t gops() const noexcept { return gops_; }
  /// (content_id, gop_index) for each GOP row; empty when built directly.
  const std::vector<std::pair<std::string, int>>& gop_keys() const noexcept { return keys_; }

  double score(std::size_t gop, std::size_t rung, std::size_t res) const noexcept {
    return cells_[(gop * rungs_.size() + rung) * resolutions_.size() + res];
  }
  bool has(std::size_t gop, std::size_t rung, std::size_t res) const noexcept;
  void set(std::size_t gop, std::size_t rung, std::size_t res, double score);

  /// Index lookups; throw IncompleteLog when absent.
  std::size_t rung_index(double kbps) const;
  std::size_t resolution_index(const Resolution& r) const;

 private:
  std::vector<double> rungs_;
  std::vector<Resolution> resolutions_;
  std::size_t gops_ = 0;
  std::vector<double> cells_;
  std::vector<std::pair<std::string, int>> keys_;
};

struct ProbabilityTable {
  std::vector<double> rungs;
  std::vector<Resolution> resolutions;
  std::vector<std::vector<double>> probability;  // [rung][resolution]
  std::vector<std::vector<std::size_t>> wins;    // argmax counts
  std::size_t gops = 0;
};

/// Share of GOPs where each resolution has the best score at each rung.
/// Ties go to the lower resolution. Resolutions unscored at a GOP do not
/// compete there. Errors: IncompleteLog (a (gop, rung) without any score).
ProbabilityTable best_resolution_probability(const QualityLog& log);

/// Running sum over ascending resolutions.
ProbabilityTable cumulative_probability(const ProbabilityTable& table);

struct Candidate {
  double rung_kbps = 0.0;
  Resolution resolution;
  friend auto operator<=>(const Candidate&, const Candidate&) = default;
};

struct LadderProblem {
  std::vector<double> rungs;        // ascending
  std::vector<double> weights;      // aligned to rungs, used as given
  std::size_t max_representations;  // K, counting every representation
  std::vector<Candidate> candidates;
  /// scores[c][i]: quality of candidate c at GOP i.
  std::vector<std::vector<double>> scores;
  /// Candidates that must be part of every solution (e.g. the static ladder).
  std::vector<Candidate> required;
};

/// Problem over `candidates` (all scored cells of the log when empty).
/// Errors: IncompleteLog (candidate missing a GOP, rung without candidates),
/// InvalidRange (weights misaligned or negative).
LadderProblem make_problem(const QualityLog& log, std::span<const double> weights, std::size_t k,
                           std::vector<Candidate> candidates = {}, std::vector<Candidate> required = {});

struct TraceStep {
  Candidate candidate;
  double gain = 0.0;
  double objective = 0.0;  // after adding
  bool seed = false;
};

struct LadderSolution {
  std::vector<Candidate> selected;  // sorted by (rung, resolution)
  double objective = 0.0;
  std::vector<TraceStep> trace;
};

/// sum_r W_r sum_i max over the selection's candidates at rung r.
/// Indices refer to problem.candidates.
double evaluate(const LadderProblem& problem, std::span<const std::size_t> selection);

constexpr std::size_t kMaxExhaustiveCandidates = 20;

/// Exact maximizer over every selection with at most K members, at least one
/// per rung, and all required members. Ties: larger selection, then the
/// lexicographically smaller sorted candidate list.
/// Errors: TooManyCandidates, InfeasibleK.
LadderSolution optimize_exhaustive(const LadderProblem& problem);

/// Seeds each rung with its best single candidate (or its required ones),
/// then adds the largest-gain candidate while the gain is positive and
/// |selection| < K. Errors: InfeasibleK.
LadderSolution optimize_greedy(const LadderProblem& problem);

/// Fraction of samples at each rung: a sample maps to the highest rung not
/// above it, or to the lowest rung. Errors: EmptyInput, InvalidRange.
std::vector<double> weights_from_bandwidth(std::span<const double> samples_kbps, std::span<const double> rungs);

/// A ladder as rungs with their resolution sets.
struct LadderRung {
  double kbps = 0.0;
  std::vector<Resolution> resolutions;  // ascending
};
struct Ladder {
  std::vector<LadderRung> rungs;  // ascending
  std::size_t representation_count() const;
  std::vector<Candidate> candidates() const;
};

/// Sorts rungs and resolutions; rejects duplicates and empty rungs (InvalidRange).
Ladder make_ladder(std::vector<LadderRung> rungs);
Ladder to_ladder(std::span<const Candidate> selection);

}  // namespace drs::ladder
