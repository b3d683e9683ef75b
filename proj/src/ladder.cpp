#include "drs/ladder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "drs/error.hpp"

namespace drs::ladder {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string describe(double kbps, const Resolution& r) {
  std::string s = to_string(r) + "@";
  s += std::to_string(kbps);
  return s;
}

}  // namespace

// ---- quality log ------------------------------------------------------------

QualityLog::QualityLog(std::vector<double> rungs, std::vector<Resolution> resolutions, std::size_t gops)
    : rungs_(std::move(rungs)), resolutions_(std::move(resolutions)), gops_(gops) {
  std::sort(rungs_.begin(), rungs_.end());
  std::sort(resolutions_.begin(), resolutions_.end());
  if (std::adjacent_find(rungs_.begin(), rungs_.end()) != rungs_.end() ||
      std::adjacent_find(resolutions_.begin(), resolutions_.end()) != resolutions_.end()) {
    throw Error(ErrorCode::SchemaMismatch, "duplicate rung or resolution");
  }
  cells_.assign(gops_ * rungs_.size() * resolutions_.size(), kNaN);
}

QualityLog QualityLog::from_entries(std::span<const QualityEntry> entries) {
  if (entries.empty()) throw Error(ErrorCode::EmptyInput, "quality log has no entries");
  std::set<double> rungs;
  std::set<Resolution> resolutions;
  std::set<std::pair<std::string, int>> keys;
  for (const auto& e : entries) {
    if (!std::isfinite(e.score) || !std::isfinite(e.rung_kbps)) {
      throw Error(ErrorCode::NonFinite, "non-finite score or rung in quality log");
    }
    rungs.insert(e.rung_kbps);
    resolutions.insert(e.resolution);
    keys.insert({e.content_id, e.gop_index});
  }
  QualityLog log({rungs.begin(), rungs.end()}, {resolutions.begin(), resolutions.end()}, keys.size());
  log.keys_.assign(keys.begin(), keys.end());
  for (const auto& e : entries) {
    const auto g = static_cast<std::size_t>(
        std::lower_bound(log.keys_.begin(), log.keys_.end(), std::make_pair(e.content_id, e.gop_index)) -
        log.keys_.begin());
    const std::size_t r = log.rung_index(e.rung_kbps);
    const std::size_t k = log.resolution_index(e.resolution);
    if (log.has(g, r, k)) {
      throw Error(ErrorCode::SchemaMismatch, "duplicate quality entry for " + e.content_id + "/" +
                                                 std::to_string(e.gop_index) + " " +
                                                 describe(e.rung_kbps, e.resolution));
    }
    log.set(g, r, k, e.score);
  }
  return log;
}

bool QualityLog::has(std::size_t gop, std::size_t rung, std::size_t res) const noexcept {
  return !std::isnan(score(gop, rung, res));
}

void QualityLog::set(std::size_t gop, std::size_t rung, std::size_t res, double value) {
  if (gop >= gops_ || rung >= rungs_.size() || res >= resolutions_.size()) {
    throw Error(ErrorCode::InvalidRange, "quality log index out of range");
  }
  if (!std::isfinite(value)) throw Error(ErrorCode::NonFinite, "non-finite score");
  cells_[(gop * rungs_.size() + rung) * resolutions_.size() + res] = value;
}

std::size_t QualityLog::rung_index(double kbps) const {
  const auto it = std::lower_bound(rungs_.begin(), rungs_.end(), kbps);
  if (it == rungs_.end() || *it != kbps) {
    throw Error(ErrorCode::IncompleteLog, "rung " + std::to_string(kbps) + " kbps not in quality log");
  }
  return static_cast<std::size_t>(it - rungs_.begin());
}

std::size_t QualityLog::resolution_index(const Resolution& r) const {
  const auto it = std::lower_bound(resolutions_.begin(), resolutions_.end(), r);
  if (it == resolutions_.end() || *it != r) {
    throw Error(ErrorCode::IncompleteLog, "resolution " + to_string(r) + " not in quality log");
  }
  return static_cast<std::size_t>(it - resolutions_.begin());
}

// ---- probability analysis -------------------------------------------------------

ProbabilityTable best_resolution_probability(const QualityLog& log) {
  if (log.gops() == 0) throw Error(ErrorCode::IncompleteLog, "quality log has no GOPs");
  ProbabilityTable t;
  t.rungs = log.rungs();
  t.resolutions = log.resolutions();
  t.gops = log.gops();
  const std::size_t nr = t.rungs.size();
  const std::size_t nk = t.resolutions.size();
  t.wins.assign(nr, std::vector<std::size_t>(nk, 0));
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t g = 0; g < log.gops(); ++g) {
      std::size_t best = nk;
      for (std::size_t k = 0; k < nk; ++k) {
        if (!log.has(g, r, k)) continue;
        if (best == nk || log.score(g, r, k) > log.score(g, r, best)) best = k;
      }
      if (best == nk) {
        throw Error(ErrorCode::IncompleteLog, "GOP " + std::to_string(g) + " has no score at rung " +
                                                  std::to_string(t.rungs[r]) + " kbps");
      }
      ++t.wins[r][best];
    }
  }
  t.probability.assign(nr, std::vector<double>(nk, 0.0));
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t k = 0; k < nk; ++k) {
      t.probability[r][k] = static_cast<double>(t.wins[r][k]) / static_cast<double>(t.gops);
    }
  }
  return t;
}

ProbabilityTable cumulative_probability(const ProbabilityTable& table) {
  ProbabilityTable c = table;
  for (auto& row : c.probability) {
    double run = 0.0;
    for (double& p : row) {
      run += p;
      p = run;
    }
  }
  return c;
}

// ---- ladder problem -----------------------------------------------------------------

LadderProblem make_problem(const QualityLog& log, std::span<const double> weights, std::size_t k,
                           std::vector<Candidate> candidates, std::vector<Candidate> required) {
  if (weights.size() != log.rungs().size()) {
    throw Error(ErrorCode::InvalidRange, "weights must align with the log's rungs");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidRange, "weights must be finite and >= 0");
  }
  if (candidates.empty()) {
    for (std::size_t r = 0; r < log.rungs().size(); ++r) {
      for (std::size_t c = 0; c < log.resolutions().size(); ++c) {
        bool any = false;
        for (std::size_t g = 0; g < log.gops() && !any; ++g) any = log.has(g, r, c);
        if (any) candidates.push_back({log.rungs()[r], log.resolutions()[c]});
      }
    }
  }
  for (const auto& req : required) candidates.push_back(req);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::sort(required.begin(), required.end());
  required.erase(std::unique(required.begin(), required.end()), required.end());

  LadderProblem p;
  p.rungs = log.rungs();
  p.weights.assign(weights.begin(), weights.end());
  p.max_representations = k;
  p.candidates = std::move(candidates);
  p.required = std::move(required);
  std::vector<bool> rung_covered(p.rungs.size(), false);
  for (const auto& c : p.candidates) {
    const std::size_t r = log.rung_index(c.rung_kbps);
    const std::size_t res = log.resolution_index(c.resolution);
    rung_covered[r] = true;
    std::vector<double> s(log.gops());
    for (std::size_t g = 0; g < log.gops(); ++g) {
      if (!log.has(g, r, res)) {
        throw Error(ErrorCode::IncompleteLog, "candidate " + describe(c.rung_kbps, c.resolution) +
                                                  " has no score at GOP " + std::to_string(g));
      }
      s[g] = log.score(g, r, res);
    }
    p.scores.push_back(std::move(s));
  }
  for (std::size_t r = 0; r < p.rungs.size(); ++r) {
    if (!rung_covered[r]) {
      throw Error(ErrorCode::IncompleteLog, "rung " + std::to_string(p.rungs[r]) + " kbps has no candidates");
    }
  }
  return p;
}

namespace {

struct Layout {
  std::vector<std::size_t> rung_of;                 // per candidate
  std::vector<std::vector<std::size_t>> members;    // per rung, ascending candidate indices
  std::vector<bool> required;                       // per candidate
};

Layout layout_of(const LadderProblem& p) {
  if (p.weights.size() != p.rungs.size() || p.scores.size() != p.candidates.size()) {
    throw Error(ErrorCode::InvalidRange, "malformed ladder problem");
  }
  Layout l;
  l.members.resize(p.rungs.size());
  l.required.assign(p.candidates.size(), false);
  for (std::size_t c = 0; c < p.candidates.size(); ++c) {
    const auto it = std::lower_bound(p.rungs.begin(), p.rungs.end(), p.candidates[c].rung_kbps);
    if (it == p.rungs.end() || *it != p.candidates[c].rung_kbps) {
      throw Error(ErrorCode::IncompleteLog, "candidate rung not among the problem rungs");
    }
    const auto r = static_cast<std::size_t>(it - p.rungs.begin());
    l.rung_of.push_back(r);
    l.members[r].push_back(c);
    l.required[c] = std::binary_search(p.required.begin(), p.required.end(), p.candidates[c]);
  }
  for (const auto& req : p.required) {
    if (!std::binary_search(p.candidates.begin(), p.candidates.end(), req)) {
      throw Error(ErrorCode::IncompleteLog, "required representation is not a candidate");
    }
  }
  for (std::size_t r = 0; r < p.rungs.size(); ++r) {
    if (l.members[r].empty()) {
      throw Error(ErrorCode::IncompleteLog, "rung " + std::to_string(p.rungs[r]) + " kbps has no candidates");
    }
  }
  return l;
}

void check_k(const LadderProblem& p) {
  if (p.max_representations < p.rungs.size()) {
    throw Error(ErrorCode::InfeasibleK, "K = " + std::to_string(p.max_representations) + " is below the " +
                                            std::to_string(p.rungs.size()) + " rungs");
  }
}

// Sum over GOPs of the per-GOP max across `members`, in GOP order.
double rung_term(const LadderProblem& p, std::span<const std::size_t> members) {
  if (members.empty()) return 0.0;
  const std::size_t n = p.scores[members[0]].size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = p.scores[members[0]][i];
    for (std::size_t m = 1; m < members.size(); ++m) best = std::max(best, p.scores[members[m]][i]);
    total += best;
  }
  return total;
}

LadderSolution solution_from(const LadderProblem& p, std::vector<std::size_t> sel) {
  std::sort(sel.begin(), sel.end());
  LadderSolution s;
  for (std::size_t c : sel) s.selected.push_back(p.candidates[c]);
  s.objective = evaluate(p, sel);
  return s;
}

}  // namespace

double evaluate(const LadderProblem& p, std::span<const std::size_t> selection) {
  std::vector<std::vector<std::size_t>> per_rung(p.rungs.size());
  std::vector<std::size_t> sorted(selection.begin(), selection.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t c : sorted) {
    if (c >= p.candidates.size()) throw Error(ErrorCode::InvalidRange, "candidate index out of range");
    const auto it = std::lower_bound(p.rungs.begin(), p.rungs.end(), p.candidates[c].rung_kbps);
    per_rung[static_cast<std::size_t>(it - p.rungs.begin())].push_back(c);
  }
  double total = 0.0;
  for (std::size_t r = 0; r < p.rungs.size(); ++r) total += p.weights[r] * rung_term(p, per_rung[r]);
  return total;
}

LadderSolution optimize_exhaustive(const LadderProblem& p) {
  if (p.candidates.size() > kMaxExhaustiveCandidates) {
    throw Error(ErrorCode::TooManyCandidates, std::to_string(p.candidates.size()) + " candidates exceed the " +
                                                  std::to_string(kMaxExhaustiveCandidates) + " limit");
  }
  check_k(p);
  const Layout l = layout_of(p);
  const std::size_t nr = p.rungs.size();

  // Candidates are sorted by rung, so each rung owns a contiguous bit range.
  std::vector<std::size_t> offset(nr), width(nr);
  std::uint32_t required_mask = 0;
  for (std::size_t r = 0; r < nr; ++r) {
    offset[r] = l.members[r].front();
    width[r] = l.members[r].size();
  }
  for (std::size_t c = 0; c < p.candidates.size(); ++c) {
    if (l.required[c]) required_mask |= 1u << c;
  }
  if (static_cast<std::size_t>(std::popcount(required_mask)) > p.max_representations) {
    throw Error(ErrorCode::InfeasibleK, "K is below the number of required representations");
  }

  // term[r][s]: rung-r sum over GOPs of the max across local subset s.
  std::vector<std::vector<double>> term(nr);
  for (std::size_t r = 0; r < nr; ++r) {
    const std::size_t subsets = std::size_t{1} << width[r];
    term[r].assign(subsets, 0.0);
    std::vector<double> best(subsets);
    const std::size_t n = p.scores[offset[r]].size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = 1; s < subsets; ++s) {
        const auto low = static_cast<std::size_t>(std::countr_zero(s));
        const double q = p.scores[offset[r] + low][i];
        const std::size_t rest = s & (s - 1);
        best[s] = rest == 0 ? q : std::max(best[rest], q);
        term[r][s] += best[s];
      }
    }
  }

  const std::uint32_t full = p.candidates.size() == 32 ? ~0u : (1u << p.candidates.size()) - 1u;
  bool found = false;
  std::uint32_t best_mask = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  // Compare two masks as sorted index lists.
  auto lex_less = [](std::uint32_t a, std::uint32_t b) {
    while (a && b) {
      const int ia = std::countr_zero(a);
      const int ib = std::countr_zero(b);
      if (ia != ib) return ia < ib;
      a &= a - 1;
      b &= b - 1;
    }
    return a == 0 && b != 0;
  };
  for (std::uint32_t mask = 1; mask <= full && mask != 0; ++mask) {
    if ((mask & required_mask) != required_mask) continue;
    if (static_cast<std::size_t>(std::popcount(mask)) > p.max_representations) continue;
    double value = 0.0;
    bool feasible = true;
    for (std::size_t r = 0; r < nr && feasible; ++r) {
      const std::uint32_t local = (mask >> offset[r]) & ((1u << width[r]) - 1u);
      if (local == 0) {
        feasible = false;
      } else {
        value += p.weights[r] * term[r][local];
      }
    }
    if (!feasible) continue;
    bool better = !found || value > best_value;
    if (found && value == best_value) {
      const int pc = std::popcount(mask);
      const int pb = std::popcount(best_mask);
      better = pc > pb || (pc == pb && lex_less(mask, best_mask));
    }
    if (better) {
      found = true;
      best_mask = mask;
      best_value = value;
    }
    if (mask == full) break;
  }
  if (!found) throw Error(ErrorCode::InfeasibleK, "no feasible selection");
  std::vector<std::size_t> sel;
  for (std::size_t c = 0; c < p.candidates.size(); ++c) {
    if (best_mask & (1u << c)) sel.push_back(c);
  }
  return solution_from(p, std::move(sel));
}

LadderSolution optimize_greedy(const LadderProblem& p) {
  check_k(p);
  const Layout l = layout_of(p);
  const std::size_t nr = p.rungs.size();
  if (p.required.size() > p.max_representations) {
    throw Error(ErrorCode::InfeasibleK, "K is below the number of required representations");
  }
  std::vector<bool> in(p.candidates.size(), false);
  std::vector<std::vector<std::size_t>> chosen(nr);
  std::vector<TraceStep> trace;
  double objective = 0.0;
  std::size_t count = 0;

  auto objective_now = [&] {
    std::vector<std::size_t> sel;
    for (std::size_t c = 0; c < in.size(); ++c) {
      if (in[c]) sel.push_back(c);
    }
    return evaluate(p, sel);
  };
  auto add = [&](std::size_t c, bool seed) {
    in[c] = true;
    chosen[l.rung_of[c]].push_back(c);
    std::sort(chosen[l.rung_of[c]].begin(), chosen[l.rung_of[c]].end());
    ++count;
    const double next = objective_now();
    trace.push_back({p.candidates[c], next - objective, next, seed});
    objective = next;
  };

  for (std::size_t c = 0; c < p.candidates.size(); ++c) {
    if (l.required[c]) add(c, true);
  }
  for (std::size_t r = 0; r < nr; ++r) {
    if (!chosen[r].empty()) continue;
    std::size_t best = l.members[r][0];
    double best_term = -std::numeric_limits<double>::infinity();
    for (std::size_t c : l.members[r]) {
      const std::size_t one[] = {c};
      const double t = rung_term(p, one);
      if (t > best_term) {
        best_term = t;
        best = c;
      }
    }
    add(best, true);
  }

  while (count < p.max_representations) {
    std::size_t best = p.candidates.size();
    double best_gain = 0.0;
    for (std::size_t c = 0; c < p.candidates.size(); ++c) {
      if (in[c]) continue;
      const std::size_t r = l.rung_of[c];
      std::vector<std::size_t> with = chosen[r];
      with.insert(std::upper_bound(with.begin(), with.end(), c), c);
      const double gain = p.weights[r] * (rung_term(p, with) - rung_term(p, chosen[r]));
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    if (best == p.candidates.size()) break;
    add(best, false);
  }

  std::vector<std::size_t> sel;
  for (std::size_t c = 0; c < in.size(); ++c) {
    if (in[c]) sel.push_back(c);
  }
  LadderSolution s = solution_from(p, std::move(sel));
  s.trace = std::move(trace);
  return s;
}

std::vector<double> weights_from_bandwidth(std::span<const double> samples, std::span<const double> rungs) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no bandwidth samples");
  if (rungs.empty()) throw Error(ErrorCode::InvalidRange, "no rungs");
  for (std::size_t i = 1; i < rungs.size(); ++i) {
    if (!(rungs[i] > rungs[i - 1])) throw Error(ErrorCode::InvalidRange, "rungs must be strictly ascending");
  }
  std::vector<std::size_t> counts(rungs.size(), 0);
  for (double s : samples) {
    if (!std::isfinite(s)) throw Error(ErrorCode::NonFinite, "non-finite bandwidth sample");
    const auto it = std::upper_bound(rungs.begin(), rungs.end(), s);
    const std::size_t idx = it == rungs.begin() ? 0 : static_cast<std::size_t>(it - rungs.begin()) - 1;
    ++counts[idx];
  }
  std::vector<double> w(rungs.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = static_cast<double>(counts[i]) / static_cast<double>(samples.size());
  }
  return w;
}

// ---- ladders ----------------------------------------------------------------------------

std::size_t Ladder::representation_count() const {
  std::size_t n = 0;
  for (const auto& r : rungs) n += r.resolutions.size();
  return n;
}

std::vector<Candidate> Ladder::candidates() const {
  std::vector<Candidate> out;
  for (const auto& r : rungs) {
    for (const auto& res : r.resolutions) out.push_back({r.kbps, res});
  }
  return out;
}

Ladder make_ladder(std::vector<LadderRung> rungs) {
  std::sort(rungs.begin(), rungs.end(), [](const LadderRung& a, const LadderRung& b) { return a.kbps < b.kbps; });
  for (std::size_t i = 0; i < rungs.size(); ++i) {
    if (!(rungs[i].kbps > 0.0) || !std::isfinite(rungs[i].kbps)) {
      throw Error(ErrorCode::InvalidRange, "rung bitrate must be positive");
    }
    if (i > 0 && rungs[i].kbps == rungs[i - 1].kbps) throw Error(ErrorCode::InvalidRange, "duplicate rung");
    auto& res = rungs[i].resolutions;
    if (res.empty()) throw Error(ErrorCode::InvalidRange, "rung without resolutions");
    std::sort(res.begin(), res.end());
    if (std::adjacent_find(res.begin(), res.end()) != res.end()) {
      throw Error(ErrorCode::InvalidRange, "duplicate resolution within a rung");
    }
  }
  return Ladder{std::move(rungs)};
}

Ladder to_ladder(std::span<const Candidate> selection) {
  std::map<double, std::vector<Resolution>> by_rung;
  for (const auto& c : selection) by_rung[c.rung_kbps].push_back(c.resolution);
  std::vector<LadderRung> rungs;
  for (auto& [kbps, res] : by_rung) rungs.push_back({kbps, std::move(res)});
  return make_ladder(std::move(rungs));
}

}  // namespace drs::ladder
