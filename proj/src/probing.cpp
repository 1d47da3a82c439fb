#include "tcprobe/probing.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

namespace tcprobe {

std::vector<CandidatePair> select_candidates(const CouplingMatrix& coupling,
                                             long long cand_number) {
  std::vector<CandidatePair> out;
  if (coupling.empty() || cand_number <= 0) return out;

  int max_cm = 0;
  for (const auto& c : coupling.cells()) max_cm = std::max(max_cm, c.count);
  auto count_at_least = [&](int tau) {
    long long n = 0;
    for (const auto& c : coupling.cells()) n += c.count >= tau;
    return n;
  };
  // Smallest tau in [1, max_cm + 1] with count(cm >= tau) <= cand_number.
  int lo = 1, hi = max_cm + 1;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (count_at_least(mid) <= cand_number)
      hi = mid;
    else
      lo = mid + 1;
  }
  for (const auto& c : coupling.cells())
    if (c.count >= lo) out.push_back({c.i, c.j, c.count, 0.0});
  std::sort(out.begin(), out.end(),
            [](const CandidatePair& a, const CandidatePair& b) {
              if (a.cm != b.cm) return a.cm > b.cm;
              return a.i != b.i ? a.i < b.i : a.j < b.j;
            });
  return out;
}

double pair_score(int cm, int nnz_i, int nnz_j, int conf_i, int conf_j,
                  bool conflicting) {
  return (10.0 * cm + nnz_i + nnz_j + 3.0 * conf_i + 3.0 * conf_j) /
         (conflicting ? 10.0 : 1.0);
}

double score_pair(int i, int j, int cm, const MipInstance& instance,
                  const CliqueTable& cliques, std::span<const int> conf,
                  ConflictPenalty penalty) {
  const bool conflicting =
      penalty == ConflictPenalty::kIntersection
          ? cliques.shares_clique(i, j)
          : cliques.in_any_clique(i) || cliques.in_any_clique(j);
  return pair_score(cm, instance.col_nnz(i), instance.col_nnz(j), conf[i],
                    conf[j], conflicting);
}

void score_candidates(std::vector<CandidatePair>& candidates,
                      const MipInstance& instance, const CliqueTable& cliques,
                      ConflictPenalty penalty) {
  const std::vector<int> conf = conflict_numbers(cliques);
  for (CandidatePair& p : candidates)
    p.score = score_pair(p.i, p.j, p.cm, instance, cliques, conf, penalty);
}

std::vector<CandidatePair> order_pairs(std::vector<CandidatePair> candidates,
                                       long long max_probe_number) {
  auto before = [](const CandidatePair& a, const CandidatePair& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  };
  const auto cap = static_cast<std::size_t>(std::max(0LL, max_probe_number));
  if (candidates.size() > cap) {
    std::partial_sort(candidates.begin(), candidates.begin() + cap,
                      candidates.end(), before);
    candidates.resize(cap);
  } else {
    std::sort(candidates.begin(), candidates.end(), before);
  }
  return candidates;
}

int ProbeOutcome::num_infeasible() const {
  return static_cast<int>(std::count(feasible.begin(), feasible.end(), false));
}

std::vector<BoundChange> hull(const ProbeOutcome& outcome,
                              std::span<const int> branches,
                              std::span<const double> lower,
                              std::span<const double> upper) {
  std::vector<const std::vector<BoundChange>*> lists;
  for (int b : branches)
    if (outcome.feasible[b]) lists.push_back(&outcome.changes[b]);
  std::vector<BoundChange> out;
  if (lists.empty()) return out;

  // A variable untouched in one branch keeps its global bounds in the hull.
  for (const BoundChange& first : *lists[0]) {
    double lb = first.lower, ub = first.upper;
    bool everywhere = true;
    for (std::size_t l = 1; l < lists.size() && everywhere; ++l) {
      const auto& list = *lists[l];
      auto it = std::lower_bound(
          list.begin(), list.end(), first.var,
          [](const BoundChange& c, int var) { return c.var < var; });
      if (it == list.end() || it->var != first.var) {
        everywhere = false;
      } else {
        lb = std::min(lb, it->lower);
        ub = std::max(ub, it->upper);
      }
    }
    if (!everywhere) continue;
    const int k = first.var;
    if (lb > lower[k] || ub < upper[k])
      out.push_back({k, std::max(lb, lower[k]), std::min(ub, upper[k])});
  }
  return out;
}

CombinedBounds combine_bounds(const ProbeOutcome& outcome,
                              std::span<const double> lower,
                              std::span<const double> upper) {
  static constexpr std::array<int, 4> kAll{0, 1, 2, 3};
  // Assignments containing x_i = 0, x_i = 1, x_j = 0, x_j = 1.
  static constexpr std::array<std::array<int, 2>, 4> kBranch{
      {{0, 2}, {1, 3}, {0, 1}, {2, 3}}};
  CombinedBounds out;
  out.global = hull(outcome, kAll, lower, upper);
  for (int b = 0; b < 4; ++b) {
    const auto& members = kBranch[b];
    if (outcome.feasible[members[0]] || outcome.feasible[members[1]])
      out.branch[b] = hull(outcome, members, lower, upper);
  }
  return out;
}

FixingDecision derive_fixings(const ProbeOutcome& outcome) {
  FixingDecision out;
  auto inf = [&](int v1, int v2) {
    return !outcome.feasible[ProbeOutcome::index(v1, v2)];
  };
  const int n = outcome.num_infeasible();
  const int i = outcome.i, j = outcome.j;
  if (n == 4) {
    out.infeasible = true;
  } else if (n == 3) {
    for (int v2 = 0; v2 < 2; ++v2)
      for (int v1 = 0; v1 < 2; ++v1)
        if (!inf(v1, v2)) out.fixings = {{i, v1}, {j, v2}};
  } else if (n == 2) {
    if (inf(0, 0) && inf(0, 1)) out.fixings.push_back({i, 1});
    if (inf(1, 0) && inf(1, 1)) out.fixings.push_back({i, 0});
    if (inf(0, 0) && inf(1, 0)) out.fixings.push_back({j, 1});
    if (inf(0, 1) && inf(1, 1)) out.fixings.push_back({j, 0});
    if (inf(0, 1) && inf(1, 0)) out.aggregation = std::pair{1.0, 0.0};
    if (inf(0, 0) && inf(1, 1)) out.aggregation = std::pair{-1.0, 1.0};
  }
  return out;
}

void update_budget(ProbingBudget& budget, const ProbeEvents& events) {
  double eff = 0.9 * budget.eff;
  if (events.fixings >= 2)
    eff = 0.0;
  else if (events.fixings == 1)
    eff *= 0.5;
  if (events.conflict_or_aggregation) eff *= 0.8;
  if (events.implication) eff *= 0.9;
  budget.eff = eff + 110.0;
  ++budget.pairs_done;
}

namespace {

const BoundChange* find_change(const std::vector<BoundChange>& list, int var) {
  auto it = std::lower_bound(
      list.begin(), list.end(), var,
      [](const BoundChange& c, int v) { return c.var < v; });
  return it != list.end() && it->var == var ? &*it : nullptr;
}

bool excluded(std::span<const int> exclude, int var) {
  return std::find(exclude.begin(), exclude.end(), var) != exclude.end();
}

}  // namespace

BranchDeductions deduce_from_branches(int var, const BranchBounds& zero,
                                      const BranchBounds& one,
                                      std::span<const int> exclude,
                                      std::span<const double> lower,
                                      std::span<const double> upper,
                                      ImplicationStore& implications,
                                      double tol) {
  BranchDeductions out;
  if (!zero || !one) return out;

  for (int value = 0; value < 2; ++value) {
    const Literal premise = Literal::of(var, value);
    for (const BoundChange& c : value == 0 ? *zero : *one) {
      if (c.var == var || excluded(exclude, c.var)) continue;
      if (c.lower > lower[c.var] &&
          implications.add_single(premise, {c.var, BoundKind::kLower, c.lower}))
        out.implication = true;
      if (c.upper < upper[c.var] &&
          implications.add_single(premise, {c.var, BoundKind::kUpper, c.upper}))
        out.implication = true;
    }
  }

  for (const BoundChange& c0 : *zero) {
    const int k = c0.var;
    if (k == var || excluded(exclude, k)) continue;
    const BoundChange* c1 = find_change(*one, k);
    if (c1 == nullptr) continue;
    if (c0.upper - c0.lower > tol || c1->upper - c1->lower > tol) continue;
    const double alpha = c0.lower, beta = c1->lower;
    if (std::abs(beta - alpha) <= tol) continue;
    const AggregationResult r =
        implications.add_aggregation(k, var, beta - alpha, alpha);
    switch (r.kind) {
      case AggregationResult::Kind::kAdded:
        out.aggregation = true;
        break;
      case AggregationResult::Kind::kDuplicate:
        break;
      case AggregationResult::Kind::kContradiction:
        if (r.forced)
          out.forced.push_back(*r.forced);
        else
          out.infeasible = true;
        break;
    }
  }
  return out;
}

bool derive_pair_implications(const ProbeOutcome& outcome,
                              const CombinedBounds& combined,
                              std::span<const double> lower,
                              std::span<const double> upper,
                              ImplicationStore& implications, double tol) {
  bool added = false;
  for (int v2 = 0; v2 < 2; ++v2) {
    for (int v1 = 0; v1 < 2; ++v1) {
      const int b = ProbeOutcome::index(v1, v2);
      if (!outcome.feasible[b]) continue;
      const auto& bi = *combined.branch[v1];
      const auto& bj = *combined.branch[2 + v2];
      const Literal li = Literal::of(outcome.i, v1);
      const Literal lj = Literal::of(outcome.j, v2);
      for (const BoundChange& c : outcome.changes[b]) {
        const int k = c.var;
        if (k == outcome.i || k == outcome.j) continue;
        const BoundChange* ci = find_change(bi, k);
        const BoundChange* cj = find_change(bj, k);
        const double lb_i = ci ? ci->lower : lower[k];
        const double lb_j = cj ? cj->lower : lower[k];
        const double ub_i = ci ? ci->upper : upper[k];
        const double ub_j = cj ? cj->upper : upper[k];
        if (c.lower > std::max(lb_i, lb_j) + tol &&
            implications.add_pair(li, lj, {k, BoundKind::kLower, c.lower}))
          added = true;
        if (c.upper < std::min(ub_i, ub_j) - tol &&
            implications.add_pair(li, lj, {k, BoundKind::kUpper, c.upper}))
          added = true;
      }
    }
  }
  return added;
}

namespace {

std::vector<bool> integrality(const MipInstance& instance) {
  std::vector<bool> out(instance.num_cols());
  for (int j = 0; j < instance.num_cols(); ++j)
    out[j] = instance.is_integer(j);
  return out;
}

// Fixes var to value in (lower, upper); false when outside the domain or not
// integral for an integer column.
bool fix_value(int var, double value, std::vector<double>& lower,
               std::vector<double>& upper, const MipInstance& instance,
               double tol) {
  if (instance.is_integer(var)) {
    const double r = std::round(value);
    if (std::abs(r - value) > tol) return false;
    value = r;
  }
  if (value < lower[var] - tol || value > upper[var] + tol) return false;
  value = std::clamp(value, lower[var], upper[var]);
  lower[var] = upper[var] = value;
  return true;
}

}  // namespace

bool settle_aggregations(ImplicationStore& implications,
                         std::vector<double>& lower, std::vector<double>& upper,
                         const MipInstance& instance, double tol,
                         std::string* reason) {
  auto fixed = [&](int j) { return upper[j] - lower[j] <= tol; };
  for (bool changed = true; changed;) {
    changed = false;
    for (const Aggregation& a : implications.aggregations()) {
      if (fixed(a.partner)) {
        if (!fix_value(a.var, a.scale * lower[a.partner] + a.offset, lower,
                       upper, instance, tol)) {
          if (reason)
            *reason = fmt::format("aggregation of {} contradicts its bounds",
                                  instance.col_name(a.var));
          return false;
        }
      } else if (fixed(a.var)) {
        if (!fix_value(a.partner, (lower[a.var] - a.offset) / a.scale, lower,
                       upper, instance, tol)) {
          if (reason)
            *reason = fmt::format("aggregation of {} contradicts its bounds",
                                  instance.col_name(a.var));
          return false;
        }
      } else {
        continue;
      }
      implications.remove_aggregation(a.var);
      changed = true;
    }
  }
  return true;
}

Clock::time_point deadline_after(double seconds) {
  if (!(seconds < 1e9)) return Clock::time_point::max();
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(seconds));
}

ProbingWorker::ProbingWorker(const MipInstance& instance,
                             std::span<const double> lower,
                             std::span<const double> upper, CliqueTable cliques,
                             ImplicationStore implications,
                             const Config& config)
    : instance_(&instance),
      config_(config),
      lower_(lower.begin(), lower.end()),
      upper_(upper.begin(), upper.end()),
      cliques_(std::move(cliques)),
      implications_(std::move(implications)),
      domains_(lower, upper, integrality(instance), config.tol),
      propagator_(instance, config.max_propagation_rounds),
      probed_(instance.num_cols(), 0) {
  budget_.eff_threshold = config.eff_threshold;
}

ProbeOutcome ProbingWorker::probe_pair(int i, int j) {
  ProbeOutcome out;
  out.i = i;
  out.j = j;
  for (int v2 = 0; v2 < 2; ++v2) {
    for (int v1 = 0; v1 < 2; ++v1) {
      const int b = ProbeOutcome::index(v1, v2);
      domains_.reset();
      domains_.fix(i, v1);
      domains_.fix(j, v2);
      if (!domains_.infeasible())
        propagator_.run(domains_, cliques_, implications_);
      out.feasible[b] = !domains_.infeasible();
      if (out.feasible[b]) out.changes[b] = domains_.changes();
    }
  }
  domains_.reset();
  return out;
}

std::optional<std::vector<BoundChange>> ProbingWorker::probe_single(int var,
                                                                    int value) {
  domains_.reset();
  domains_.fix(var, value);
  if (!domains_.infeasible())
    propagator_.run(domains_, cliques_, implications_);
  std::optional<std::vector<BoundChange>> out;
  if (!domains_.infeasible()) out = domains_.changes();
  domains_.reset();
  return out;
}

void ProbingWorker::fail(std::string reason) {
  if (status_ == Status::kOk) {
    status_ = Status::kInfeasible;
    reason_ = std::move(reason);
  }
}

bool ProbingWorker::set_global(int var, double lower, double upper,
                               int& fixings) {
  if (instance_->is_integer(var)) {
    lower = std::ceil(lower - config_.tol);
    upper = std::floor(upper + config_.tol);
  }
  const bool was_fixed = is_fixed(var);
  const double lo = std::max(lower, lower_[var]);
  const double up = std::min(upper, upper_[var]);
  if (lo > up + config_.tol) {
    fail(fmt::format("column {} has an empty domain after probing",
                     instance_->col_name(var)));
    return false;
  }
  if (lo == lower_[var] && up == upper_[var]) return true;
  lower_[var] = lo;
  upper_[var] = std::max(lo, up);
  domains_.set_base(var, lower_[var], upper_[var]);
  if (!was_fixed && is_fixed(var)) ++fixings;
  return true;
}

ProbeEvents ProbingWorker::process(const ProbeOutcome& outcome) {
  ProbeEvents events;
  const int i = outcome.i, j = outcome.j;
  const double tol = config_.tol;

  for (int v2 = 0; v2 < 2; ++v2) {
    for (int v1 = 0; v1 < 2; ++v1) {
      if (outcome.feasible[ProbeOutcome::index(v1, v2)]) continue;
      const ConflictCut cut{i, j, v1, v2};
      if (cliques_.contains_pair(cut.first(), cut.second())) continue;
      cliques_.add_clique(Clique{{cut.first(), cut.second()}, -1, 2});
      conflicts_.push_back(cut);
      events.conflict_or_aggregation = true;
    }
  }
  if (outcome.num_infeasible() == 4) {
    fail(fmt::format("no assignment of ({}, {}) is feasible",
                     instance_->col_name(i), instance_->col_name(j)));
    return events;
  }

  const CombinedBounds combined = combine_bounds(outcome, lower_, upper_);
  if (observer_) observer_(PairReport{&outcome, &combined, lower_, upper_});

  // Deductions are made against the bounds from before this pair.
  const std::array<int, 2> pair{i, j};
  const BranchDeductions di =
      deduce_from_branches(i, combined.branch[0], combined.branch[1], pair,
                           lower_, upper_, implications_, tol);
  const BranchDeductions dj =
      deduce_from_branches(j, combined.branch[2], combined.branch[3], pair,
                           lower_, upper_, implications_, tol);
  const bool pair_implications = derive_pair_implications(
      outcome, combined, lower_, upper_, implications_, tol);
  events.implication = di.implication || dj.implication || pair_implications;
  events.conflict_or_aggregation |= di.aggregation || dj.aggregation;
  if (di.infeasible || dj.infeasible) {
    fail("contradictory aggregations");
    return events;
  }

  const FixingDecision decision = derive_fixings(outcome);
  std::vector<std::pair<int, double>> forced = di.forced;
  forced.insert(forced.end(), dj.forced.begin(), dj.forced.end());
  if (decision.aggregation) {
    const auto [scale, offset] = *decision.aggregation;
    const AggregationResult r =
        implications_.add_aggregation(j, i, scale, offset);
    if (r.kind == AggregationResult::Kind::kAdded) {
      events.conflict_or_aggregation = true;
    } else if (r.kind == AggregationResult::Kind::kContradiction) {
      if (!r.forced) {
        fail("contradictory aggregations");
        return events;
      }
      forced.push_back(*r.forced);
    }
  }

  for (const BoundChange& c : combined.global)
    if (!set_global(c.var, c.lower, c.upper, events.fixings)) return events;
  for (const auto& [var, value] : decision.fixings)
    if (!set_global(var, value, value, events.fixings)) return events;
  for (const auto& [var, value] : forced)
    if (!set_global(var, value, value, events.fixings)) return events;
  return events;
}

void ProbingWorker::run(std::span<const CandidatePair> pairs,
                        long long max_pairs, Clock::time_point deadline) {
  budget_.max_pairs = max_pairs;
  budget_.deadline = deadline;
  terminated_by_ = TerminatedBy::kExhausted;
  if (budget_.pair_limit_reached()) {
    terminated_by_ = TerminatedBy::kPairLimit;
    return;
  }
  for (const CandidatePair& p : pairs) {
    if (status_ != Status::kOk) return;
    if (probed_[p.i] && probed_[p.j]) continue;
    if (is_fixed(p.i) || is_fixed(p.j)) continue;
    if (budget_.past_deadline()) {
      terminated_by_ = TerminatedBy::kTimeLimit;
      return;
    }
    const ProbeOutcome outcome = probe_pair(p.i, p.j);
    probed_[p.i] = probed_[p.j] = 1;
    update_budget(budget_, process(outcome));
    if (status_ != Status::kOk) return;
    if (budget_.pair_limit_reached()) {
      terminated_by_ = TerminatedBy::kPairLimit;
      return;
    }
    if (budget_.effort_exhausted()) {
      terminated_by_ = TerminatedBy::kEffort;
      return;
    }
  }
}

std::vector<int> ProbingWorker::probed() const {
  std::vector<int> out;
  for (int j = 0; j < static_cast<int>(probed_.size()); ++j)
    if (probed_[j]) out.push_back(j);
  return out;
}

ProbingResult run_serial(const PresolveOutput& presolved, const CmCt& structures,
                         const Config& config) {
  const MipInstance& instance = presolved.instance;
  const Clock::time_point deadline = deadline_after(config.time_limit_seconds);
  ProbingResult out;

  std::vector<CandidatePair> candidates =
      select_candidates(structures.coupling, config.cand_number);
  out.candidates = static_cast<long long>(candidates.size());
  score_candidates(candidates, instance, structures.cliques,
                   config.conflict_penalty);
  const std::vector<CandidatePair> ordered =
      order_pairs(std::move(candidates), config.max_probe_number);

  ProbingWorker worker(instance, instance.lower(), instance.upper(),
                       structures.cliques,
                       ImplicationStore(instance.num_cols()), config);
  worker.run(ordered, config.max_probe_number, deadline);

  out.status = worker.status();
  out.reason = worker.reason();
  out.lower.assign(worker.lower().begin(), worker.lower().end());
  out.upper.assign(worker.upper().begin(), worker.upper().end());
  out.implications = worker.implications();
  out.new_conflicts = worker.new_conflicts();
  out.probed = worker.probed();
  out.pairs_probed = worker.pairs_done();
  out.pairs_per_thread = {worker.pairs_done()};
  out.terminated_by = worker.terminated_by();
  if (out.status == Status::kOk &&
      !settle_aggregations(out.implications, out.lower, out.upper, instance,
                           config.tol, &out.reason))
    out.status = Status::kInfeasible;
  return out;
}

long long Reductions::num_bound_changes() const {
  long long n = 0;
  for (const BoundChange& c : bounds) n += !fixings.contains(c.var);
  return n;
}

Reductions make_reductions(const MipInstance& reference,
                           const ProbingResult& result, double tol) {
  Reductions out;
  for (int j = 0; j < reference.num_cols(); ++j) {
    const double lo = result.lower[j], up = result.upper[j];
    if (lo == reference.lower(j) && up == reference.upper(j)) continue;
    out.bounds.push_back({j, lo, up});
    const bool was_fixed = reference.upper(j) - reference.lower(j) <= tol;
    if (!was_fixed && up - lo <= tol) out.fixings[j] = lo;
  }
  out.aggregations = result.implications.aggregations();
  out.new_conflicts = result.new_conflicts;
  out.single_implications = result.implications.all_singles();
  out.pair_implications = result.implications.all_pairs();
  out.probed = result.probed;
  return out;
}

namespace {

std::string fresh_name(const std::string& base,
                       std::unordered_set<std::string>& taken) {
  std::string name = base;
  while (taken.contains(name)) name += "_";
  taken.insert(name);
  return name;
}

}  // namespace

ApplyResult apply_reductions(const MipInstance& instance,
                             const Reductions& reductions, double tol) {
  ApplyResult out;
  RawInstance raw = instance.to_raw();

  auto refuse = [&](int j) {
    out.status = Status::kInfeasible;
    out.reason = fmt::format("reduction leaves column {} with an empty domain",
                             instance.col_name(j));
    out.instance = instance;
    return out;
  };
  for (const BoundChange& c : reductions.bounds) {
    const double lo = std::max(c.lower, raw.lower[c.var]);
    const double up = std::min(c.upper, raw.upper[c.var]);
    if (lo > up + tol) return refuse(c.var);
    raw.lower[c.var] = lo;
    raw.upper[c.var] = std::max(lo, up);
  }
  for (const auto& [j, value] : reductions.fixings) {
    if (value < raw.lower[j] - tol || value > raw.upper[j] + tol)
      return refuse(j);
    raw.lower[j] = raw.upper[j] = value;
  }

  std::unordered_set<std::string> taken(raw.row_names.begin(),
                                        raw.row_names.end());
  auto append_row = [&](const std::string& name, RowSense sense, double rhs) {
    raw.row_names.push_back(fresh_name(name, taken));
    raw.senses.push_back(sense);
    raw.rhs.push_back(rhs);
    raw.ranges.push_back(std::nullopt);
    return static_cast<int>(raw.rhs.size()) - 1;
  };
  int n = 0;
  for (const ConflictCut& c : reductions.new_conflicts) {
    const int r = append_row(fmt::format("tcp_c{}", n++), RowSense::kLE,
                             c.rhs());
    raw.entries.push_back({r, c.i, c.coef_i()});
    raw.entries.push_back({r, c.j, c.coef_j()});
  }
  n = 0;
  for (const Aggregation& a : reductions.aggregations) {
    // x_k - a x_j = b
    const int r = append_row(fmt::format("tcp_a{}", n++), RowSense::kEQ,
                             a.offset);
    raw.entries.push_back({r, a.var, 1.0});
    raw.entries.push_back({r, a.partner, -a.scale});
  }
  out.instance = build_instance(std::move(raw));
  return out;
}

}  // namespace tcprobe
