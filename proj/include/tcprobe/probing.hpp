#ifndef TCPROBE_PROBING_HPP_
#define TCPROBE_PROBING_HPP_

#include <array>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcprobe/config.hpp"
#include "tcprobe/metrics.hpp"
#include "tcprobe/model.hpp"
#include "tcprobe/prepresolve.hpp"
#include "tcprobe/propagation.hpp"
#include "tcprobe/structures.hpp"

namespace tcprobe {

using Clock = std::chrono::steady_clock;

struct CandidatePair {
  int i;
  int j;
  int cm;
  double score = 0.0;

  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

/// Cells of CM with cm >= tau, tau being the smallest threshold that keeps at
/// most cand_number cells. Sorted by descending cm, then (i, j).
std::vector<CandidatePair> select_candidates(const CouplingMatrix& coupling,
                                             long long cand_number);

/// (10 cm + nnz_i + nnz_j + 3 conf_i + 3 conf_j) / (conflicting ? 10 : 1)
double pair_score(int cm, int nnz_i, int nnz_j, int conf_i, int conf_j,
                  bool conflicting);

double score_pair(int i, int j, int cm, const MipInstance& instance,
                  const CliqueTable& cliques, std::span<const int> conf,
                  ConflictPenalty penalty = ConflictPenalty::kIntersection);

void score_candidates(std::vector<CandidatePair>& candidates,
                      const MipInstance& instance, const CliqueTable& cliques,
                      ConflictPenalty penalty);

/// Top max_probe_number pairs by descending score, ties by ascending (i, j).
std::vector<CandidatePair> order_pairs(std::vector<CandidatePair> candidates,
                                       long long max_probe_number);

/// Excludes x_i = v1, x_j = v2:  (2v1-1) x_i + (2v2-1) x_j <= v1 + v2 - 1.
struct ConflictCut {
  int i;
  int j;
  int v1;
  int v2;

  Literal first() const { return Literal::of(i, v1); }
  Literal second() const { return Literal::of(j, v2); }
  double coef_i() const { return 2.0 * v1 - 1.0; }
  double coef_j() const { return 2.0 * v2 - 1.0; }
  double rhs() const { return v1 + v2 - 1.0; }

  friend bool operator==(const ConflictCut&, const ConflictCut&) = default;
};

/// Results of the four assignments of a probed pair. Branch index is
/// v1 + 2 * v2, i.e. the order (0,0), (1,0), (0,1), (1,1).
struct ProbeOutcome {
  int i = -1;
  int j = -1;
  std::array<bool, 4> feasible{};
  /// Bounds that differ from the global ones, sorted by variable. Empty for
  /// infeasible branches.
  std::array<std::vector<BoundChange>, 4> changes;

  static int index(int v1, int v2) { return v1 + 2 * v2; }
  int num_infeasible() const;
};

/// Bounds of one literal branch: the hull over the feasible assignments that
/// contain it. Unset when no such assignment is feasible.
using BranchBounds = std::optional<std::vector<BoundChange>>;

struct CombinedBounds {
  /// New global bounds (hull over every feasible assignment).
  std::vector<BoundChange> global;
  /// Branches x_i = 0, x_i = 1, x_j = 0, x_j = 1.
  std::array<BranchBounds, 4> branch;
};

/// Hull of the selected feasible branches against the given bounds. Only
/// variables whose hull is tighter than [lower, upper] are listed.
std::vector<BoundChange> hull(const ProbeOutcome& outcome,
                              std::span<const int> branches,
                              std::span<const double> lower,
                              std::span<const double> upper);

CombinedBounds combine_bounds(const ProbeOutcome& outcome,
                              std::span<const double> lower,
                              std::span<const double> upper);

struct FixingDecision {
  bool infeasible = false;
  std::vector<std::pair<int, int>> fixings;  // (var, value)
  /// x_j = scale * x_i + offset.
  std::optional<std::pair<double, double>> aggregation;
};

FixingDecision derive_fixings(const ProbeOutcome& outcome);

struct ProbeEvents {
  int fixings = 0;
  bool conflict_or_aggregation = false;
  bool implication = false;
};

struct ProbingBudget {
  double eff = 0.0;
  long long pairs_done = 0;
  Clock::time_point deadline = Clock::time_point::max();
  long long max_pairs = 1000;
  double eff_threshold = 1000.0;

  bool pair_limit_reached() const { return pairs_done >= max_pairs; }
  bool effort_exhausted() const { return eff > eff_threshold; }
  bool past_deadline() const { return Clock::now() > deadline; }
};

/// One iteration: eff is decayed by 0.9, scaled by the event multipliers and
/// increased by 110; pairs_done is incremented.
void update_budget(ProbingBudget& budget, const ProbeEvents& events);

/// Everything the observer of a probed pair may want to inspect.
struct PairReport {
  const ProbeOutcome* outcome;
  const CombinedBounds* combined;
  /// Global bounds right before the pair was probed.
  std::span<const double> lower;
  std::span<const double> upper;
};

/// Probing state of one worker: global bounds, working clique table and
/// implication store, and the list of new conflicts. The serial driver uses
/// one worker; the parallel driver uses one per thread.
class ProbingWorker {
 public:
  ProbingWorker(const MipInstance& instance, std::span<const double> lower,
                std::span<const double> upper, CliqueTable cliques,
                ImplicationStore implications, const Config& config);

  /// Probes the pairs in order until the budget is spent.
  void run(std::span<const CandidatePair> pairs, long long max_pairs,
           Clock::time_point deadline);

  /// The four assignments of (i, j) under the current state; adds nothing.
  ProbeOutcome probe_pair(int i, int j);
  /// Propagation of a single fixing under the current state; nullopt when
  /// infeasible. Used as the one-column comparator.
  std::optional<std::vector<BoundChange>> probe_single(int var, int value);

  void set_observer(std::function<void(const PairReport&)> observer) {
    observer_ = std::move(observer);
  }

  Status status() const { return status_; }
  const std::string& reason() const { return reason_; }
  TerminatedBy terminated_by() const { return terminated_by_; }
  long long pairs_done() const { return budget_.pairs_done; }
  const ProbingBudget& budget() const { return budget_; }

  std::span<const double> lower() const { return lower_; }
  std::span<const double> upper() const { return upper_; }
  const CliqueTable& cliques() const { return cliques_; }
  const ImplicationStore& implications() const { return implications_; }
  const std::vector<ConflictCut>& new_conflicts() const { return conflicts_; }
  /// Probed variables in ascending order.
  std::vector<int> probed() const;

 private:
  bool is_fixed(int j) const { return upper_[j] - lower_[j] <= config_.tol; }
  /// Applies the deductions of one probed pair; returns the effort events.
  ProbeEvents process(const ProbeOutcome& outcome);
  bool set_global(int var, double lower, double upper, int& fixings);
  void fail(std::string reason);

  const MipInstance* instance_;
  Config config_;
  std::vector<double> lower_, upper_;
  CliqueTable cliques_;
  ImplicationStore implications_;
  LocalDomains domains_;
  Propagator propagator_;
  std::vector<ConflictCut> conflicts_;
  std::vector<char> probed_;
  ProbingBudget budget_;
  Status status_ = Status::kOk;
  std::string reason_;
  TerminatedBy terminated_by_ = TerminatedBy::kExhausted;
  std::function<void(const PairReport&)> observer_;
};

struct BranchDeductions {
  bool aggregation = false;
  bool implication = false;
  std::vector<std::pair<int, double>> forced;  // from AF contradictions
  bool infeasible = false;
};

/// Derives aggregations x_k = (beta - alpha) x_var + alpha and single
/// implications from the two branch bounds of var. Implications are kept only
/// when tighter than [lower, upper].
BranchDeductions deduce_from_branches(int var, const BranchBounds& zero,
                                      const BranchBounds& one,
                                      std::span<const int> exclude,
                                      std::span<const double> lower,
                                      std::span<const double> upper,
                                      ImplicationStore& implications,
                                      double tol);

/// Pair implications tighter than both literal branches.
bool derive_pair_implications(const ProbeOutcome& outcome,
                              const CombinedBounds& combined,
                              std::span<const double> lower,
                              std::span<const double> upper,
                              ImplicationStore& implications, double tol);

/// Pushes fixed values through the aggregations and drops aggregations whose
/// dependent or root is fixed. Returns false when a fixed value violates a
/// bound or integrality.
bool settle_aggregations(ImplicationStore& implications,
                         std::vector<double>& lower, std::vector<double>& upper,
                         const MipInstance& instance, double tol,
                         std::string* reason = nullptr);

Clock::time_point deadline_after(double seconds);

/// Output of serial or parallel probing on the presolved instance.
struct ProbingResult {
  Status status = Status::kOk;
  std::string reason;
  std::vector<double> lower, upper;
  ImplicationStore implications;
  std::vector<ConflictCut> new_conflicts;
  std::vector<int> probed;
  long long candidates = 0;
  long long pairs_probed = 0;
  std::vector<long long> pairs_per_thread;
  TerminatedBy terminated_by = TerminatedBy::kExhausted;
};

ProbingResult run_serial(const PresolveOutput& presolved, const CmCt& structures,
                         const Config& config);

/// Reductions relative to a reference instance with the same columns.
struct Reductions {
  std::map<int, double> fixings;
  std::vector<Aggregation> aggregations;
  std::vector<ConflictCut> new_conflicts;
  /// Final bounds of every column whose bounds differ from the reference.
  std::vector<BoundChange> bounds;
  std::vector<std::pair<Literal, Implication>> single_implications;
  std::vector<std::pair<LiteralPair, Implication>> pair_implications;
  std::vector<int> probed;

  /// Bound changes that are not fixings.
  long long num_bound_changes() const;
};

Reductions make_reductions(const MipInstance& reference,
                           const ProbingResult& result, double tol);

struct ApplyResult {
  Status status = Status::kOk;
  std::string reason;
  MipInstance instance;
};

/// Replaces bounds, appends one LE row per conflict and one EQ row per
/// aggregation. Implications are not part of the output model.
ApplyResult apply_reductions(const MipInstance& instance,
                             const Reductions& reductions, double tol = 1e-6);

}  // namespace tcprobe

#endif  // TCPROBE_PROBING_HPP_
