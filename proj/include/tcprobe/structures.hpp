#ifndef TCPROBE_STRUCTURES_HPP_
#define TCPROBE_STRUCTURES_HPP_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tcprobe/model.hpp"

namespace tcprobe {

struct PresolveOutput;

/// Symmetric count of non-clique rows shared by two binaries. Only cells with
/// i < j are stored; lookups are symmetric.
class CouplingMatrix {
 public:
  struct Cell {
    int i;
    int j;
    int count;
  };

  CouplingMatrix() = default;
  /// Cells need not be sorted; counts must be positive.
  explicit CouplingMatrix(std::vector<Cell> cells);

  int at(int i, int j) const;
  std::span<const Cell> cells() const { return cells_; }
  bool empty() const { return cells_.empty(); }
  std::size_t size() const { return cells_.size(); }

  bool truncated = false;
  long long pair_insertions = 0;

 private:
  std::vector<Cell> cells_;  // sorted by (i, j)
};

struct Clique {
  std::vector<Literal> literals;
  int source_row = -1;  // -1 for cliques found by probing
  int row_nnz = 0;
};

/// Per-variable index of the cliques that contain one of its literals.
class CliqueTable {
 public:
  struct Membership {
    int clique;
    Polarity polarity;
  };

  CliqueTable() = default;
  explicit CliqueTable(int num_cols) : members_(num_cols) {}

  int add_clique(Clique clique);

  int num_cols() const { return static_cast<int>(members_.size()); }
  std::size_t num_cliques() const { return cliques_.size(); }
  const Clique& clique(int c) const { return cliques_[c]; }
  std::span<const Membership> memberships(int var) const {
    return members_[var];
  }

  /// True when some clique contains both literals.
  bool contains_pair(Literal a, Literal b) const;
  bool shares_clique(int i, int j) const;
  bool in_any_clique(int j) const { return !members_[j].empty(); }

 private:
  std::vector<Clique> cliques_;
  std::vector<std::vector<Membership>> members_;
};

/// conf[j] = sum of the source row lengths of the cliques containing j.
int conflict_number(int j, const CliqueTable& cliques);
std::vector<int> conflict_numbers(const CliqueTable& cliques);

struct CmCt {
  CouplingMatrix coupling;
  CliqueTable cliques;
};

/// Counts binary pairs of every non-clique row with at most size_limit
/// nonzeros; stops at the first row whose pairs would push the number of
/// insertions past work_limit. The clique table is built from the clique rows.
CmCt build_cm_ct(const PresolveOutput& presolved, long long size_limit,
                 long long work_limit);

/// x[var] = scale * x[partner] + offset
struct Aggregation {
  int var = -1;
  int partner = -1;
  double scale = 1.0;
  double offset = 0.0;

  friend bool operator==(const Aggregation&, const Aggregation&) = default;
};

enum class BoundKind : std::uint8_t { kLower, kUpper };

struct Implication {
  int target = -1;
  BoundKind kind = BoundKind::kLower;
  double bound = 0.0;

  friend bool operator==(const Implication&, const Implication&) = default;
};

/// Premise of a pair implication; first.var < second.var.
using LiteralPair = std::pair<Literal, Literal>;

struct AggregationResult {
  enum class Kind : std::uint8_t { kAdded, kDuplicate, kContradiction };
  Kind kind = Kind::kAdded;
  /// For kContradiction: the two relations pin `var` to `value` (which may be
  /// outside its domain or fractional, meaning the problem is infeasible).
  /// Unset when the relations admit no value at all.
  std::optional<std::pair<int, double>> forced;
};

/// Aggregations (AF) and literal implications (IG).
class ImplicationStore {
 public:
  ImplicationStore() = default;
  explicit ImplicationStore(int num_cols);

  int num_cols() const { return static_cast<int>(af_.size()); }

  /// Adds x[var] = scale * x[partner] + offset after resolving partner to its
  /// root. Variables already aggregated to var are re-pointed to the new root.
  AggregationResult add_aggregation(int var, int partner, double scale,
                                    double offset, double tol = 1e-9);
  const std::optional<Aggregation>& aggregation(int var) const {
    return af_[var];
  }
  /// Variables whose root is var.
  std::span<const int> dependents(int var) const { return dependents_[var]; }
  /// All aggregations in insertion order of their dependent variable.
  std::vector<Aggregation> aggregations() const;
  std::size_t num_aggregations() const { return num_aggregations_; }
  /// Drops the aggregation of var (used once var is fixed).
  void remove_aggregation(int var);

  /// Keeps the tightest bound per (literal, target, kind) and drops the pair
  /// entries it dominates. Returns true when the store changed.
  bool add_single(Literal premise, Implication implication);
  /// Rejected when an entry on either premise literal already implies it.
  bool add_pair(Literal a, Literal b, Implication implication);

  /// Calls f(Implication) for every single implication of `premise`.
  template <typename F>
  void for_each_single(Literal premise, F&& f) const {
    for (const auto& [key, bound] : singles_[slot(premise)])
      f(Implication{key.first, key.second, bound});
  }
  /// Calls f(other, Implication) for every pair implication that has
  /// `premise` as one of its two literals.
  template <typename F>
  void for_each_pair_with(Literal premise, F&& f) const {
    const std::size_t s = slot(premise);
    for (std::size_t other : pair_partners_[s]) {
      auto it = pairs_.find(s < other ? std::pair{s, other}
                                      : std::pair{other, s});
      for (const auto& [key, bound] : it->second)
        f(literal_of(other), Implication{key.first, key.second, bound});
    }
  }
  std::vector<Implication> singles(Literal premise) const;
  /// Whether a single implication on `premise` gives a bound at least as
  /// tight as `implication`.
  bool single_dominates(Literal premise, const Implication& implication) const;

  std::size_t num_singles() const;
  std::size_t num_pairs() const;

  /// Flat listings for validation and merging, in deterministic order.
  std::vector<std::pair<Literal, Implication>> all_singles() const;
  std::vector<std::pair<LiteralPair, Implication>> all_pairs() const;

 private:
  using TargetKey = std::pair<int, BoundKind>;
  using BoundMap = std::map<TargetKey, double>;

  static std::size_t slot(Literal l) {
    return 2 * static_cast<std::size_t>(l.var) + l.true_value();
  }
  static Literal literal_of(std::size_t s) {
    return Literal::of(static_cast<int>(s / 2), static_cast<int>(s % 2));
  }
  static bool tighter(BoundKind kind, double candidate, double existing);
  void attach(int var, int root, double scale, double offset);

  std::vector<std::optional<Aggregation>> af_;
  std::vector<std::vector<int>> dependents_;
  std::vector<long long> af_order_;
  long long af_counter_ = 0;
  std::size_t num_aggregations_ = 0;

  std::vector<BoundMap> singles_;                 // indexed by slot
  std::map<std::pair<std::size_t, std::size_t>, BoundMap> pairs_;
  std::vector<std::vector<std::size_t>> pair_partners_;  // slot -> slots
};

}  // namespace tcprobe

#endif  // TCPROBE_STRUCTURES_HPP_
