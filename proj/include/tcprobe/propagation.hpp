#ifndef TCPROBE_PROPAGATION_HPP_
#define TCPROBE_PROPAGATION_HPP_

#include <span>
#include <vector>

#include "tcprobe/model.hpp"
#include "tcprobe/structures.hpp"

namespace tcprobe {

struct BoundChange {
  int var;
  double lower;
  double upper;

  friend bool operator==(const BoundChange&, const BoundChange&) = default;
};

/// Working bounds layered over a base. Every tightening is recorded so that
/// reset() restores the base in time proportional to the number of changes.
class LocalDomains {
 public:
  LocalDomains() = default;
  LocalDomains(std::span<const double> lower, std::span<const double> upper,
               std::vector<bool> is_integer, double tol);

  int size() const { return static_cast<int>(lower_.size()); }
  double lower(int j) const { return lower_[j]; }
  double upper(int j) const { return upper_[j]; }
  double base_lower(int j) const { return base_lower_[j]; }
  double base_upper(int j) const { return base_upper_[j]; }
  bool is_integer(int j) const { return is_integer_[j]; }
  bool is_fixed(int j) const { return upper_[j] - lower_[j] <= tol_; }
  double tol() const { return tol_; }

  bool infeasible() const { return infeasible_; }
  void mark_infeasible() { infeasible_ = true; }

  /// Integer values are rounded inward with the tolerance. A bound crossing
  /// the opposite bound by more than tol sets the infeasible flag. Returns
  /// true when the bound moved.
  bool tighten_lower(int j, double value);
  bool tighten_upper(int j, double value);
  bool fix(int j, double value) {
    bool a = tighten_lower(j, value);
    bool b = tighten_upper(j, value);
    return a || b;
  }

  /// Variables changed since the last reset, in first-change order.
  std::span<const int> changed() const { return changed_; }
  /// Changes since the last call to take_pending(); used by the propagator.
  std::vector<int> take_pending();

  /// Changed variables with their current bounds, sorted by variable.
  std::vector<BoundChange> changes() const;

  void reset();
  /// Moves the base; only valid right after reset().
  void set_base(int j, double lower, double upper);

 private:
  void touch(int j);

  std::vector<double> base_lower_, base_upper_;
  std::vector<double> lower_, upper_;
  std::vector<bool> is_integer_;
  std::vector<char> touched_;
  std::vector<char> pending_flag_;
  std::vector<int> changed_;
  std::vector<int> pending_;
  double tol_ = 1e-6;
  bool infeasible_ = false;
};

/// Minimal activity based tightening of one LE form. Returns the number of
/// bounds that moved.
int propagate_row(const MipInstance& instance, const LeRow& row,
                  LocalDomains& domains);

/// Fixes every other literal of every clique containing `literal` to false.
/// The literal must already be true in `domains`.
int propagate_cliques(Literal literal, const CliqueTable& cliques,
                      LocalDomains& domains);

/// Aggregation partners and implication targets of a fixed variable.
int propagate_implications(int var, const ImplicationStore& implications,
                           LocalDomains& domains);

/// Alternates structure propagation (cliques, aggregations, implications)
/// with sweeps over the rows touched by changed variables, until nothing
/// changes, max_rounds sweeps are done, or the domains become infeasible.
/// Seeds are whatever is pending in `domains`. With use_rows false only the
/// structures are propagated.
class Propagator {
 public:
  Propagator(const MipInstance& instance, int max_rounds, bool use_rows = true);

  void run(LocalDomains& domains, const CliqueTable& cliques,
           const ImplicationStore& implications);

  int rounds_used() const { return rounds_used_; }

 private:
  void absorb_pending(LocalDomains& domains);

  const MipInstance* instance_;
  int max_rounds_;
  bool use_rows_;
  int rounds_used_ = 0;
  std::vector<char> row_dirty_;
  std::vector<int> dirty_rows_;
  std::vector<char> fix_seen_;
  std::vector<int> fix_seen_list_;
  std::vector<int> fix_queue_;
};

/// Convenience wrapper: run a Propagator once.
void propagate_to_fixpoint(LocalDomains& domains, const CliqueTable& cliques,
                           const ImplicationStore& implications,
                           const MipInstance& instance, int max_rounds);

}  // namespace tcprobe

#endif  // TCPROBE_PROPAGATION_HPP_
