#include "tcprobe/propagation.hpp"

#include <algorithm>
#include <cmath>

namespace tcprobe {

LocalDomains::LocalDomains(std::span<const double> lower,
                           std::span<const double> upper,
                           std::vector<bool> is_integer, double tol)
    : base_lower_(lower.begin(), lower.end()),
      base_upper_(upper.begin(), upper.end()),
      lower_(lower.begin(), lower.end()),
      upper_(upper.begin(), upper.end()),
      is_integer_(std::move(is_integer)),
      touched_(lower.size(), 0),
      pending_flag_(lower.size(), 0),
      tol_(tol) {}

void LocalDomains::touch(int j) {
  if (!touched_[j]) {
    touched_[j] = 1;
    changed_.push_back(j);
  }
  if (!pending_flag_[j]) {
    pending_flag_[j] = 1;
    pending_.push_back(j);
  }
}

bool LocalDomains::tighten_lower(int j, double value) {
  if (is_integer_[j]) value = std::ceil(value - tol_);
  const double lb = lower_[j];
  if (is_integer_[j] ? value <= lb : value <= lb + tol_) return false;
  const double ub = upper_[j];
  if (value > ub + tol_) {
    infeasible_ = true;
    return false;
  }
  lower_[j] = std::min(value, ub);
  touch(j);
  return true;
}

bool LocalDomains::tighten_upper(int j, double value) {
  if (is_integer_[j]) value = std::floor(value + tol_);
  const double ub = upper_[j];
  if (is_integer_[j] ? value >= ub : value >= ub - tol_) return false;
  const double lb = lower_[j];
  if (value < lb - tol_) {
    infeasible_ = true;
    return false;
  }
  upper_[j] = std::max(value, lb);
  touch(j);
  return true;
}

std::vector<int> LocalDomains::take_pending() {
  std::vector<int> out;
  out.swap(pending_);
  for (int j : out) pending_flag_[j] = 0;
  return out;
}

std::vector<BoundChange> LocalDomains::changes() const {
  std::vector<BoundChange> out;
  out.reserve(changed_.size());
  for (int j : changed_) out.push_back({j, lower_[j], upper_[j]});
  std::sort(out.begin(), out.end(),
            [](const BoundChange& a, const BoundChange& b) {
              return a.var < b.var;
            });
  return out;
}

void LocalDomains::reset() {
  for (int j : changed_) {
    lower_[j] = base_lower_[j];
    upper_[j] = base_upper_[j];
    touched_[j] = 0;
  }
  for (int j : pending_) pending_flag_[j] = 0;
  changed_.clear();
  pending_.clear();
  infeasible_ = false;
}

void LocalDomains::set_base(int j, double lower, double upper) {
  base_lower_[j] = lower_[j] = lower;
  base_upper_[j] = upper_[j] = upper;
}

int propagate_row(const MipInstance& instance, const LeRow& row,
                  LocalDomains& domains) {
  const SparseVector vec = instance.row(row.row);
  const double sign = row.sign;
  double min_activity = 0.0;
  int num_inf = 0;
  int inf_var = -1;
  for (std::size_t k = 0; k < vec.size(); ++k) {
    const int j = vec.indices[k];
    const double a = sign * vec.values[k];
    const double bound = a > 0 ? domains.lower(j) : domains.upper(j);
    if (std::isinf(bound)) {
      ++num_inf;
      inf_var = j;
    } else {
      min_activity += a * bound;
    }
  }
  if (num_inf == 0 && min_activity > row.rhs + domains.tol()) {
    domains.mark_infeasible();
    return 0;
  }
  if (num_inf > 1) return 0;

  int moved = 0;
  for (std::size_t k = 0; k < vec.size() && !domains.infeasible(); ++k) {
    const int j = vec.indices[k];
    const double a = sign * vec.values[k];
    double residual;
    if (num_inf == 1) {
      if (j != inf_var) continue;
      residual = min_activity;
    } else {
      const double bound = a > 0 ? domains.lower(j) : domains.upper(j);
      residual = min_activity - a * bound;
    }
    const double implied = (row.rhs - residual) / a;
    if (a > 0) {
      if (domains.tighten_upper(j, implied)) ++moved;
    } else {
      if (domains.tighten_lower(j, implied)) ++moved;
    }
  }
  return moved;
}

namespace {

// The value of var when it is fixed to 0 or 1, or -1 otherwise.
int binary_value(const LocalDomains& d, int var) {
  if (!d.is_fixed(var)) return -1;
  const double v = d.lower(var);
  if (std::abs(v) <= d.tol()) return 0;
  if (std::abs(v - 1.0) <= d.tol()) return 1;
  return -1;
}

}  // namespace

int propagate_cliques(Literal literal, const CliqueTable& cliques,
                      LocalDomains& domains) {
  int moved = 0;
  for (const auto& m : cliques.memberships(literal.var)) {
    if (m.polarity != literal.polarity) continue;
    for (const Literal& other : cliques.clique(m.clique).literals) {
      if (other.var == literal.var) continue;
      const double false_value = 1.0 - other.true_value();
      if (domains.fix(other.var, false_value)) ++moved;
      if (domains.infeasible()) return moved;
    }
  }
  return moved;
}

int propagate_implications(int var, const ImplicationStore& implications,
                           LocalDomains& domains) {
  int moved = 0;
  const double value = domains.lower(var);

  if (const auto& agg = implications.aggregation(var)) {
    // x_var = s x_root + o
    if (domains.fix(agg->partner, (value - agg->offset) / agg->scale)) ++moved;
  }
  for (int k : implications.dependents(var)) {
    const Aggregation& agg = *implications.aggregation(k);
    if (domains.fix(k, agg.scale * value + agg.offset)) ++moved;
    if (domains.infeasible()) return moved;
  }

  const int bin = binary_value(domains, var);
  if (bin < 0 || domains.infeasible()) return moved;
  const Literal premise = Literal::of(var, bin);
  auto apply = [&](const Implication& imp) {
    if (domains.infeasible()) return;
    bool m = imp.kind == BoundKind::kLower
                 ? domains.tighten_lower(imp.target, imp.bound)
                 : domains.tighten_upper(imp.target, imp.bound);
    if (m) ++moved;
  };
  implications.for_each_single(premise, apply);
  implications.for_each_pair_with(
      premise, [&](Literal other, const Implication& imp) {
        if (binary_value(domains, other.var) == other.true_value()) apply(imp);
      });
  return moved;
}

Propagator::Propagator(const MipInstance& instance, int max_rounds,
                       bool use_rows)
    : instance_(&instance),
      max_rounds_(max_rounds),
      use_rows_(use_rows),
      row_dirty_(instance.num_rows(), 0),
      fix_seen_(instance.num_cols(), 0) {}

void Propagator::absorb_pending(LocalDomains& domains) {
  for (int j : domains.take_pending()) {
    if (use_rows_) {
      for (int i : instance_->col(j).indices) {
        if (!row_dirty_[i]) {
          row_dirty_[i] = 1;
          dirty_rows_.push_back(i);
        }
      }
    }
    if (!fix_seen_[j] && domains.is_fixed(j)) {
      fix_seen_[j] = 1;
      fix_seen_list_.push_back(j);
      fix_queue_.push_back(j);
    }
  }
}

void Propagator::run(LocalDomains& domains, const CliqueTable& cliques,
                     const ImplicationStore& implications) {
  rounds_used_ = 0;
  for (;;) {
    absorb_pending(domains);
    // Structure closure, first in first out.
    for (std::size_t q = 0; q < fix_queue_.size() && !domains.infeasible();
         ++q) {
      const int var = fix_queue_[q];
      const int bin = binary_value(domains, var);
      if (bin >= 0) {
        propagate_cliques(Literal::of(var, bin), cliques, domains);
        if (domains.infeasible()) break;
      }
      propagate_implications(var, implications, domains);
      absorb_pending(domains);
    }
    fix_queue_.clear();
    if (domains.infeasible() || dirty_rows_.empty() ||
        rounds_used_ >= max_rounds_)
      break;

    ++rounds_used_;
    std::vector<int> rows;
    rows.swap(dirty_rows_);
    std::sort(rows.begin(), rows.end());
    for (int i : rows) row_dirty_[i] = 0;
    for (int i : rows) {
      const double hi = instance_->row_upper(i);
      const double lo = instance_->row_lower(i);
      if (hi < kInf) propagate_row(*instance_, {i, 1.0, hi}, domains);
      if (domains.infeasible()) break;
      if (lo > -kInf) propagate_row(*instance_, {i, -1.0, -lo}, domains);
      if (domains.infeasible()) break;
    }
    if (domains.infeasible()) break;
  }

  for (int i : dirty_rows_) row_dirty_[i] = 0;
  dirty_rows_.clear();
  for (int j : fix_seen_list_) fix_seen_[j] = 0;
  fix_seen_list_.clear();
  fix_queue_.clear();
  domains.take_pending();
}

void propagate_to_fixpoint(LocalDomains& domains, const CliqueTable& cliques,
                           const ImplicationStore& implications,
                           const MipInstance& instance, int max_rounds) {
  Propagator(instance, max_rounds).run(domains, cliques, implications);
}

}  // namespace tcprobe
