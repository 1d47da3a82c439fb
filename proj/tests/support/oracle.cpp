#include "oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tcprobe::oracle {

FeasibleSet enumerate_feasible(const MipInstance& instance, double tol,
                               long long max_points) {
  const int n = instance.num_cols();
  const int m = instance.num_rows();
  std::vector<int> lo(n), hi(n);
  double space = 1.0;
  for (int j = 0; j < n; ++j) {
    if (!instance.is_integer(j))
      throw std::invalid_argument("continuous column " + instance.col_name(j));
    if (!std::isfinite(instance.lower(j)) || !std::isfinite(instance.upper(j)))
      throw std::invalid_argument("unbounded column " + instance.col_name(j));
    lo[j] = static_cast<int>(std::ceil(instance.lower(j) - tol));
    hi[j] = static_cast<int>(std::floor(instance.upper(j) + tol));
    space *= std::max(0, hi[j] - lo[j] + 1);
  }
  if (space > static_cast<double>(max_points))
    throw std::invalid_argument("search space too large");

  FeasibleSet out;
  out.num_cols = n;
  for (int j = 0; j < n; ++j)
    if (hi[j] < lo[j]) return out;

  std::vector<int> x(lo);
  std::vector<double> activity(m, 0.0);
  for (int j = 0; j < n; ++j) {
    const SparseVector col = instance.col(j);
    for (std::size_t k = 0; k < col.size(); ++k)
      activity[col.indices[k]] += col.values[k] * x[j];
  }
  auto shift = [&](int j, int delta) {
    const SparseVector col = instance.col(j);
    for (std::size_t k = 0; k < col.size(); ++k)
      activity[col.indices[k]] += col.values[k] * delta;
    x[j] += delta;
  };

  // Odometer over the box, last column fastest.
  for (;;) {
    ++out.points_checked;
    bool ok = true;
    for (int i = 0; i < m && ok; ++i)
      ok = activity[i] >= instance.row_lower(i) - tol &&
           activity[i] <= instance.row_upper(i) + tol;
    if (ok) out.points.push_back(x);

    int j = n - 1;
    while (j >= 0 && x[j] == hi[j]) {
      shift(j, lo[j] - x[j]);
      --j;
    }
    if (j < 0) break;
    shift(j, 1);
  }
  return out;
}

namespace {

bool holds(const Literal& l, const std::vector<int>& x) {
  return x[l.var] == l.true_value();
}

bool satisfies(const Implication& imp, const std::vector<int>& x, double tol) {
  return imp.kind == BoundKind::kLower ? x[imp.target] >= imp.bound - tol
                                       : x[imp.target] <= imp.bound + tol;
}

std::string show(const Implication& imp) {
  std::ostringstream s;
  s << "x" << imp.target << (imp.kind == BoundKind::kLower ? " >= " : " <= ")
    << imp.bound;
  return s.str();
}

std::string show(const Literal& l) {
  return "x" + std::to_string(l.var) + "=" + std::to_string(l.true_value());
}

}  // namespace

std::vector<Violation> validate_reductions(const FeasibleSet& feasible,
                                           const Reductions& r, double tol) {
  std::vector<Violation> out;
  auto report = [&](std::string what, const std::vector<int>& x) {
    out.push_back({std::move(what), x});
  };
  for (const auto& x : feasible.points) {
    for (const auto& [j, value] : r.fixings)
      if (std::abs(x[j] - value) > tol)
        report("fixing x" + std::to_string(j) + "=" + std::to_string(value), x);
    for (const Aggregation& a : r.aggregations)
      if (std::abs(x[a.var] - (a.scale * x[a.partner] + a.offset)) > tol)
        report("aggregation x" + std::to_string(a.var) + " = " +
                   std::to_string(a.scale) + " x" + std::to_string(a.partner) +
                   " + " + std::to_string(a.offset),
               x);
    for (const ConflictCut& c : r.new_conflicts)
      if (c.coef_i() * x[c.i] + c.coef_j() * x[c.j] > c.rhs() + tol)
        report("conflict " + show(c.first()) + " & " + show(c.second()), x);
    for (const BoundChange& b : r.bounds)
      if (x[b.var] < b.lower - tol || x[b.var] > b.upper + tol)
        report("bounds of x" + std::to_string(b.var), x);
    for (const auto& [premise, imp] : r.single_implications)
      if (holds(premise, x) && !satisfies(imp, x, tol))
        report("implication " + show(premise) + " -> " + show(imp), x);
    for (const auto& [premises, imp] : r.pair_implications)
      if (holds(premises.first, x) && holds(premises.second, x) &&
          !satisfies(imp, x, tol))
        report("pair implication " + show(premises.first) + ", " +
                   show(premises.second) + " -> " + show(imp),
               x);
  }
  return out;
}

std::string describe(const Violation& v) {
  std::ostringstream s;
  s << v.what << " violated at (";
  for (std::size_t j = 0; j < v.point.size(); ++j)
    s << (j ? "," : "") << v.point[j];
  s << ")";
  return s.str();
}

}  // namespace tcprobe::oracle
