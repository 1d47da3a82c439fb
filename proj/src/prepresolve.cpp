#include "tcprobe/prepresolve.hpp"

#include <algorithm>
#include <cmath>

#include "tcprobe/propagation.hpp"

namespace tcprobe {

namespace {

std::vector<bool> integrality(const MipInstance& instance) {
  std::vector<bool> out(instance.num_cols());
  for (int j = 0; j < instance.num_cols(); ++j)
    out[j] = instance.is_integer(j);
  return out;
}

LocalDomains domains_of(const MipInstance& instance, double tol) {
  return LocalDomains(instance.lower(), instance.upper(), integrality(instance),
                      tol);
}

void write_back(const LocalDomains& domains, MipInstance& instance) {
  for (int j : domains.changed())
    instance.set_bounds(j, domains.lower(j), domains.upper(j));
}

}  // namespace

PresolveStep clean_rows(MipInstance& instance, double tol) {
  const int m = instance.num_rows();
  std::vector<bool> keep(m, true);
  LocalDomains domains = domains_of(instance, tol);
  bool removed = false;

  for (int i = 0; i < m; ++i) {
    const SparseVector row = instance.row(i);
    const double lo = instance.row_lower(i);
    const double hi = instance.row_upper(i);
    if (row.size() == 0) {
      if (lo > tol || hi < -tol)
        return {Status::kInfeasible,
                "empty row " + instance.row_name(i) + " is violated"};
      keep[i] = false;
      removed = true;
    } else if (row.size() == 1) {
      const int j = row.indices[0];
      const double a = row.values[0];
      double new_lb = a > 0 ? lo / a : hi / a;
      double new_ub = a > 0 ? hi / a : lo / a;
      if (new_lb > -kInf) domains.tighten_lower(j, new_lb);
      if (new_ub < kInf) domains.tighten_upper(j, new_ub);
      if (domains.infeasible())
        return {Status::kInfeasible, "singleton row " + instance.row_name(i) +
                                         " conflicts with the bounds of " +
                                         instance.col_name(j)};
      keep[i] = false;
      removed = true;
    }
  }

  write_back(domains, instance);
  if (removed) instance = remove_rows(instance, keep);
  return {};
}

PresolveStep strengthen_bounds_one_round(MipInstance& instance, double tol) {
  LocalDomains domains = domains_of(instance, tol);
  for (int j = 0; j < instance.num_cols(); ++j) {
    if (!instance.is_integer(j)) continue;
    if (instance.lower(j) > -kInf) domains.tighten_lower(j, instance.lower(j));
    if (instance.upper(j) < kInf) domains.tighten_upper(j, instance.upper(j));
    if (domains.infeasible())
      return {Status::kInfeasible,
              "integer column " + instance.col_name(j) + " has no integer value"};
  }
  for (int i = 0; i < instance.num_rows(); ++i) {
    for (const LeRow& form : normalize_row(instance, i)) {
      propagate_row(instance, form, domains);
      if (domains.infeasible())
        return {Status::kInfeasible,
                "row " + instance.row_name(i) + " cannot be satisfied"};
    }
  }
  write_back(domains, instance);
  return {};
}

std::vector<int> detect_binaries(const MipInstance& instance) {
  std::vector<int> out;
  for (int j = 0; j < instance.num_cols(); ++j)
    if (instance.is_binary(j) && instance.lower(j) < instance.upper(j))
      out.push_back(j);
  return out;
}

std::optional<PbcRow> extract_pbc(const MipInstance& instance, const LeRow& row,
                                  const std::vector<bool>& is_binary) {
  PbcRow pbc;
  pbc.source_row = row.row;
  double rest_infimum = 0.0;
  double negative_sum = 0.0;
  const SparseVector vec = instance.row(row.row);
  for (std::size_t k = 0; k < vec.size(); ++k) {
    const int j = vec.indices[k];
    const double a = row.sign * vec.values[k];
    if (is_binary[j]) {
      if (a > 0) {
        pbc.literals.push_back({Literal{j, Polarity::kPos}, a});
      } else {
        pbc.literals.push_back({Literal{j, Polarity::kNeg}, -a});
        negative_sum += a;
      }
    } else {
      const double bound = a > 0 ? instance.lower(j) : instance.upper(j);
      if (std::isinf(bound)) return std::nullopt;
      rest_infimum += a * bound;
    }
  }
  if (pbc.literals.size() < 2) return std::nullopt;
  pbc.rhs = row.rhs - rest_infimum - negative_sum;
  return pbc;
}

bool classify_clique(const PbcRow& pbc, double tol) {
  if (pbc.literals.size() < 2) return false;
  double smallest = kInf, second = kInf;
  for (const auto& [lit, coef] : pbc.literals) {
    if (lit.polarity != Polarity::kPos) return false;
    if (coef > pbc.rhs + tol) return false;
    if (coef < smallest) {
      second = smallest;
      smallest = coef;
    } else if (coef < second) {
      second = coef;
    }
  }
  return smallest + second > pbc.rhs + tol;
}

PresolveOutput run_simple_presolve(MipInstance instance, double tol) {
  PresolveOutput out;
  PresolveStep step = clean_rows(instance, tol);
  if (step.status == Status::kOk)
    step = strengthen_bounds_one_round(instance, tol);
  if (step.status != Status::kOk) {
    out.status = step.status;
    out.reason = std::move(step.reason);
    out.instance = std::move(instance);
    return out;
  }

  out.binaries = detect_binaries(instance);
  std::vector<bool> is_binary(instance.num_cols(), false);
  for (int j : out.binaries) is_binary[j] = true;

  for (int i = 0; i < instance.num_rows(); ++i) {
    bool clique_side = false;
    for (const LeRow& form : normalize_row(instance, i)) {
      auto pbc = extract_pbc(instance, form, is_binary);
      if (pbc && classify_clique(*pbc, tol)) {
        out.cliques.push_back(std::move(*pbc));
        out.clique_rows.push_back(i);
        clique_side = true;
      }
    }
    if (!clique_side) out.non_clique_rows.push_back(i);
  }
  out.instance = std::move(instance);
  return out;
}

}  // namespace tcprobe
