#include "tcprobe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <fmt/format.h>
#include <omp.h>

namespace tcprobe {

Partition partition_variables(std::span<const int> binaries,
                              const std::vector<std::vector<int>>& cliques,
                              int k, int num_cols) {
  Partition out;
  out.threads.resize(k);
  out.assignment.assign(num_cols, -1);
  std::vector<char> eligible(num_cols, 0);
  for (int j : binaries) eligible[j] = 1;

  std::vector<int> order(cliques.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = static_cast<int>(c);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return cliques[a].size() > cliques[b].size();
  });

  int t = 0;
  for (int c : order) {
    bool placed = false;
    for (int j : cliques[c]) {
      if (!eligible[j] || out.assignment[j] >= 0) continue;
      out.assignment[j] = t;
      out.threads[t].push_back(j);
      placed = true;
    }
    if (placed) t = (t + 1) % k;
  }
  for (int j : binaries) {
    if (out.assignment[j] >= 0) continue;
    int smallest = 0;
    for (int s = 1; s < k; ++s)
      if (out.threads[s].size() < out.threads[smallest].size()) smallest = s;
    out.assignment[j] = smallest;
    out.threads[smallest].push_back(j);
  }
  for (auto& members : out.threads) std::sort(members.begin(), members.end());
  return out;
}

std::vector<std::vector<int>> clique_variables(const PresolveOutput& presolved) {
  std::vector<std::vector<int>> out;
  out.reserve(presolved.cliques.size());
  for (const PbcRow& pbc : presolved.cliques) {
    std::vector<int> vars;
    for (const auto& [lit, coef] : pbc.literals) vars.push_back(lit.var);
    out.push_back(std::move(vars));
  }
  return out;
}

long long per_thread_cap(long long max_probe_number, int k) {
  const double cap =
      std::ceil(static_cast<double>(max_probe_number) / std::log(k + 1.0));
  return std::min(max_probe_number, static_cast<long long>(cap));
}

LocalResult run_local_probing(int t, const Partition& partition,
                              std::span<const CandidatePair> scored,
                              const PresolveOutput& presolved,
                              const CmCt& structures, const Config& config,
                              Clock::time_point deadline) {
  const MipInstance& instance = presolved.instance;
  const int k = static_cast<int>(partition.threads.size());
  const long long cap = per_thread_cap(config.max_probe_number, k);

  std::vector<CandidatePair> mine;
  for (const CandidatePair& p : scored)
    if (partition.assignment[p.i] == t && partition.assignment[p.j] == t)
      mine.push_back(p);
  mine = order_pairs(std::move(mine), cap);

  ProbingWorker worker(instance, instance.lower(), instance.upper(),
                       structures.cliques,
                       ImplicationStore(instance.num_cols()), config);
  worker.run(mine, cap, deadline);

  LocalResult out;
  out.status = worker.status();
  out.reason = worker.reason();
  out.lower.assign(worker.lower().begin(), worker.lower().end());
  out.upper.assign(worker.upper().begin(), worker.upper().end());
  out.implications = worker.implications();
  out.new_conflicts = worker.new_conflicts();
  out.probed = worker.probed();
  out.pairs_done = worker.pairs_done();
  out.terminated_by = worker.terminated_by();
  return out;
}

namespace {

// Intersects the domain of var with [lo, up]; false when it becomes empty.
bool tighten(int var, double lo, double up, std::vector<double>& lower,
             std::vector<double>& upper, const MipInstance& instance,
             double tol) {
  if (instance.is_integer(var)) {
    lo = std::ceil(lo - tol);
    up = std::floor(up + tol);
  }
  lo = std::max(lo, lower[var]);
  up = std::min(up, upper[var]);
  if (lo > up + tol) return false;
  lower[var] = lo;
  upper[var] = std::max(lo, up);
  return true;
}

}  // namespace

CliqueTable with_conflicts(CliqueTable cliques,
                           std::span<const ConflictCut> conflicts) {
  for (const ConflictCut& c : conflicts)
    cliques.add_clique(Clique{{c.first(), c.second()}, -1, 2});
  return cliques;
}

ProbingResult merge_locals(std::vector<LocalResult> locals,
                           const MipInstance& instance,
                           const CliqueTable& cliques, double tol) {
  ProbingResult out;
  const int n = instance.num_cols();
  out.lower.assign(instance.lower().begin(), instance.lower().end());
  out.upper.assign(instance.upper().begin(), instance.upper().end());
  out.implications = ImplicationStore(n);

  auto fail = [&](std::string reason) {
    if (out.status == Status::kOk) {
      out.status = Status::kInfeasible;
      out.reason = std::move(reason);
    }
  };

  for (const LocalResult& local : locals) {
    out.pairs_per_thread.push_back(local.pairs_done);
    out.pairs_probed += local.pairs_done;
    if (local.status != Status::kOk) fail(local.reason);
  }
  if (out.status != Status::kOk) return out;

  for (const LocalResult& local : locals) {
    for (int j = 0; j < n; ++j) {
      out.lower[j] = std::max(out.lower[j], local.lower[j]);
      out.upper[j] = std::min(out.upper[j], local.upper[j]);
    }
  }
  for (int j = 0; j < n; ++j) {
    if (out.lower[j] > out.upper[j] + tol) {
      fail(fmt::format("threads disagree on the domain of {}",
                       instance.col_name(j)));
      return out;
    }
    out.upper[j] = std::max(out.lower[j], out.upper[j]);
  }

  CliqueTable table = cliques;
  std::vector<char> probed(n, 0);
  for (const LocalResult& local : locals) {
    for (const Aggregation& a : local.implications.aggregations()) {
      const AggregationResult r = out.implications.add_aggregation(
          a.var, a.partner, a.scale, a.offset);
      if (r.kind != AggregationResult::Kind::kContradiction) continue;
      if (!r.forced) {
        fail("contradictory aggregations across threads");
        return out;
      }
      const auto [var, value] = *r.forced;
      if (!tighten(var, value, value, out.lower, out.upper, instance, tol)) {
        fail(fmt::format("aggregations across threads force {} outside its "
                         "domain",
                         instance.col_name(var)));
        return out;
      }
    }
    for (const auto& [premise, imp] : local.implications.all_singles())
      out.implications.add_single(premise, imp);
    for (const auto& [premises, imp] : local.implications.all_pairs())
      out.implications.add_pair(premises.first, premises.second, imp);
    for (const ConflictCut& c : local.new_conflicts) {
      if (table.contains_pair(c.first(), c.second())) continue;
      table.add_clique(Clique{{c.first(), c.second()}, -1, 2});
      out.new_conflicts.push_back(c);
    }
    for (int j : local.probed) probed[j] = 1;
  }
  for (int j = 0; j < n; ++j)
    if (probed[j]) out.probed.push_back(j);

  auto any = [&](TerminatedBy t) {
    return std::any_of(locals.begin(), locals.end(),
                       [t](const LocalResult& l) { return l.terminated_by == t; });
  };
  if (any(TerminatedBy::kTimeLimit))
    out.terminated_by = TerminatedBy::kTimeLimit;
  else if (any(TerminatedBy::kPairLimit))
    out.terminated_by = TerminatedBy::kPairLimit;
  else if (any(TerminatedBy::kEffort))
    out.terminated_by = TerminatedBy::kEffort;
  return out;
}

void implication_analysis(ProbingResult& result, const CliqueTable& cliques,
                          const MipInstance& instance, const Config& config) {
  if (result.status != Status::kOk) return;
  const double tol = config.tol;
  std::vector<bool> is_integer(instance.num_cols());
  for (int j = 0; j < instance.num_cols(); ++j)
    is_integer[j] = instance.is_integer(j);
  LocalDomains domains(result.lower, result.upper, std::move(is_integer), tol);
  Propagator propagator(instance, config.max_propagation_rounds,
                        /*use_rows=*/false);

  auto set = [&](int var, double lo, double up) {
    if (!tighten(var, lo, up, result.lower, result.upper, instance, tol)) {
      result.status = Status::kInfeasible;
      result.reason = fmt::format("implication analysis empties the domain of {}",
                                  instance.col_name(var));
      return false;
    }
    domains.set_base(var, result.lower[var], result.upper[var]);
    return true;
  };

  for (int i : result.probed) {
    if (result.upper[i] - result.lower[i] <= tol) continue;
    ProbeOutcome branches;
    branches.i = branches.j = i;
    for (int v = 0; v < 2; ++v) {
      domains.reset();
      domains.fix(i, v);
      if (!domains.infeasible())
        propagator.run(domains, cliques, result.implications);
      branches.feasible[v] = !domains.infeasible();
      if (branches.feasible[v]) branches.changes[v] = domains.changes();
    }
    domains.reset();

    if (!branches.feasible[0] && !branches.feasible[1]) {
      result.status = Status::kInfeasible;
      result.reason = fmt::format("both values of {} are infeasible",
                                  instance.col_name(i));
      return;
    }
    if (!branches.feasible[0] || !branches.feasible[1]) {
      const double value = branches.feasible[0] ? 0.0 : 1.0;
      if (!set(i, value, value)) return;
      continue;
    }

    const std::array<int, 2> both{0, 1};
    const std::vector<BoundChange> combined =
        hull(branches, both, result.lower, result.upper);
    const BranchDeductions d = deduce_from_branches(
        i, branches.changes[0], branches.changes[1], {}, result.lower,
        result.upper, result.implications, tol);
    if (d.infeasible) {
      result.status = Status::kInfeasible;
      result.reason = "contradictory aggregations";
      return;
    }
    for (const BoundChange& c : combined)
      if (!set(c.var, c.lower, c.upper)) return;
    for (const auto& [var, value] : d.forced)
      if (!set(var, value, value)) return;
  }
}

ProbingResult run_parallel(const PresolveOutput& presolved,
                           const CmCt& structures, const Config& config) {
  const MipInstance& instance = presolved.instance;
  const int k = config.threads;
  const Clock::time_point deadline = deadline_after(config.time_limit_seconds);

  std::vector<CandidatePair> scored =
      select_candidates(structures.coupling, config.cand_number);
  const auto num_candidates = static_cast<long long>(scored.size());
  score_candidates(scored, instance, structures.cliques,
                   config.conflict_penalty);
  const Partition partition = partition_variables(
      presolved.binaries, clique_variables(presolved), k, instance.num_cols());

  std::vector<LocalResult> locals(k);
  std::vector<std::exception_ptr> errors(k);
#pragma omp parallel for num_threads(k) schedule(static, 1)
  for (int t = 0; t < k; ++t) {
    try {
      locals[t] = run_local_probing(t, partition, scored, presolved,
                                    structures, config, deadline);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ProbingResult out =
      merge_locals(std::move(locals), instance, structures.cliques, config.tol);
  out.candidates = num_candidates;
  if (out.status != Status::kOk) return out;

  auto settle = [&] {
    if (out.status == Status::kOk &&
        !settle_aggregations(out.implications, out.lower, out.upper, instance,
                             config.tol, &out.reason))
      out.status = Status::kInfeasible;
  };
  settle();
  const CliqueTable table = with_conflicts(structures.cliques, out.new_conflicts);
  implication_analysis(out, table, instance, config);
  settle();
  return out;
}

}  // namespace tcprobe
