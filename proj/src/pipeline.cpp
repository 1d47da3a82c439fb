#include "tcprobe/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "tcprobe/parallel.hpp"
#include "tcprobe/prepresolve.hpp"
#include "tcprobe/structures.hpp"

namespace tcprobe {

void Config::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(fmt::format("{} must be positive", what));
  };
  require(threads >= 1, "threads");
  require(size_limit > 0, "size_limit");
  require(work_limit > 0, "work_limit");
  require(cand_number > 0, "cand_number");
  require(max_probe_number > 0, "max_probe_number");
  require(eff_threshold > 0, "eff_threshold");
  require(time_limit_seconds > 0, "time_limit_seconds");
  require(max_propagation_rounds > 0, "max_propagation_rounds");
  require(tol > 0 && std::isfinite(tol), "tol");
}

std::string_view to_string(TerminatedBy t) {
  switch (t) {
    case TerminatedBy::kPairLimit:
      return "pair_limit";
    case TerminatedBy::kTimeLimit:
      return "time_limit";
    case TerminatedBy::kEffort:
      return "effort";
    case TerminatedBy::kExhausted:
      return "exhausted";
  }
  return "exhausted";
}

PipelineResult run_pipeline(const MipInstance& instance, const Config& config) {
  config.validate();
  PipelineResult out;
  out.metrics.threads = config.threads;

  auto infeasible = [&](std::string reason) {
    out.status = Status::kInfeasible;
    out.reason = std::move(reason);
    out.metrics.status = "infeasible";
    out.reduced = instance;
    return out;
  };

  PresolveOutput presolved = run_simple_presolve(instance, config.tol);
  if (presolved.status != Status::kOk) return infeasible(presolved.reason);

  const auto start = std::chrono::steady_clock::now();
  const CmCt structures =
      build_cm_ct(presolved, config.size_limit, config.work_limit);
  out.metrics.cm_truncated = structures.coupling.truncated;
  if (structures.coupling.empty()) {
    out.no_pairs = true;
    out.metrics.note = "no pairs";
    out.reduced = instance;
    out.metrics.pre_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return out;
  }

  const ProbingResult probing = config.threads == 1
                                    ? run_serial(presolved, structures, config)
                                    : run_parallel(presolved, structures, config);
  out.metrics.pre_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  out.metrics.candidates = probing.candidates;
  out.metrics.pairs_probed = probing.pairs_probed;
  out.metrics.terminated_by = probing.terminated_by;
  if (probing.status != Status::kOk) return infeasible(probing.reason);

  out.reductions = make_reductions(instance, probing, config.tol);
  ApplyResult applied = apply_reductions(instance, out.reductions, config.tol);
  if (applied.status != Status::kOk) return infeasible(applied.reason);
  out.reduced = std::move(applied.instance);

  const Reductions& r = out.reductions;
  out.metrics.fixings = static_cast<long long>(r.fixings.size());
  out.metrics.aggregations = static_cast<long long>(r.aggregations.size());
  out.metrics.new_conflicts = static_cast<long long>(r.new_conflicts.size());
  out.metrics.bound_changes = r.num_bound_changes();
  out.metrics.implications = static_cast<long long>(
      r.single_implications.size() + r.pair_implications.size());
  return out;
}

}  // namespace tcprobe
