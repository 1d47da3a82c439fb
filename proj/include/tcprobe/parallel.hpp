#ifndef TCPROBE_PARALLEL_HPP_
#define TCPROBE_PARALLEL_HPP_

#include <span>
#include <string>
#include <vector>

#include "tcprobe/config.hpp"
#include "tcprobe/prepresolve.hpp"
#include "tcprobe/probing.hpp"
#include "tcprobe/structures.hpp"

namespace tcprobe {

struct Partition {
  std::vector<std::vector<int>> threads;  // each ascending
  std::vector<int> assignment;            // thread per column, -1 if none
};

/// Cliques are visited largest first (stable for equal sizes). The
/// unassigned variables of a clique go to the current thread, which then
/// advances; a clique with nothing left to place does not advance it.
/// Remaining binaries go one by one to the smallest thread.
Partition partition_variables(std::span<const int> binaries,
                              const std::vector<std::vector<int>>& cliques,
                              int k, int num_cols);

/// Variable lists of the clique rows, in row order.
std::vector<std::vector<int>> clique_variables(const PresolveOutput& presolved);

/// min(max_probe_number, ceil(max_probe_number / ln(k + 1)))
long long per_thread_cap(long long max_probe_number, int k);

struct LocalResult {
  Status status = Status::kOk;
  std::string reason;
  std::vector<double> lower, upper;
  ImplicationStore implications;
  std::vector<ConflictCut> new_conflicts;
  std::vector<int> probed;
  long long pairs_done = 0;
  TerminatedBy terminated_by = TerminatedBy::kExhausted;
};

/// Probes the pairs of `scored` whose endpoints both belong to thread t.
LocalResult run_local_probing(int t, const Partition& partition,
                              std::span<const CandidatePair> scored,
                              const PresolveOutput& presolved,
                              const CmCt& structures, const Config& config,
                              Clock::time_point deadline);

/// Bound and structure merge in thread order. The result has the merged
/// bounds, implications, conflicts (without duplicates of `cliques`) and
/// probed set.
ProbingResult merge_locals(std::vector<LocalResult> locals,
                           const MipInstance& instance,
                           const CliqueTable& cliques, double tol);

/// Re-propagates cliques, aggregations and implications (no rows) for both
/// values of every probed variable and combines the two branches. Works on
/// result in place; `cliques` must already contain the new conflicts.
void implication_analysis(ProbingResult& result, const CliqueTable& cliques,
                          const MipInstance& instance, const Config& config);

/// Clique table extended by a list of conflicts.
CliqueTable with_conflicts(CliqueTable cliques,
                           std::span<const ConflictCut> conflicts);

ProbingResult run_parallel(const PresolveOutput& presolved,
                           const CmCt& structures, const Config& config);

}  // namespace tcprobe

#endif  // TCPROBE_PARALLEL_HPP_
