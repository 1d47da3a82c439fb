#ifndef TCPROBE_PIPELINE_HPP_
#define TCPROBE_PIPELINE_HPP_

#include <string>

#include "tcprobe/config.hpp"
#include "tcprobe/metrics.hpp"
#include "tcprobe/model.hpp"
#include "tcprobe/probing.hpp"

namespace tcprobe {

struct PipelineResult {
  Status status = Status::kOk;
  std::string reason;
  /// No pair of binaries shares a non-clique row; `reduced` is the input.
  bool no_pairs = false;
  MipInstance reduced;
  Reductions reductions;
  MetricsReport metrics;
};

/// Pre-presolve, structures, serial (threads == 1) or parallel probing, and
/// reduction assembly. The reductions refer to the columns of `instance`.
PipelineResult run_pipeline(const MipInstance& instance, const Config& config);

}  // namespace tcprobe

#endif  // TCPROBE_PIPELINE_HPP_
