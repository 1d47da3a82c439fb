#ifndef TCPROBE_METRICS_HPP_
#define TCPROBE_METRICS_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace tcprobe {

enum class TerminatedBy : std::uint8_t {
  kPairLimit,
  kTimeLimit,
  kEffort,
  kExhausted,
};

std::string_view to_string(TerminatedBy t);

struct MetricsReport {
  std::string status = "ok";  // ok | infeasible
  std::string note;           // e.g. "no pairs"
  double pre_time_seconds = 0.0;
  long long candidates = 0;
  long long pairs_probed = 0;
  long long fixings = 0;
  long long aggregations = 0;
  long long new_conflicts = 0;
  long long bound_changes = 0;
  long long implications = 0;
  int threads = 1;
  bool cm_truncated = false;
  TerminatedBy terminated_by = TerminatedBy::kExhausted;
};

}  // namespace tcprobe

#endif  // TCPROBE_METRICS_HPP_
