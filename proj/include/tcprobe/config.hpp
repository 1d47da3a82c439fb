#ifndef TCPROBE_CONFIG_HPP_
#define TCPROBE_CONFIG_HPP_

#include <cstdint>
#include <string>

namespace tcprobe {

enum class ConflictPenalty : std::uint8_t {
  kIntersection,  // pair shares a clique
  kUnion,         // either variable is in some clique
};

enum class Status : std::uint8_t { kOk, kInfeasible };

struct Config {
  int threads = 1;
  long long size_limit = 1000;
  long long work_limit = 200'000'000;
  long long cand_number = 5'000'000;
  long long max_probe_number = 1000;
  double eff_threshold = 1000.0;
  double time_limit_seconds = 30.0;
  int max_propagation_rounds = 10;
  double tol = 1e-6;
  ConflictPenalty conflict_penalty = ConflictPenalty::kIntersection;

  /// Throws std::invalid_argument when a limit is not positive.
  void validate() const;
};

}  // namespace tcprobe

#endif  // TCPROBE_CONFIG_HPP_
