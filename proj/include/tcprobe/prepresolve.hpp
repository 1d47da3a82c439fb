#ifndef TCPROBE_PREPRESOLVE_HPP_
#define TCPROBE_PREPRESOLVE_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tcprobe/config.hpp"
#include "tcprobe/model.hpp"

namespace tcprobe {

/// Pure binary relaxation of an LE row: sum of coef * literal <= rhs, every
/// coefficient positive.
struct PbcRow {
  std::vector<std::pair<Literal, double>> literals;
  double rhs = 0.0;
  int source_row = -1;
};

struct PresolveOutput {
  Status status = Status::kOk;
  std::string reason;
  MipInstance instance;
  std::vector<int> binaries;
  /// Clique PBCs and their source rows, aligned index by index.
  std::vector<PbcRow> cliques;
  std::vector<int> clique_rows;
  /// Rows with no clique side.
  std::vector<int> non_clique_rows;
};

struct PresolveStep {
  Status status = Status::kOk;
  std::string reason;
};

/// Drops empty rows and turns singleton rows into bounds.
PresolveStep clean_rows(MipInstance& instance, double tol);

/// One sweep of activity-based bound tightening over every row.
PresolveStep strengthen_bounds_one_round(MipInstance& instance, double tol);

/// Unfixed integer columns with bounds inside [0, 1].
std::vector<int> detect_binaries(const MipInstance& instance);

/// Nullopt when the non-binary part is unbounded below or fewer than two
/// binaries appear. `is_binary` is indexed by column.
std::optional<PbcRow> extract_pbc(const MipInstance& instance, const LeRow& row,
                                  const std::vector<bool>& is_binary);

/// Every pair of positive literals conflicts: the two smallest coefficients
/// exceed the rhs while each coefficient alone fits.
bool classify_clique(const PbcRow& pbc, double tol);

PresolveOutput run_simple_presolve(MipInstance instance, double tol);

}  // namespace tcprobe

#endif  // TCPROBE_PREPRESOLVE_HPP_
