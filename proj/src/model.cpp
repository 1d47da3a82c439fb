#include "tcprobe/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tcprobe {

namespace {

std::string location(int row, int col) {
  return "(row " + std::to_string(row) + ", col " + std::to_string(col) + ")";
}

}  // namespace

SparseMatrix::SparseMatrix(int num_rows, int num_cols,
                           std::vector<Triplet> entries)
    : num_rows_(num_rows), num_cols_(num_cols) {
  if (num_rows < 0 || num_cols < 0)
    throw ModelError("negative matrix dimension");

  std::erase_if(entries, [](const Triplet& t) { return t.value == 0.0; });
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= num_rows || t.col < 0 || t.col >= num_cols)
      throw ModelError("matrix entry out of range " + location(t.row, t.col));
    if (!std::isfinite(t.value))
      throw ModelError("non-finite coefficient at " + location(t.row, t.col));
  }

  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    if (entries[k].row == entries[k - 1].row &&
        entries[k].col == entries[k - 1].col)
      throw ModelError("duplicate matrix entry at " +
                       location(entries[k].row, entries[k].col));
  }

  const std::size_t nnz = entries.size();
  row_start_.assign(static_cast<std::size_t>(num_rows) + 1, 0);
  col_start_.assign(static_cast<std::size_t>(num_cols) + 1, 0);
  row_idx_.resize(nnz);
  row_val_.resize(nnz);
  col_idx_.resize(nnz);
  col_val_.resize(nnz);

  for (const Triplet& t : entries) {
    ++row_start_[t.row + 1];
    ++col_start_[t.col + 1];
  }
  std::partial_sum(row_start_.begin(), row_start_.end(), row_start_.begin());
  std::partial_sum(col_start_.begin(), col_start_.end(), col_start_.begin());

  std::vector<std::size_t> col_fill(col_start_.begin(), col_start_.end() - 1);
  for (std::size_t k = 0; k < nnz; ++k) {
    const Triplet& t = entries[k];
    row_idx_[k] = t.col;
    row_val_[k] = t.value;
    // Row-major traversal visits rows in ascending order, so every column
    // list is filled in ascending row order.
    std::size_t pos = col_fill[t.col]++;
    col_idx_[pos] = t.row;
    col_val_[pos] = t.value;
  }
}

SparseVector SparseMatrix::row(int i) const {
  std::size_t b = row_start_[i], e = row_start_[i + 1];
  return {std::span<const int>(row_idx_).subspan(b, e - b),
          std::span<const double>(row_val_).subspan(b, e - b)};
}

SparseVector SparseMatrix::col(int j) const {
  std::size_t b = col_start_[j], e = col_start_[j + 1];
  return {std::span<const int>(col_idx_).subspan(b, e - b),
          std::span<const double>(col_val_).subspan(b, e - b)};
}

int SparseMatrix::row_nnz(int i) const {
  return static_cast<int>(row_start_[i + 1] - row_start_[i]);
}

int SparseMatrix::col_nnz(int j) const {
  return static_cast<int>(col_start_[j + 1] - col_start_[j]);
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (int i = 0; i < num_rows_; ++i) {
    SparseVector r = row(i);
    for (std::size_t k = 0; k < r.size(); ++k)
      out.push_back({i, r.indices[k], r.values[k]});
  }
  return out;
}

int MipInstance::row_nnz(int i) const {
  if (i < 0 || i >= num_rows())
    throw std::out_of_range("row index " + std::to_string(i));
  return matrix_.row_nnz(i);
}

int MipInstance::col_nnz(int j) const {
  if (j < 0 || j >= num_cols())
    throw std::out_of_range("column index " + std::to_string(j));
  return matrix_.col_nnz(j);
}

double MipInstance::row_lower(int i) const {
  const double b = rhs_[i];
  const auto& r = ranges_[i];
  switch (senses_[i]) {
    case RowSense::kLE:
      return r ? b - std::abs(*r) : -kInf;
    case RowSense::kGE:
      return b;
    case RowSense::kEQ:
      return (r && *r < 0) ? b + *r : b;
  }
  return b;
}

double MipInstance::row_upper(int i) const {
  const double b = rhs_[i];
  const auto& r = ranges_[i];
  switch (senses_[i]) {
    case RowSense::kLE:
      return b;
    case RowSense::kGE:
      return r ? b + std::abs(*r) : kInf;
    case RowSense::kEQ:
      return (r && *r > 0) ? b + *r : b;
  }
  return b;
}

bool MipInstance::is_binary(int j) const {
  return is_integer_[j] && lower_[j] >= 0.0 && upper_[j] <= 1.0;
}

std::vector<int> MipInstance::binaries() const {
  std::vector<int> out;
  for (int j = 0; j < num_cols(); ++j)
    if (is_binary(j)) out.push_back(j);
  return out;
}

void MipInstance::set_bounds(int j, double lower, double upper) {
  lower_[j] = lower;
  upper_[j] = upper;
}

RawInstance MipInstance::to_raw() const {
  RawInstance raw;
  raw.name = name_;
  raw.row_names = row_names_;
  raw.senses = senses_;
  raw.rhs = rhs_;
  raw.ranges = ranges_;
  raw.col_names = col_names_;
  raw.objective = objective_;
  raw.lower = lower_;
  raw.upper = upper_;
  raw.is_integer = is_integer_;
  raw.objective_offset = objective_offset_;
  raw.entries = matrix_.triplets();
  return raw;
}

MipInstance build_instance(RawInstance raw) {
  const std::size_t m = raw.senses.size();
  const std::size_t n = raw.lower.size();

  if (raw.rhs.size() != m) throw ModelError("rhs size does not match rows");
  if (raw.ranges.empty()) raw.ranges.resize(m);
  if (raw.ranges.size() != m)
    throw ModelError("ranges size does not match rows");
  if (raw.upper.size() != n || raw.is_integer.size() != n)
    throw ModelError("column bound/integrality sizes differ");
  if (raw.objective.empty()) raw.objective.assign(n, 0.0);
  if (raw.objective.size() != n)
    throw ModelError("objective size does not match columns");
  if (raw.row_names.empty())
    for (std::size_t i = 0; i < m; ++i)
      raw.row_names.push_back("R" + std::to_string(i));
  if (raw.col_names.empty())
    for (std::size_t j = 0; j < n; ++j)
      raw.col_names.push_back("C" + std::to_string(j));
  if (raw.row_names.size() != m || raw.col_names.size() != n)
    throw ModelError("name list sizes do not match dimensions");

  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(raw.rhs[i]))
      throw ModelError("non-finite rhs in row " + std::to_string(i));
    if (raw.ranges[i] && !std::isfinite(*raw.ranges[i]))
      throw ModelError("non-finite range in row " + std::to_string(i));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(raw.lower[j]) || std::isnan(raw.upper[j]) ||
        raw.lower[j] == kInf || raw.upper[j] == -kInf)
      throw ModelError("invalid bound on column " + std::to_string(j));
    if (!std::isfinite(raw.objective[j]))
      throw ModelError("non-finite objective on column " + std::to_string(j));
  }

  MipInstance inst;
  inst.matrix_ = SparseMatrix(static_cast<int>(m), static_cast<int>(n),
                              std::move(raw.entries));
  inst.name_ = std::move(raw.name);
  inst.senses_ = std::move(raw.senses);
  inst.rhs_ = std::move(raw.rhs);
  inst.ranges_ = std::move(raw.ranges);
  inst.row_names_ = std::move(raw.row_names);
  inst.col_names_ = std::move(raw.col_names);
  inst.objective_ = std::move(raw.objective);
  inst.lower_ = std::move(raw.lower);
  inst.upper_ = std::move(raw.upper);
  inst.is_integer_ = std::move(raw.is_integer);
  inst.objective_offset_ = raw.objective_offset;
  return inst;
}

std::vector<LeRow> normalize_row(const MipInstance& instance, int i) {
  std::vector<LeRow> out;
  const double hi = instance.row_upper(i);
  const double lo = instance.row_lower(i);
  if (hi < kInf) out.push_back({i, 1.0, hi});
  if (lo > -kInf) out.push_back({i, -1.0, -lo});
  return out;
}

MipInstance remove_rows(const MipInstance& instance,
                        const std::vector<bool>& keep) {
  RawInstance raw = instance.to_raw();
  std::vector<int> new_index(instance.num_rows(), -1);
  RawInstance out;
  out.name = raw.name;
  out.col_names = std::move(raw.col_names);
  out.objective = std::move(raw.objective);
  out.lower = std::move(raw.lower);
  out.upper = std::move(raw.upper);
  out.is_integer = std::move(raw.is_integer);
  out.objective_offset = raw.objective_offset;
  for (int i = 0; i < instance.num_rows(); ++i) {
    if (!keep[i]) continue;
    new_index[i] = static_cast<int>(out.senses.size());
    out.row_names.push_back(raw.row_names[i]);
    out.senses.push_back(raw.senses[i]);
    out.rhs.push_back(raw.rhs[i]);
    out.ranges.push_back(raw.ranges[i]);
  }
  for (const Triplet& t : raw.entries)
    if (new_index[t.row] >= 0)
      out.entries.push_back({new_index[t.row], t.col, t.value});
  return build_instance(std::move(out));
}

}  // namespace tcprobe
