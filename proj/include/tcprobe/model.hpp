#ifndef TCPROBE_MODEL_HPP_
#define TCPROBE_MODEL_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcprobe {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : std::uint8_t { kLE, kGE, kEQ };

enum class Polarity : std::uint8_t { kPos, kNeg };

/// A binary variable or its complement. kNeg stands for 1 - x[var].
struct Literal {
  int var = -1;
  Polarity polarity = Polarity::kPos;

  /// The value of x[var] that makes this literal true.
  int true_value() const { return polarity == Polarity::kPos ? 1 : 0; }

  static Literal of(int var, int value) {
    return {var, value == 1 ? Polarity::kPos : Polarity::kNeg};
  }

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Triplet {
  int row;
  int col;
  double value;
};

/// Read-only view of one sparse row or column.
struct SparseVector {
  std::span<const int> indices;
  std::span<const double> values;

  std::size_t size() const { return indices.size(); }
};

/// Constraint matrix kept in both row-major and column-major form.
/// Indices inside every row and column are strictly ascending and no stored
/// value is zero.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// Throws ModelError on out-of-range indices, duplicate entries, or
  /// non-finite values. Exact zeros are dropped.
  SparseMatrix(int num_rows, int num_cols, std::vector<Triplet> entries);

  int num_rows() const { return num_rows_; }
  int num_cols() const { return num_cols_; }
  std::size_t nnz() const { return row_idx_.size(); }

  SparseVector row(int i) const;
  SparseVector col(int j) const;
  int row_nnz(int i) const;
  int col_nnz(int j) const;

  std::vector<Triplet> triplets() const;

 private:
  int num_rows_ = 0;
  int num_cols_ = 0;
  std::vector<std::size_t> row_start_{0};
  std::vector<int> row_idx_;
  std::vector<double> row_val_;
  std::vector<std::size_t> col_start_{0};
  std::vector<int> col_idx_;
  std::vector<double> col_val_;
};

/// Everything a reader or a test fixture needs to describe a problem before
/// the matrix views are built.
struct RawInstance {
  std::string name;
  std::vector<std::string> row_names;
  std::vector<RowSense> senses;
  std::vector<double> rhs;
  /// MPS-style range per row; nullopt for plain rows.
  std::vector<std::optional<double>> ranges;
  std::vector<std::string> col_names;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> is_integer;
  double objective_offset = 0.0;
  std::vector<Triplet> entries;
};

/// One side of a row written as  sign * A[i,:] x <= rhs.
struct LeRow {
  int row = -1;
  double sign = 1.0;
  double rhs = 0.0;
};

/// min c^T x  s.t.  A x (sense) b,  l <= x <= u,  x_j integer for j in I.
class MipInstance {
 public:
  MipInstance() = default;

  int num_rows() const { return matrix_.num_rows(); }
  int num_cols() const { return matrix_.num_cols(); }
  std::size_t nnz() const { return matrix_.nnz(); }

  const SparseMatrix& matrix() const { return matrix_; }
  SparseVector row(int i) const { return matrix_.row(i); }
  SparseVector col(int j) const { return matrix_.col(j); }

  /// Throws std::out_of_range for a bad index.
  int row_nnz(int i) const;
  int col_nnz(int j) const;

  const std::string& name() const { return name_; }
  RowSense sense(int i) const { return senses_[i]; }
  double rhs(int i) const { return rhs_[i]; }
  const std::optional<double>& range(int i) const { return ranges_[i]; }
  const std::string& row_name(int i) const { return row_names_[i]; }
  const std::string& col_name(int j) const { return col_names_[j]; }
  double objective(int j) const { return objective_[j]; }
  double objective_offset() const { return objective_offset_; }

  /// Feasible interval [row_lower, row_upper] of A[i,:] x, combining sense,
  /// rhs and range. One side may be infinite.
  double row_lower(int i) const;
  double row_upper(int i) const;

  double lower(int j) const { return lower_[j]; }
  double upper(int j) const { return upper_[j]; }
  std::span<const double> lower() const { return lower_; }
  std::span<const double> upper() const { return upper_; }
  bool is_integer(int j) const { return is_integer_[j]; }

  /// j in I with 0 <= l_j and u_j <= 1.
  bool is_binary(int j) const;
  std::vector<int> binaries() const;

  void set_bounds(int j, double lower, double upper);

  RawInstance to_raw() const;

 private:
  friend MipInstance build_instance(RawInstance raw);

  std::string name_;
  SparseMatrix matrix_;
  std::vector<RowSense> senses_;
  std::vector<double> rhs_;
  std::vector<std::optional<double>> ranges_;
  std::vector<std::string> row_names_;
  std::vector<std::string> col_names_;
  std::vector<double> objective_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<bool> is_integer_;
  double objective_offset_ = 0.0;
};

/// Validates dimensions and values and builds both matrix views. Missing
/// names are generated as R<i> / C<j>. Throws ModelError naming the location.
MipInstance build_instance(RawInstance raw);

/// LE forms of row i: GE rows are negated, EQ and ranged rows split in two.
std::vector<LeRow> normalize_row(const MipInstance& instance, int i);

/// Rebuilds the instance keeping only rows with keep[i] set.
MipInstance remove_rows(const MipInstance& instance,
                        const std::vector<bool>& keep);

}  // namespace tcprobe

#endif  // TCPROBE_MODEL_HPP_
