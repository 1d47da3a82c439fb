#include "tcprobe/mps_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <fmt/format.h>

namespace tcprobe {

ParseError::ParseError(const std::string& source, int line,
                       const std::string& message)
    : std::runtime_error(fmt::format("{}:{}: {}", source, line, message)),
      line_(line) {}

namespace {

constexpr double kMpsInf = 1e30;

enum class Section {
  kNone,
  kName,
  kObjSense,
  kRows,
  kColumns,
  kRhs,
  kRanges,
  kBounds,
  kEnd,
};

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t p = 0;
  while (p < line.size()) {
    while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p])))
      ++p;
    std::size_t q = p;
    while (q < line.size() && !std::isspace(static_cast<unsigned char>(line[q])))
      ++q;
    if (q > p) out.push_back(line.substr(p, q - p));
    p = q;
  }
  return out;
}

class Parser {
 public:
  Parser(std::istream& in, std::string source)
      : in_(in), source_(std::move(source)) {}

  MipInstance parse();

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(source_, line_no_, message);
  }
  double number(std::string_view token) const;
  int row_index(std::string_view name) const;
  int col_index(std::string_view name) const;
  void header(const std::vector<std::string_view>& tokens);
  void rows(const std::vector<std::string_view>& tokens);
  void columns(const std::vector<std::string_view>& tokens);
  void rhs(const std::vector<std::string_view>& tokens);
  void ranges(const std::vector<std::string_view>& tokens);
  void bounds(const std::vector<std::string_view>& tokens);
  void objsense(std::string_view token);

  std::istream& in_;
  std::string source_;
  int line_no_ = 0;
  Section section_ = Section::kNone;

  RawInstance raw_;
  std::string objective_name_;
  std::unordered_set<std::string> free_rows_;  // extra N rows, dropped
  std::unordered_map<std::string, int> rows_;
  std::unordered_map<std::string, int> cols_;
  bool in_marker_ = false;
  bool maximize_ = false;
  std::string current_col_;
};

double Parser::number(std::string_view token) const {
  double value = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end)
    fail(fmt::format("malformed number '{}'", token));
  if (std::isnan(value)) fail(fmt::format("malformed number '{}'", token));
  if (value >= kMpsInf) return kInf;
  if (value <= -kMpsInf) return -kInf;
  return value;
}

int Parser::row_index(std::string_view name) const {
  auto it = rows_.find(std::string(name));
  if (it == rows_.end()) fail(fmt::format("unknown row '{}'", name));
  return it->second;
}

int Parser::col_index(std::string_view name) const {
  auto it = cols_.find(std::string(name));
  if (it == cols_.end()) fail(fmt::format("unknown column '{}'", name));
  return it->second;
}

void Parser::objsense(std::string_view token) {
  if (token == "MAX" || token == "MAXIMIZE")
    maximize_ = true;
  else if (token == "MIN" || token == "MINIMIZE")
    maximize_ = false;
  else
    fail(fmt::format("unknown objective sense '{}'", token));
}

void Parser::header(const std::vector<std::string_view>& tokens) {
  const std::string_view key = tokens[0];
  if (key == "NAME") {
    section_ = Section::kName;
    if (tokens.size() > 1) raw_.name = std::string(tokens[1]);
  } else if (key == "OBJSENSE") {
    section_ = Section::kObjSense;
    if (tokens.size() > 1) objsense(tokens[1]);
  } else if (key == "ROWS") {
    section_ = Section::kRows;
  } else if (key == "COLUMNS") {
    section_ = Section::kColumns;
  } else if (key == "RHS") {
    section_ = Section::kRhs;
  } else if (key == "RANGES") {
    section_ = Section::kRanges;
  } else if (key == "BOUNDS") {
    section_ = Section::kBounds;
  } else if (key == "ENDATA") {
    section_ = Section::kEnd;
  } else {
    fail(fmt::format("unknown section '{}'", key));
  }
}

void Parser::rows(const std::vector<std::string_view>& tokens) {
  if (tokens.size() != 2) fail("ROWS entry needs a type and a name");
  const std::string name(tokens[1]);
  if (rows_.contains(name) || name == objective_name_ ||
      free_rows_.contains(name))
    fail(fmt::format("duplicate row name '{}'", name));
  const std::string_view type = tokens[0];
  if (type == "N") {
    if (objective_name_.empty())
      objective_name_ = name;
    else
      free_rows_.insert(name);
    return;
  }
  RowSense sense;
  if (type == "L")
    sense = RowSense::kLE;
  else if (type == "G")
    sense = RowSense::kGE;
  else if (type == "E")
    sense = RowSense::kEQ;
  else
    fail(fmt::format("unknown row type '{}'", type));
  rows_.emplace(name, static_cast<int>(raw_.senses.size()));
  raw_.row_names.push_back(name);
  raw_.senses.push_back(sense);
  raw_.rhs.push_back(0.0);
  raw_.ranges.push_back(std::nullopt);
}

void Parser::columns(const std::vector<std::string_view>& tokens) {
  if (tokens.size() >= 3 && tokens[1] == "'MARKER'") {
    if (tokens[2] == "'INTORG'")
      in_marker_ = true;
    else if (tokens[2] == "'INTEND'")
      in_marker_ = false;
    else
      fail(fmt::format("unknown marker '{}'", tokens[2]));
    return;
  }
  if (tokens.size() != 3 && tokens.size() != 5)
    fail("COLUMNS entry needs a column and one or two (row, value) pairs");
  const std::string name(tokens[0]);
  auto [it, fresh] = cols_.try_emplace(name, static_cast<int>(cols_.size()));
  const int j = it->second;
  if (fresh) {
    raw_.col_names.push_back(name);
    raw_.objective.push_back(0.0);
    raw_.lower.push_back(0.0);
    raw_.upper.push_back(kInf);
    raw_.is_integer.push_back(in_marker_);
  } else if (name != current_col_) {
    fail(fmt::format("entries of column '{}' are not contiguous", name));
  }
  current_col_ = name;
  for (std::size_t k = 1; k + 1 < tokens.size(); k += 2) {
    const std::string_view row = tokens[k];
    const double value = number(tokens[k + 1]);
    if (!std::isfinite(value))
      fail(fmt::format("infinite coefficient in column '{}'", name));
    if (row == objective_name_) {
      raw_.objective[j] = value;
    } else if (free_rows_.contains(std::string(row))) {
      continue;
    } else {
      raw_.entries.push_back({row_index(row), j, value});
    }
  }
}

void Parser::rhs(const std::vector<std::string_view>& tokens) {
  // An odd token count means a leading set name.
  const std::size_t first = tokens.size() % 2 == 1 ? 1 : 0;
  if (tokens.size() - first < 2 || tokens.size() - first > 4)
    fail("RHS entry needs one or two (row, value) pairs");
  for (std::size_t k = first; k + 1 < tokens.size(); k += 2) {
    const double value = number(tokens[k + 1]);
    if (!std::isfinite(value)) fail("infinite right-hand side");
    if (tokens[k] == objective_name_)
      raw_.objective_offset = -value;
    else if (!free_rows_.contains(std::string(tokens[k])))
      raw_.rhs[row_index(tokens[k])] = value;
  }
}

void Parser::ranges(const std::vector<std::string_view>& tokens) {
  const std::size_t first = tokens.size() % 2 == 1 ? 1 : 0;
  if (tokens.size() - first < 2 || tokens.size() - first > 4)
    fail("RANGES entry needs one or two (row, value) pairs");
  for (std::size_t k = first; k + 1 < tokens.size(); k += 2) {
    const double value = number(tokens[k + 1]);
    if (!std::isfinite(value)) fail("infinite range");
    if (free_rows_.contains(std::string(tokens[k]))) continue;
    raw_.ranges[row_index(tokens[k])] = value;
  }
}

void Parser::bounds(const std::vector<std::string_view>& tokens) {
  const std::string_view type = tokens[0];
  const bool needs_value = type == "LO" || type == "UP" || type == "FX" ||
                           type == "LI" || type == "UI";
  const bool no_value = type == "FR" || type == "MI" || type == "PL";
  const bool binary = type == "BV";
  if (!needs_value && !no_value && !binary)
    fail(fmt::format("unknown bound type '{}'", type));

  std::string_view col;
  std::optional<std::string_view> value_token;
  const std::size_t n = tokens.size();
  if (needs_value) {
    if (n == 4) {
      col = tokens[2];
      value_token = tokens[3];
    } else if (n == 3) {
      col = tokens[1];
      value_token = tokens[2];
    } else {
      fail(fmt::format("bound '{}' needs a column and a value", type));
    }
  } else if (n == 4) {
    col = tokens[2];
    value_token = tokens[3];
  } else if (n == 3) {
    // "TYPE set col" or "TYPE col value": a trailing number means the latter.
    double ignored = 0;
    const auto [ptr, ec] = std::from_chars(
        tokens[2].data(), tokens[2].data() + tokens[2].size(), ignored);
    if (ec == std::errc() && ptr == tokens[2].data() + tokens[2].size()) {
      col = tokens[1];
      value_token = tokens[2];
    } else {
      col = tokens[2];
    }
  } else if (n == 2) {
    col = tokens[1];
  } else {
    fail(fmt::format("malformed bound '{}'", type));
  }

  const int j = col_index(col);
  const double v = value_token ? number(*value_token) : 0.0;
  double& lb = raw_.lower[j];
  double& ub = raw_.upper[j];
  if (type == "LO" || type == "LI") {
    lb = v;
    if (type == "LI") raw_.is_integer[j] = true;
  } else if (type == "UP" || type == "UI") {
    // Classic convention: a negative upper bound on a column with the default
    // lower bound makes the column unbounded below.
    if (v < 0 && lb == 0.0) lb = -kInf;
    ub = v;
    if (type == "UI") raw_.is_integer[j] = true;
  } else if (type == "FX") {
    lb = ub = v;
  } else if (type == "FR") {
    lb = -kInf;
    ub = kInf;
  } else if (type == "MI") {
    lb = -kInf;
  } else if (type == "PL") {
    ub = kInf;
  } else {
    lb = 0.0;
    ub = 1.0;
    raw_.is_integer[j] = true;
  }
}

MipInstance Parser::parse() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tokens = split(line);
    if (tokens.empty() || tokens[0].front() == '*') continue;
    if (section_ == Section::kEnd) fail("content after ENDATA");

    if (!std::isspace(static_cast<unsigned char>(line[0]))) {
      header(tokens);
      continue;
    }
    switch (section_) {
      case Section::kNone:
      case Section::kName:
        fail("data line outside of a section");
      case Section::kObjSense:
        objsense(tokens[0]);
        break;
      case Section::kRows:
        rows(tokens);
        break;
      case Section::kColumns:
        columns(tokens);
        break;
      case Section::kRhs:
        rhs(tokens);
        break;
      case Section::kRanges:
        ranges(tokens);
        break;
      case Section::kBounds:
        bounds(tokens);
        break;
      case Section::kEnd:
        break;
    }
  }
  if (section_ != Section::kEnd) fail("missing ENDATA");
  if (maximize_) {
    for (double& c : raw_.objective) c = -c;
    raw_.objective_offset = -raw_.objective_offset;
  }
  try {
    return build_instance(std::move(raw_));
  } catch (const ModelError& e) {
    fail(e.what());
  }
}

std::string fmt_num(double v) { return fmt::format("{:.17g}", v); }

void check_name(const std::string& name) {
  if (name.empty() ||
      std::any_of(name.begin(), name.end(),
                  [](char c) { return std::isspace(static_cast<unsigned char>(c)); }))
    throw std::runtime_error(
        fmt::format("name '{}' cannot be written in free MPS", name));
}

}  // namespace

MipInstance parse_mps(std::istream& in, const std::string& source) {
  return Parser(in, source).parse();
}

MipInstance read_mps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return parse_mps(in, path);
}

void write_mps(const MipInstance& instance, std::ostream& out) {
  std::unordered_set<std::string> row_names;
  for (int i = 0; i < instance.num_rows(); ++i) {
    check_name(instance.row_name(i));
    row_names.insert(instance.row_name(i));
  }
  for (int j = 0; j < instance.num_cols(); ++j) check_name(instance.col_name(j));
  std::string obj = "obj";
  while (row_names.contains(obj)) obj += "_";

  out << "NAME " << (instance.name().empty() ? "unnamed" : instance.name())
      << "\n";
  out << "ROWS\n";
  out << " N  " << obj << "\n";
  for (int i = 0; i < instance.num_rows(); ++i) {
    const char* type = instance.sense(i) == RowSense::kLE   ? "L"
                       : instance.sense(i) == RowSense::kGE ? "G"
                                                            : "E";
    out << " " << type << "  " << instance.row_name(i) << "\n";
  }

  out << "COLUMNS\n";
  bool marker = false;
  int markers = 0;
  for (int j = 0; j < instance.num_cols(); ++j) {
    if (instance.is_integer(j) != marker) {
      marker = !marker;
      out << "    M" << markers++ << "  'MARKER'  "
          << (marker ? "'INTORG'" : "'INTEND'") << "\n";
    }
    const std::string& name = instance.col_name(j);
    const SparseVector col = instance.col(j);
    if (instance.objective(j) != 0.0 || col.size() == 0)
      out << "    " << name << "  " << obj << "  "
          << fmt_num(instance.objective(j)) << "\n";
    for (std::size_t k = 0; k < col.size(); ++k)
      out << "    " << name << "  " << instance.row_name(col.indices[k]) << "  "
          << fmt_num(col.values[k]) << "\n";
  }
  if (marker) out << "    M" << markers++ << "  'MARKER'  'INTEND'\n";

  out << "RHS\n";
  if (instance.objective_offset() != 0.0)
    out << "    RHS  " << obj << "  " << fmt_num(-instance.objective_offset())
        << "\n";
  for (int i = 0; i < instance.num_rows(); ++i)
    if (instance.rhs(i) != 0.0)
      out << "    RHS  " << instance.row_name(i) << "  "
          << fmt_num(instance.rhs(i)) << "\n";

  bool any_range = false;
  for (int i = 0; i < instance.num_rows(); ++i) {
    if (!instance.range(i)) continue;
    if (!any_range) out << "RANGES\n";
    any_range = true;
    out << "    RNG  " << instance.row_name(i) << "  "
        << fmt_num(*instance.range(i)) << "\n";
  }

  out << "BOUNDS\n";
  for (int j = 0; j < instance.num_cols(); ++j) {
    const std::string& name = instance.col_name(j);
    const double lb = instance.lower(j), ub = instance.upper(j);
    if (lb == ub) {
      out << " FX BND  " << name << "  " << fmt_num(lb) << "\n";
      continue;
    }
    // Upper first: a negative UP read after LO 0 would free the lower bound.
    if (ub == kInf)
      out << " PL BND  " << name << "\n";
    else
      out << " UP BND  " << name << "  " << fmt_num(ub) << "\n";
    if (lb == -kInf)
      out << " MI BND  " << name << "\n";
    else
      out << " LO BND  " << name << "  " << fmt_num(lb) << "\n";
  }
  out << "ENDATA\n";
}

void write_mps(const MipInstance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
  write_mps(instance, out);
  if (!out) throw std::runtime_error(fmt::format("error writing {}", path));
}

void write_mps(const MipInstance& instance, const Reductions& reductions,
               const std::string& path) {
  ApplyResult applied = apply_reductions(instance, reductions);
  if (applied.status != Status::kOk) throw std::runtime_error(applied.reason);
  write_mps(applied.instance, path);
}

void write_metrics(const MetricsReport& r, std::ostream& out) {
  out << "status=" << r.status << "\n";
  out << "note=" << r.note << "\n";
  out << "pre_time_seconds=" << fmt::format("{:.6f}", r.pre_time_seconds)
      << "\n";
  out << "threads=" << r.threads << "\n";
  out << "candidates=" << r.candidates << "\n";
  out << "pairs_probed=" << r.pairs_probed << "\n";
  out << "fixings=" << r.fixings << "\n";
  out << "aggregations=" << r.aggregations << "\n";
  out << "new_conflicts=" << r.new_conflicts << "\n";
  out << "bound_changes=" << r.bound_changes << "\n";
  out << "implications=" << r.implications << "\n";
  out << "cm_truncated=" << (r.cm_truncated ? "true" : "false") << "\n";
  out << "terminated_by=" << to_string(r.terminated_by) << "\n";
}

void write_metrics(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
  write_metrics(report, out);
  if (!out) throw std::runtime_error(fmt::format("error writing {}", path));
}

}  // namespace tcprobe
