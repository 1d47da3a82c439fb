#ifndef TCPROBE_MPS_IO_HPP_
#define TCPROBE_MPS_IO_HPP_

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "tcprobe/metrics.hpp"
#include "tcprobe/model.hpp"
#include "tcprobe/probing.hpp"

namespace tcprobe {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// Free-format MPS. Values with magnitude >= 1e30 are infinite. A MAXIMIZE
/// objective is negated so that the instance always minimizes.
MipInstance read_mps(const std::string& path);
MipInstance parse_mps(std::istream& in, const std::string& source = "<input>");

/// Writes every bound explicitly and numbers with 17 significant digits, so
/// that reading the file back gives the same instance.
void write_mps(const MipInstance& instance, std::ostream& out);
void write_mps(const MipInstance& instance, const std::string& path);
/// Applies the reductions and writes the result.
void write_mps(const MipInstance& instance, const Reductions& reductions,
               const std::string& path);

/// key=value lines in a fixed order.
void write_metrics(const MetricsReport& report, std::ostream& out);
void write_metrics(const MetricsReport& report, const std::string& path);

}  // namespace tcprobe

#endif  // TCPROBE_MPS_IO_HPP_
