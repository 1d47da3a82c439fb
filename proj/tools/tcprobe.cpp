// Command-line driver: read MPS, probe, write the reduced model and metrics.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tcprobe/mps_io.hpp"
#include "tcprobe/pipeline.hpp"

namespace {

enum ExitCode {
  kOk = 0,
  kUsage = 1,
  kInfeasible = 2,
  kRefused = 3,
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-column probing presolver for mixed-integer programs"};
  tcprobe::Config config;
  std::string input, output, metrics;
  std::string penalty = "intersection";

  app.add_option("--input", input, "Input model (free MPS)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--output", output, "Reduced model (free MPS)")->required();
  app.add_option("--metrics", metrics,
                 "Metrics file (key=value); printed to stdout when omitted");
  app.add_option("--threads", config.threads, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--size-limit", config.size_limit,
                 "Longest row counted in the coupling matrix")
      ->capture_default_str();
  app.add_option("--work-limit", config.work_limit,
                 "Pair insertions allowed while building the coupling matrix")
      ->capture_default_str();
  app.add_option("--cand-number", config.cand_number,
                 "Coupling cells kept as candidates")
      ->capture_default_str();
  app.add_option("--max-probe-number", config.max_probe_number,
                 "Pairs probed at most")
      ->capture_default_str();
  app.add_option("--eff-threshold", config.eff_threshold,
                 "Effort level that stops probing")
      ->capture_default_str();
  app.add_option("--time-limit", config.time_limit_seconds,
                 "Wall clock budget for probing, seconds")
      ->capture_default_str();
  app.add_option("--max-rounds", config.max_propagation_rounds,
                 "Row propagation rounds per probe")
      ->capture_default_str();
  app.add_option("--tol", config.tol, "Feasibility tolerance")
      ->capture_default_str();
  app.add_option("--conflict-penalty", penalty,
                 "Score penalty when the pair shares a clique (intersection) "
                 "or either variable is in one (union)")
      ->capture_default_str()
      ->check(CLI::IsMember({"intersection", "union"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  config.conflict_penalty = penalty == "union"
                                ? tcprobe::ConflictPenalty::kUnion
                                : tcprobe::ConflictPenalty::kIntersection;
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  tcprobe::MipInstance instance;
  try {
    instance = tcprobe::read_mps(input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  tcprobe::PipelineResult result;
  try {
    result = tcprobe::run_pipeline(instance, config);
  } catch (const std::exception& e) {
    std::cerr << "error: probing stage: " << e.what() << "\n";
    return kRefused;
  }

  try {
    if (result.status == tcprobe::Status::kInfeasible) {
      std::ofstream out(output);
      if (!out) throw std::runtime_error("cannot write " + output);
      out << "INFEASIBLE\n" << "reason: " << result.reason << "\n";
    } else {
      tcprobe::write_mps(result.reduced, output);
    }
    if (metrics.empty())
      tcprobe::write_metrics(result.metrics, std::cout);
    else
      tcprobe::write_metrics(result.metrics, metrics);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRefused;
  }

  if (result.status == tcprobe::Status::kInfeasible) {
    std::cerr << "proven infeasible: " << result.reason << "\n";
    return kInfeasible;
  }
  return kOk;
}
