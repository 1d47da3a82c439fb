#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "generators.hpp"
#include "tcprobe/mps_io.hpp"
#include "tcprobe/pipeline.hpp"

using namespace tcprobe;
using namespace tcprobe::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tcprobe_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const {
    return (path / name).string();
  }
  static inline int counter = 0;
};

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(TCPROBE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string data(const std::string& name) {
  return std::string(TCPROBE_TEST_DATA_DIR) + "/" + name;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config validation") {
    Config c;
    CHECK_NOTHROW(c.validate());
    c.threads = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = Config{};
    c.tol = -1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = Config{};
    c.work_limit = 0;
    CHECK_THROWS_AS(run_pipeline(worked_example(), c), std::invalid_argument);
  }

  TEST_CASE("no pairs passes the instance through") {
    const MipInstance inst = from_rows({"a + b <= 1"}, {"a", "b"});
    const PipelineResult r = run_pipeline(inst, Config{});
    CHECK(r.no_pairs);
    CHECK(r.metrics.note == "no pairs");
    CHECK(instance_difference(r.reduced, inst) == "");
  }

  TEST_CASE("worked example through the pipeline") {
    const PipelineResult r = run_pipeline(worked_example(), Config{});
    CHECK(r.status == Status::kOk);
    CHECK_FALSE(r.no_pairs);
    CHECK(r.metrics.candidates == 4);
    CHECK(r.metrics.pairs_probed >= 1);
    CHECK(r.metrics.fixings == static_cast<long long>(r.reductions.fixings.size()));
    CHECK(r.reduced.num_cols() == 5);
  }

  TEST_CASE("infeasible presolve") {
    const PipelineResult r =
        run_pipeline(from_rows({"a + b <= 1", "<= -1"}, {"a", "b"}), Config{});
    CHECK(r.status == Status::kInfeasible);
    CHECK(r.metrics.status == "infeasible");
    CHECK_FALSE(r.reason.empty());
  }

  TEST_CASE("metrics counts agree with the reductions") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const PipelineResult r = run_pipeline(random_mixed_instance(seed), Config{});
      if (r.status != Status::kOk || r.no_pairs) continue;
      CHECK(r.metrics.aggregations ==
            static_cast<long long>(r.reductions.aggregations.size()));
      CHECK(r.metrics.new_conflicts ==
            static_cast<long long>(r.reductions.new_conflicts.size()));
      CHECK(r.metrics.bound_changes == r.reductions.num_bound_changes());
      CHECK(r.reduced.num_rows() ==
            random_mixed_instance(seed).num_rows() +
                static_cast<int>(r.reductions.new_conflicts.size() +
                                 r.reductions.aggregations.size()));
    }
  }
}

TEST_SUITE("cli") {
  TEST_CASE("serial run writes model and metrics") {
    TempDir dir;
    CHECK(run_cli("--input " + data("worked_example.mps") + " --output " +
                  (dir / "out.mps") + " --metrics " + (dir / "m.txt")) == 0);
    const MipInstance out = read_mps(dir / "out.mps");
    CHECK(out.num_cols() == 5);
    const std::string metrics = slurp(dir / "m.txt");
    CHECK(metrics.starts_with("status=ok\n"));
    CHECK(metrics.find("threads=1\n") != std::string::npos);
  }

  TEST_CASE("parallel run") {
    TempDir dir;
    CHECK(run_cli("--input " + data("mixed_knap_60x90.mps") + " --output " +
                  (dir / "out.mps") + " --metrics " + (dir / "m.txt") +
                  " --threads 16") == 0);
    CHECK(slurp(dir / "m.txt").find("threads=16\n") != std::string::npos);
  }

  TEST_CASE("no pairs copies the input") {
    TempDir dir;
    write_text(dir / "in.mps",
               "NAME p\nROWS\n N obj\n L c\nCOLUMNS\n x c 1\n y c 1\nRHS\n"
               " RHS c 1\nBOUNDS\n BV BND x\n BV BND y\nENDATA\n");
    CHECK(run_cli("--input " + (dir / "in.mps") + " --output " +
                  (dir / "out.mps") + " --metrics " + (dir / "m.txt")) == 0);
    CHECK(slurp(dir / "m.txt").find("note=no pairs\n") != std::string::npos);
    CHECK(instance_difference(read_mps(dir / "in.mps"),
                              read_mps(dir / "out.mps")) == "");
  }

  TEST_CASE("parse error") {
    TempDir dir;
    write_text(dir / "bad.mps", "NAME p\nROWS\n N obj\nWHAT\nENDATA\n");
    CHECK(run_cli("--input " + (dir / "bad.mps") + " --output " +
                  (dir / "out.mps")) == 1);
  }

  TEST_CASE("usage errors") {
    TempDir dir;
    CHECK(run_cli("--output " + (dir / "out.mps")) == 1);
    CHECK(run_cli("--input " + data("worked_example.mps") + " --output " +
                  (dir / "out.mps") + " --threads 0") == 1);
    CHECK(run_cli("--input " + data("worked_example.mps") + " --output " +
                  (dir / "out.mps") + " --conflict-penalty other") == 1);
    CHECK(run_cli("--input " + (dir / "missing.mps") + " --output " +
                  (dir / "out.mps")) == 1);
  }

  TEST_CASE("infeasible instance") {
    TempDir dir;
    write_text(dir / "inf.mps",
               "NAME p\nROWS\n N obj\n G c\nCOLUMNS\n x c 1\n y c 1\nRHS\n"
               " RHS c 3\nBOUNDS\n BV BND x\n BV BND y\nENDATA\n");
    CHECK(run_cli("--input " + (dir / "inf.mps") + " --output " +
                  (dir / "out.mps") + " --metrics " + (dir / "m.txt")) == 2);
    CHECK(slurp(dir / "out.mps").starts_with("INFEASIBLE\n"));
    CHECK(slurp(dir / "m.txt").starts_with("status=infeasible\n"));
  }

  TEST_CASE("unwritable output") {
    CHECK(run_cli("--input " + data("worked_example.mps") +
                  " --output /nonexistent/dir/out.mps") == 3);
  }

  TEST_CASE("union penalty flag") {
    TempDir dir;
    CHECK(run_cli("--input " + data("cover_35x50.mps") + " --output " +
                  (dir / "out.mps") + " --metrics " + (dir / "m.txt") +
                  " --conflict-penalty union") == 0);
    CHECK(slurp(dir / "m.txt").find("pairs_probed=0\n") == std::string::npos);
    CHECK(run_cli("--input " + data("cover_35x50.mps") + " --output " +
                  (dir / "out.mps") + " --conflict-penalty both") == 1);
  }
}
