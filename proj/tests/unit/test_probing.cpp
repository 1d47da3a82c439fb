#include <doctest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "oracle.hpp"
#include "tcprobe/pipeline.hpp"
#include "tcprobe/probing.hpp"

using namespace tcprobe;
using namespace tcprobe::testing;

namespace {

struct Setup {
  PresolveOutput presolved;
  CmCt structures;

  explicit Setup(const MipInstance& inst, const Config& config = {})
      : presolved(run_simple_presolve(inst, config.tol)),
        structures(build_cm_ct(presolved, config.size_limit,
                               config.work_limit)) {}

  ProbingWorker worker(const Config& config = {}) const {
    const MipInstance& inst = presolved.instance;
    return ProbingWorker(inst, inst.lower(), inst.upper(), structures.cliques,
                         ImplicationStore(inst.num_cols()), config);
  }
};

ProbeOutcome outcome_with_infeasible(std::vector<std::pair<int, int>> bad) {
  ProbeOutcome o;
  o.i = 3;
  o.j = 7;
  o.feasible = {true, true, true, true};
  for (auto [v1, v2] : bad) o.feasible[ProbeOutcome::index(v1, v2)] = false;
  return o;
}

const BoundChange* find(const std::vector<BoundChange>& list, int var) {
  for (const BoundChange& c : list)
    if (c.var == var) return &c;
  return nullptr;
}

}  // namespace

TEST_SUITE("probing") {
  TEST_CASE("select_candidates by threshold") {
    const CouplingMatrix cm({{0, 1, 5}, {0, 2, 3}, {1, 2, 3}, {2, 3, 1}});
    const long long cand_number = 3;
    // Smallest tau whose cell count fits.
    int tau = 1;
    auto count = [&](int t) {
      return std::count_if(cm.cells().begin(), cm.cells().end(),
                           [&](const auto& c) { return c.count >= t; });
    };
    while (count(tau) > cand_number) ++tau;
    CHECK(tau == 2);
    const auto sel = select_candidates(cm, cand_number);
    REQUIRE(sel.size() == 3);
    CHECK(sel[0] == CandidatePair{0, 1, 5, 0.0});
    CHECK(sel[1] == CandidatePair{0, 2, 3, 0.0});
    CHECK(sel[2] == CandidatePair{1, 2, 3, 0.0});
    CHECK(select_candidates(cm, 10).size() == 4);
    CHECK(select_candidates(CouplingMatrix{}, 10).empty());
    CHECK(select_candidates(cm, 1).size() == 1);
  }

  TEST_CASE("select_candidates never exceeds the limit and keeps the best") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<CouplingMatrix::Cell> cells;
      const int n = std::uniform_int_distribution<int>(1, 40)(rng);
      for (int k = 0; k < n; ++k)
        cells.push_back({k, k + 1, std::uniform_int_distribution<int>(1, 6)(rng)});
      const CouplingMatrix cm(cells);
      const long long limit = std::uniform_int_distribution<int>(1, 45)(rng);
      const auto sel = select_candidates(cm, limit);
      CHECK(static_cast<long long>(sel.size()) <= limit);
      // Admitting the best rejected count would overflow the limit.
      const int lowest = sel.empty() ? 7 : sel.back().cm;
      int rejected = 0;
      for (const auto& c : cells)
        if (c.count < lowest) rejected = std::max(rejected, c.count);
      long long admitted = 0;
      for (const auto& c : cells) admitted += c.count >= rejected;
      if (rejected > 0) CHECK(admitted > limit);
      for (const auto& c : cells)
        if (c.count >= lowest)
          CHECK(std::count(sel.begin(), sel.end(),
                           CandidatePair{c.i, c.j, c.count, 0.0}) == 1);
    }
  }

  TEST_CASE("score formula") {
    CHECK(pair_score(3, 4, 5, 5, 3, false) == doctest::Approx(63));
    CHECK(pair_score(3, 4, 5, 5, 3, true) == doctest::Approx(6.3));
    CHECK(pair_score(1, 1, 1, 0, 0, false) == doctest::Approx(12));
  }

  TEST_CASE("score_pair counts columns and cliques of the instance") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const Setup s(random_mixed_instance(seed));
      const MipInstance& inst = s.presolved.instance;
      std::vector<int> nnz(inst.num_cols(), 0), conf(inst.num_cols(), 0);
      for (const Triplet& t : inst.matrix().triplets()) ++nnz[t.col];
      std::vector<std::vector<int>> member(inst.num_cols());
      for (std::size_t c = 0; c < s.presolved.cliques.size(); ++c)
        for (const auto& [lit, coef] : s.presolved.cliques[c].literals) {
          conf[lit.var] += inst.row_nnz(s.presolved.clique_rows[c]);
          member[lit.var].push_back(static_cast<int>(c));
        }
      for (const auto& cell : s.structures.coupling.cells()) {
        bool shared = false;
        for (int a : member[cell.i])
          for (int b : member[cell.j]) shared |= a == b;
        const double expected =
            (10.0 * cell.count + nnz[cell.i] + nnz[cell.j] + 3.0 * conf[cell.i] +
             3.0 * conf[cell.j]) /
            (shared ? 10.0 : 1.0);
        const std::vector<int> c = conflict_numbers(s.structures.cliques);
        CHECK(score_pair(cell.i, cell.j, cell.count, inst, s.structures.cliques,
                         c) == doctest::Approx(expected));
      }
    }
  }

  TEST_CASE("union penalty") {
    const MipInstance inst =
        from_rows({"a + b <= 1", "a + c + d <= 2"}, {"a", "b", "c", "d"});
    const Setup s(inst);
    const auto conf = conflict_numbers(s.structures.cliques);
    const double inter = score_pair(0, 2, 1, s.presolved.instance,
                                    s.structures.cliques, conf,
                                    ConflictPenalty::kIntersection);
    const double uni = score_pair(0, 2, 1, s.presolved.instance,
                                  s.structures.cliques, conf,
                                  ConflictPenalty::kUnion);
    CHECK(inter == doctest::Approx(10 * uni));
  }

  TEST_CASE("order_pairs") {
    std::vector<CandidatePair> c{{0, 1, 1, 5.0}, {0, 2, 1, 9.0}, {1, 2, 1, 7.0},
                                 {2, 3, 1, 1.0}, {1, 3, 1, 8.0}};
    SUBCASE("cap") {
      const auto top = order_pairs(c, 3);
      REQUIRE(top.size() == 3);
      CHECK(top[0].score == 9.0);
      CHECK(top[1].score == 8.0);
      CHECK(top[2].score == 7.0);
    }
    SUBCASE("ties") {
      for (auto& p : c) p.score = 1.0;
      const auto top = order_pairs(c, 5);
      CHECK(top[0] == c[0]);
      CHECK(top[1] == c[1]);
      CHECK(top[2] == c[2]);
      CHECK(top[3] == c[4]);
      CHECK(top[4] == c[3]);
    }
    SUBCASE("fewer than cap") {
      const auto all = order_pairs(c, 100);
      CHECK(all.size() == 5);
      CHECK(std::is_sorted(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.score > b.score;
      }));
    }
  }

  TEST_CASE("derive_fixings") {
    SUBCASE("x_i = 0 impossible") {
      const auto d = derive_fixings(outcome_with_infeasible({{0, 0}, {0, 1}}));
      CHECK(d.fixings == std::vector<std::pair<int, int>>{{3, 1}});
      CHECK_FALSE(d.aggregation);
    }
    SUBCASE("x_j = 1 impossible") {
      const auto d = derive_fixings(outcome_with_infeasible({{0, 1}, {1, 1}}));
      CHECK(d.fixings == std::vector<std::pair<int, int>>{{7, 0}});
    }
    SUBCASE("three infeasible") {
      const auto d =
          derive_fixings(outcome_with_infeasible({{0, 0}, {1, 0}, {0, 1}}));
      CHECK(d.fixings == std::vector<std::pair<int, int>>{{3, 1}, {7, 1}});
    }
    SUBCASE("equal") {
      const auto d = derive_fixings(outcome_with_infeasible({{0, 1}, {1, 0}}));
      CHECK(d.fixings.empty());
      REQUIRE(d.aggregation);
      CHECK(*d.aggregation == std::pair{1.0, 0.0});
    }
    SUBCASE("complement") {
      const auto d = derive_fixings(outcome_with_infeasible({{0, 0}, {1, 1}}));
      REQUIRE(d.aggregation);
      CHECK(*d.aggregation == std::pair{-1.0, 1.0});
    }
    SUBCASE("one infeasible is only a conflict") {
      const auto d = derive_fixings(outcome_with_infeasible({{1, 1}}));
      CHECK(d.fixings.empty());
      CHECK_FALSE(d.aggregation);
      CHECK_FALSE(d.infeasible);
    }
    SUBCASE("all infeasible") {
      CHECK(derive_fixings(
                outcome_with_infeasible({{0, 0}, {1, 0}, {0, 1}, {1, 1}}))
                .infeasible);
    }
  }

  TEST_CASE("conflict cuts exclude exactly their point") {
    for (int v1 = 0; v1 < 2; ++v1)
      for (int v2 = 0; v2 < 2; ++v2) {
        const ConflictCut cut{0, 1, v1, v2};
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            const bool violated =
                cut.coef_i() * a + cut.coef_j() * b > cut.rhs() + 1e-9;
            CHECK(violated == (a == v1 && b == v2));
          }
      }
  }

  TEST_CASE("probing (x, w) on the worked example") {
    const Setup s(worked_example());
    ProbingWorker worker = s.worker();
    const ProbeOutcome o = worker.probe_pair(kX, kW);
    CHECK(o.feasible == std::array<bool, 4>{true, true, true, true});
    for (int w = 0; w < 2; ++w) {
      const BoundChange* t = find(o.changes[ProbeOutcome::index(1, w)], kT);
      REQUIRE(t);
      CHECK(t->lower == -1);
    }
    const CombinedBounds cb = combine_bounds(o, worker.lower(), worker.upper());
    REQUIRE(cb.branch[1]);
    const BoundChange* t = find(*cb.branch[1], kT);
    REQUIRE(t);
    CHECK(t->lower == -1);

    // One-column comparison: x = 1 alone gives only t >= -2, which the
    // root domain already holds.
    CHECK(worker.lower()[kT] == -2);
    const auto single = worker.probe_single(kX, 1);
    REQUIRE(single);
    const BoundChange* ts = find(*single, kT);
    CHECK((ts ? ts->lower : worker.lower()[kT]) == -2);
  }

  TEST_CASE("serial worker on the worked example") {
    const Setup s(worked_example());
    ProbingWorker worker = s.worker();
    const std::vector<CandidatePair> pairs{{kX, kW, 0, 0.0}};
    worker.run(pairs, 1000, Clock::time_point::max());
    CHECK(worker.status() == Status::kOk);
    CHECK(worker.pairs_done() == 1);
    const auto singles = worker.implications().singles(Literal::of(kX, 1));
    CHECK(std::find(singles.begin(), singles.end(),
                    Implication{kT, BoundKind::kLower, -1}) != singles.end());
    for (int j = 1; j < 5; ++j) CHECK(worker.upper()[j] - worker.lower()[j] == 1);
    // The pair entry (x=1, w=1) -> t >= -1 is covered by the single entry.
    CHECK(worker.implications().num_pairs() == 0);
    CHECK(worker.probed() == std::vector<int>{kW, kX});
  }

  TEST_CASE("combine_bounds with nothing new") {
    ProbeOutcome o = outcome_with_infeasible({});
    const std::vector<double> lo{0, 0, 0, 0, 0, 0, 0, 0};
    const std::vector<double> up{1, 1, 1, 1, 1, 1, 1, 1};
    const CombinedBounds cb = combine_bounds(o, lo, up);
    CHECK(cb.global.empty());
    for (const auto& b : cb.branch) {
      REQUIRE(b);
      CHECK(b->empty());
    }
  }

  TEST_CASE("combine_bounds takes the hull of feasible branches") {
    ProbeOutcome o = outcome_with_infeasible({{1, 1}});
    o.changes[0] = {{1, 0, 0}, {2, 0, 3}};
    o.changes[1] = {{1, 0, 0}, {2, 1, 2}};
    o.changes[2] = {{1, 0, 0.5}};
    const std::vector<double> lo{0, 0, 0, 0, 0, 0, 0, 0};
    const std::vector<double> up{1, 1, 5, 1, 1, 1, 1, 1};
    const CombinedBounds cb = combine_bounds(o, lo, up);
    REQUIRE(cb.global.size() == 1);
    CHECK(cb.global[0] == BoundChange{1, 0, 0.5});
    // x_i = 1 has only (1, 0) feasible.
    REQUIRE(cb.branch[1]);
    CHECK(*cb.branch[1] == std::vector<BoundChange>{{1, 0, 0}, {2, 1, 2}});
    // x_j = 0: hull of (0, 0) and (1, 0).
    CHECK(*cb.branch[2] == std::vector<BoundChange>{{1, 0, 0}, {2, 0, 3}});
  }

  TEST_CASE("two-valued branch fixings become an aggregation") {
    ImplicationStore store(6);
    const BranchBounds zero = std::vector<BoundChange>{{5, 0, 0}};
    const BranchBounds one = std::vector<BoundChange>{{5, 1, 1}};
    const std::vector<double> lo(6, 0.0), up(6, 1.0);
    const BranchDeductions d =
        deduce_from_branches(2, zero, one, {}, lo, up, store, 1e-6);
    CHECK(d.aggregation);
    REQUIRE(store.aggregation(5));
    CHECK(*store.aggregation(5) == Aggregation{5, 2, 1, 0});
  }

  TEST_CASE("pair implications") {
    SUBCASE("covered by the single branch") {
      const Setup s(worked_example());
      ProbingWorker worker = s.worker();
      const ProbeOutcome o = worker.probe_pair(kX, kW);
      const CombinedBounds cb = combine_bounds(o, worker.lower(), worker.upper());
      ImplicationStore store(5);
      CHECK_FALSE(derive_pair_implications(o, cb, worker.lower(),
                                           worker.upper(), store, 1e-6));
    }
    SUBCASE("tighter than both branches") {
      ProbeOutcome o = outcome_with_infeasible({});
      o.changes[3] = {{1, 0, 0.25}};
      const std::vector<double> lo(8, 0.0), up(8, 1.0);
      const CombinedBounds cb = combine_bounds(o, lo, up);
      ImplicationStore store(8);
      CHECK(derive_pair_implications(o, cb, lo, up, store, 1e-6));
      const auto pairs = store.all_pairs();
      REQUIRE(pairs.size() == 1);
      CHECK(pairs[0].first == LiteralPair{Literal::of(3, 1), Literal::of(7, 1)});
      CHECK(pairs[0].second == Implication{1, BoundKind::kUpper, 0.25});
    }
    SUBCASE("nothing tightened") {
      ProbeOutcome o = outcome_with_infeasible({});
      const std::vector<double> lo(8, 0.0), up(8, 1.0);
      ImplicationStore store(8);
      CHECK_FALSE(derive_pair_implications(o, combine_bounds(o, lo, up), lo, up,
                                           store, 1e-6));
    }
  }

  TEST_CASE("budget") {
    SUBCASE("barren sequence") {
      ProbingBudget b;
      update_budget(b, {});
      CHECK(b.eff == doctest::Approx(110));
      update_budget(b, {});
      CHECK(b.eff == doctest::Approx(209));
      update_budget(b, {});
      CHECK(b.eff == doctest::Approx(298.1));
    }
    SUBCASE("23 barren iterations") {
      // e_n = 1100 (1 - 0.9^n) > 1000  <=>  0.9^n < 1/11
      const int n = static_cast<int>(std::ceil(std::log(1.0 / 11) / std::log(0.9)));
      CHECK(n == 23);
      ProbingBudget b;
      int iterations = 0;
      while (!b.effort_exhausted()) {
        update_budget(b, {});
        ++iterations;
      }
      CHECK(iterations == n);
      CHECK(b.pairs_done == n);
    }
    SUBCASE("two fixings reset") {
      ProbingBudget b;
      b.eff = 900;
      update_budget(b, {2, false, false});
      CHECK(b.eff == doctest::Approx(110));
    }
    SUBCASE("random traces") {
      std::mt19937_64 rng(1);
      for (int trial = 0; trial < 100; ++trial) {
        ProbingBudget b;
        double eff = 0;
        for (int it = 0; it < 60; ++it) {
          ProbeEvents e;
          e.fixings = static_cast<int>(rng() % 3);
          e.conflict_or_aggregation = rng() % 2;
          e.implication = rng() % 2;
          update_budget(b, e);
          double next = 0.9 * eff;
          if (e.fixings >= 2) next = 0;
          if (e.fixings == 1) next *= 0.5;
          if (e.conflict_or_aggregation) next *= 0.8;
          if (e.implication) next *= 0.9;
          eff = next + 110;
          CHECK(b.eff == doctest::Approx(eff));
        }
      }
    }
  }

  TEST_CASE("barren probing stops after 23 pairs") {
    const Setup s(sliding_window_instance(200, 5, 5));
    ProbingWorker worker = s.worker();
    auto pairs = select_candidates(s.structures.coupling, 1'000'000);
    worker.run(pairs, 1000, Clock::time_point::max());
    CHECK(worker.pairs_done() == 23);
    CHECK(worker.terminated_by() == TerminatedBy::kEffort);
  }

  TEST_CASE("run_serial") {
    SUBCASE("no candidates") {
      const Setup s(from_rows({"a + b <= 1"}, {"a", "b"}));
      const ProbingResult r = run_serial(s.presolved, s.structures, Config{});
      CHECK(r.pairs_probed == 0);
      CHECK(r.terminated_by == TerminatedBy::kExhausted);
      const Reductions red = make_reductions(s.presolved.instance, r, 1e-6);
      CHECK(red.bounds.empty());
      CHECK(red.aggregations.empty());
      CHECK(red.new_conflicts.empty());
      CHECK(red.single_implications.empty());
    }
    SUBCASE("pair limit") {
      Config config;
      config.max_probe_number = 1;
      const Setup s(sliding_window_instance(30, 4, 4), config);
      const ProbingResult r = run_serial(s.presolved, s.structures, config);
      CHECK(r.pairs_probed == 1);
      CHECK(r.terminated_by == TerminatedBy::kPairLimit);
    }
    SUBCASE("deterministic") {
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Setup s(random_mixed_instance(seed));
        const ProbingResult a = run_serial(s.presolved, s.structures, Config{});
        const ProbingResult b = run_serial(s.presolved, s.structures, Config{});
        CHECK(a.lower == b.lower);
        CHECK(a.upper == b.upper);
        CHECK(a.new_conflicts == b.new_conflicts);
        CHECK(a.implications.all_singles() == b.implications.all_singles());
        CHECK(a.implications.all_pairs() == b.implications.all_pairs());
        CHECK(a.implications.aggregations() == b.implications.aggregations());
      }
    }
  }

  TEST_CASE("a pair inside a clique rediscovers it") {
    const Setup s(worked_example());
    ProbingWorker worker = s.worker();
    const ProbeOutcome o = worker.probe_pair(kW, kY);
    CHECK_FALSE(o.feasible[ProbeOutcome::index(1, 1)]);
    CHECK(o.num_infeasible() == 1);
    const std::vector<CandidatePair> pairs{{kW, kY, 0, 0.0}};
    worker.run(pairs, 10, Clock::time_point::max());
    CHECK(worker.new_conflicts().empty());
  }

  TEST_CASE("new conflicts are cut at the infeasible point") {
    // a + b >= 1 is not a clique; probing finds (0, 0) infeasible.
    const Setup s(from_rows({"a + b + 0.5 c >= 1", "a + b + c <= 2"},
                            {"a", "b", "c"}));
    ProbingWorker worker = s.worker();
    const std::vector<CandidatePair> pairs{{0, 1, 2, 0.0}};
    worker.run(pairs, 10, Clock::time_point::max());
    REQUIRE(worker.new_conflicts().size() >= 1);
    for (const ConflictCut& cut : worker.new_conflicts()) {
      const ProbeOutcome o = s.worker().probe_pair(cut.i, cut.j);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const bool violated =
              cut.coef_i() * a + cut.coef_j() * b > cut.rhs() + 1e-9;
          CHECK(violated == (a == cut.v1 && b == cut.v2));
          if (violated) CHECK_FALSE(o.feasible[ProbeOutcome::index(a, b)]);
        }
    }
  }

  TEST_CASE("all four assignments infeasible") {
    RawInstance raw = from_rows({"x - y = 0.5"}, {"x", "y"}).to_raw();
    const MipInstance inst = build_instance(raw);
    ProbingWorker worker(inst, inst.lower(), inst.upper(), CliqueTable(2),
                         ImplicationStore(2), Config{});
    const std::vector<CandidatePair> pairs{{0, 1, 1, 0.0}};
    worker.run(pairs, 10, Clock::time_point::max());
    CHECK(worker.status() == Status::kInfeasible);
  }

  TEST_CASE("apply_reductions") {
    const MipInstance inst = from_rows({"a + b + c <= 2"}, {"a", "b", "c"});
    SUBCASE("empty") {
      const ApplyResult r = apply_reductions(inst, Reductions{});
      CHECK(r.status == Status::kOk);
      CHECK(instance_difference(r.instance, inst) == "");
    }
    SUBCASE("conflict (1, 1)") {
      Reductions red;
      red.new_conflicts.push_back({0, 2, 1, 1});
      const MipInstance out = apply_reductions(inst, red).instance;
      REQUIRE(out.num_rows() == 2);
      CHECK(out.sense(1) == RowSense::kLE);
      CHECK(out.rhs(1) == 1);
      CHECK(std::vector<double>(out.row(1).values.begin(),
                                out.row(1).values.end()) ==
            std::vector<double>{1, 1});
    }
    SUBCASE("aggregation x_i = x_j") {
      Reductions red;
      red.aggregations.push_back({0, 1, 1, 0});
      const MipInstance out = apply_reductions(inst, red).instance;
      REQUIRE(out.num_rows() == 2);
      CHECK(out.sense(1) == RowSense::kEQ);
      CHECK(out.rhs(1) == 0);
      CHECK(std::vector<double>(out.row(1).values.begin(),
                                out.row(1).values.end()) ==
            std::vector<double>{1, -1});
    }
    SUBCASE("fixings and bounds") {
      Reductions red;
      red.fixings[1] = 1;
      red.bounds.push_back({1, 1, 1});
      const MipInstance out = apply_reductions(inst, red).instance;
      CHECK(out.lower(1) == 1);
      CHECK(out.upper(1) == 1);
    }
    SUBCASE("fixing outside the bounds") {
      Reductions red;
      red.fixings[1] = 2;
      CHECK(apply_reductions(inst, red).status == Status::kInfeasible);
    }
  }

  TEST_CASE("serial reductions are valid on enumerated instances") {
    int probed_instances = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const MipInstance inst = random_integer_instance(seed, 14);
      const PipelineResult r = run_pipeline(inst, Config{});
      const auto feasible = oracle::enumerate_feasible(inst);
      if (r.status == Status::kInfeasible) {
        CHECK(feasible.points.empty());
        continue;
      }
      probed_instances += r.metrics.pairs_probed > 0;
      for (const auto& v :
           oracle::validate_reductions(feasible, r.reductions))
        FAIL_CHECK(oracle::describe(v));
    }
    CHECK(probed_instances > 10);
  }
}
