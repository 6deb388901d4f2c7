#include "amcmc/bench.hpp"
#include "amcmc/errors.hpp"
#include "amcmc/evaluator.hpp"
#include "amcmc/oracle.hpp"
#include "amcmc/parse.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace amcmc;

namespace {

struct Fig1 {
  Program prog = parse_program(fig1_program_text());
  OriginalDistribution src{prog};
  SwitchInstance key(const char* name) const {
    return make_instance(prog, parse_term(name), Term::integer(0));
  }
};

constexpr Outcome kT = 0;

}  // namespace

TEST_CASE_FIXTURE(Fig1, "sampled evidence frequency matches its probability") {
  Evaluator ev(prog);
  Term goal = parse_goal("reach(a,e)");
  int hits = 0;
  const int n = 100'000;
  for (int s = 0; s < n; ++s) {
    Rng rng(static_cast<std::uint64_t>(s));
    hits += ev.eval(goal, {}, src, rng).success;
  }
  CHECK(std::abs(static_cast<double>(hits) / n - 0.02882) <= 0.005);
}

TEST_CASE_FIXTURE(Fig1, "true succeeds without touching the assignment") {
  Evaluator ev(prog);
  Rng rng(1);
  Assignment sigma{{key("r(a,b)"), kT}};
  auto r = ev.eval(parse_goal("true"), sigma, src, rng);
  CHECK(r.success);
  CHECK(r.assignment.empty());
  CHECK(r.trace.empty());
}

TEST_CASE_FIXTURE(Fig1, "all edges present: the first derivation goes through b") {
  Assignment all;
  for (const char* e : {"r(a,b)", "r(a,c)", "r(b,d)", "r(b,e)", "r(c,d)", "r(c,e)"}) {
    all.set(key(e), kT);
  }
  Evaluator ev(prog);
  Rng rng(1);
  auto r = ev.eval(parse_goal("reach(a,e)"), all, src, rng);
  CHECK(r.success);
  CHECK(r.assignment == Assignment{{key("r(a,b)"), kT}, {key("r(b,e)"), kT}});
  CHECK(r.trace == Trace{{key("r(a,b)"), kT}, {key("r(b,e)"), kT}});
  Rng other(99);
  auto again = ev.eval(parse_goal("reach(a,e)"), all, src, other);
  CHECK(again.assignment == r.assignment);
  CHECK(again.trace == r.trace);
}

TEST_CASE_FIXTURE(Fig1, "replaying the trace gives the output; output is compatible with input") {
  Evaluator ev(prog);
  for (const char* g : {"reach(a,e)", "reach(a,d)", "edge(b,e)"}) {
    Term goal = parse_goal(g);
    for (std::uint64_t s = 0; s < 500; ++s) {
      Rng pre(s + 1000);
      Assignment input = ev.eval(parse_goal("reach(a,d)"), {}, src, pre).assignment;
      Rng rng(s);
      auto r = ev.eval(goal, input, src, rng);
      CHECK(replay(r.trace) == r.assignment);
      CHECK(compatible(r.assignment, input));
    }
  }
}

TEST_CASE_FIXTURE(Fig1, "same seed, same input, same result") {
  Evaluator ev(prog);
  Evaluator other(prog);
  Term goal = parse_goal("reach(a,d)");
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng r1(s);
    Rng r2(s);
    auto a = ev.eval(goal, {}, src, r1);
    auto b = other.eval(goal, {}, src, r2);
    CHECK(a.success == b.success);
    CHECK(a.assignment == b.assignment);
    CHECK(a.trace == b.trace);
  }
}

TEST_CASE("answers are constant over every world extending the output") {
  std::vector<BenchInstance> benches = {gen_reach(fig1_reach_spec()), gen_bn(2, 2, 1, 4),
                                        gen_hamming(4, 1, 2), gen_grammar(8, 2)};
  for (const auto& b : benches) {
    Evaluator ev(b.program);
    OriginalDistribution src(b.program);
    auto universe = default_universe(b.program);
    for (const Term& goal : {b.query, b.evidence}) {
      for (std::uint64_t s = 0; s < 40; ++s) {
        Rng rng(s);
        auto r = ev.eval(goal, {}, src, rng);
        std::size_t mismatches = 0;
        for_each_world(b.program, universe, [&](const World& w, double) {
          for (std::size_t i = 0; i < universe.size(); ++i) {
            auto v = r.assignment.get(universe[i]);
            if (v && *v != w.values[i]) return;
          }
          mismatches += holds_in_world(b.program, goal, w) != r.success;
        });
        CHECK(mismatches == 0);
      }
    }
  }
}

TEST_CASE("pairs of outputs from the empty assignment are equal or exclusive") {
  for (const auto& b : testing::small_benchmarks()) {
    Evaluator ev(b.program);
    OriginalDistribution src(b.program);
    for (std::uint64_t k = 0; k < 500; ++k) {
      Rng r1(2 * k);
      Rng r2(2 * k + 1);
      auto x = ev.eval(b.evidence, {}, src, r1);
      auto y = ev.eval(b.evidence, {}, src, r2);
      CHECK((x.assignment == y.assignment || mutually_exclusive(x.assignment, y.assignment)));
    }
  }
}

TEST_CASE("every access is traced unless deduplicated") {
  Program p = parse_program("values(c,[t,f]). :- set_sw(c,[0.5,0.5]). p :- msw(c,V), msw(c,V).");
  OriginalDistribution src(p);
  Rng rng(3);
  auto full = sample_eval(p, parse_goal("p"), {}, src, rng);
  CHECK(full.success);
  CHECK(full.trace.size() == 2);
  CHECK(full.assignment.size() == 1);
  Rng rng2(3);
  auto dedup = sample_eval(p, parse_goal("p"), {}, src, rng2, {1'000'000, true});
  CHECK(dedup.trace.size() == 1);
}

TEST_CASE("sampled values are frozen across backtracking") {
  Program p = parse_program(
      "values(c,[t,f]). :- set_sw(c,[0.5,0.5]).\n"
      "p :- msw(c,t), fail.\n"
      "p :- msw(c,f).\n");
  OriginalDistribution src(p);
  int successes = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(s);
    auto r = sample_eval(p, parse_goal("p"), {}, src, rng);
    successes += r.success;
    CHECK(r.assignment.size() == 1);
    CHECK(r.success == (r.assignment.entries()[0].value == 1));
  }
  CHECK(successes > 50);
  CHECK(successes < 150);
}

TEST_CASE("instances are independent trials") {
  Program p = parse_program(
      "values(coin,[h,t]). :- set_sw(coin,[0.5,0.5]).\n"
      "two :- msw(coin,1,h), msw(coin,2,h).\n");
  OriginalDistribution src(p);
  int hits = 0;
  for (std::uint64_t s = 0; s < 20'000; ++s) {
    Rng rng(s);
    auto r = sample_eval(p, parse_goal("two"), {}, src, rng);
    hits += r.success;
  }
  CHECK(hits / 20'000.0 == doctest::Approx(0.25).epsilon(0.05));
  CHECK(exact_prob(p, parse_goal("two")) == doctest::Approx(0.25));
}

TEST_CASE("arithmetic and comparisons") {
  Program p = parse_program(
      "sum([], 0).\n"
      "sum([X|T], S) :- sum(T, S0), S is S0 + X.\n"
      "check :- sum([1,2,3,4], S), S =:= 10, S > 9, S >= 10, S < 11, S =< 10, S =\\= 3.\n"
      "ops :- X is 7 // 2, X = 3, Y is -7 mod 3, Y = 2, Z is max(2, abs(-5)), Z = 5,"
      " W is min(2, 3) * -1, W = -2.\n"
      "div :- X is 1 // 0, X = 0.\n");
  OriginalDistribution src(p);
  Rng rng(1);
  CHECK(sample_eval(p, parse_goal("check"), {}, src, rng).success);
  CHECK(sample_eval(p, parse_goal("ops"), {}, src, rng).success);
  CHECK_THROWS_AS(sample_eval(p, parse_goal("div"), {}, src, rng), EvalError);
}

TEST_CASE("evaluation errors") {
  Program p = parse_program(
      "values(r(_),[t,f]). :- set_sw(r(1),[0.5,0.5]).\n"
      "loop :- loop.\n"
      "unknown_switch :- msw(z, t).\n"
      "no_dist :- msw(r(2), t).\n"
      "calls_missing :- missing(1).\n"
      "nonground :- msw(r(_), t).\n");
  OriginalDistribution src(p);
  Rng rng(1);
  CHECK_THROWS_AS(sample_eval(p, parse_goal("loop"), {}, src, rng, {1000, false}), StepLimitExceeded);
  CHECK_THROWS_AS(sample_eval(p, parse_goal("unknown_switch"), {}, src, rng), EvalError);
  CHECK_THROWS_AS(sample_eval(p, parse_goal("no_dist"), {}, src, rng), EvalError);
  CHECK_THROWS_AS(sample_eval(p, parse_goal("calls_missing"), {}, src, rng), EvalError);
  CHECK_THROWS_AS(sample_eval(p, parse_goal("nonground"), {}, src, rng), EvalError);
  CHECK_THROWS_AS(sample_eval(p, parse_term("loop(X)"), {}, src, rng), EvalError);
}

TEST_CASE_FIXTURE(Fig1, "initial sample satisfies the evidence") {
  Evaluator ev(prog);
  Term goal = parse_goal("reach(a,e)");
  for (std::uint64_t s = 0; s < 300; ++s) {
    Rng rng(s);
    Assignment a = ev.initial_sample(goal, rng);
    bool path = (a.get(key("r(a,b)")) == kT && a.get(key("r(b,e)")) == kT) ||
                (a.get(key("r(a,c)")) == kT && a.get(key("r(c,e)")) == kT);
    CHECK(path);
    for (std::uint64_t d = 0; d < 5; ++d) {
      Rng draw(d);
      CHECK(ev.eval(goal, a, src, draw).success);
    }
  }
}

TEST_CASE_FIXTURE(Fig1, "initial sample edge cases") {
  Evaluator ev(prog);
  Rng rng(4);
  CHECK(ev.initial_sample(parse_goal("true"), rng).empty());
  CHECK(ev.initial_sample(parse_goal("edge(a,b)"), rng) == Assignment{{key("r(a,b)"), kT}});
  CHECK_THROWS_AS(ev.initial_sample(parse_goal("reach(d,a)"), rng), InferenceError);
}

TEST_CASE("initial sample handles evidence that needs a rare outcome") {
  auto b = gen_grammar(10, 2);
  Evaluator ev(b.program);
  OriginalDistribution src(b.program);
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(s);
    Assignment a = ev.initial_sample(b.evidence, rng);
    Rng draw(s);
    CHECK(ev.eval(b.evidence, a, src, draw).success);
  }
}
