#include "amcmc/bench.hpp"
#include "amcmc/oracle.hpp"
#include "amcmc/parse.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace amcmc;

TEST_CASE("generated programs round-trip through the parser") {
  std::vector<BenchInstance> all = testing::small_benchmarks();
  all.push_back(gen_bn(6, 6, 6, 3));
  all.push_back(gen_hamming(16, 4, 3));
  all.push_back(gen_grammar(200, 3));
  all.push_back(gen_reach(random_dag_spec(40, 90, 3), 3));
  for (const auto& b : all) {
    Program again = parse_program(b.text);
    CHECK(again == b.program);
    CHECK(parse_program(to_string(again)) == again);
    CHECK(b.query.is_ground());
    CHECK(b.evidence.is_ground());
  }
}

TEST_CASE("generators are deterministic in their seed") {
  CHECK(gen_bn(3, 3, 2, 5).text == gen_bn(3, 3, 2, 5).text);
  CHECK(gen_bn(3, 3, 2, 5).text != gen_bn(3, 3, 2, 6).text);
  CHECK(gen_hamming(8, 3, 1).text == gen_hamming(8, 3, 1).text);
  CHECK(gen_reach(random_dag_spec(9, 14, 2)).text == gen_reach(random_dag_spec(9, 14, 2)).text);
}

TEST_CASE("bn grid shape") {
  auto b = gen_bn(2, 2, 1, 7);
  CHECK(b.family == "bn");
  CHECK(b.program.clauses_for("node", 3).size() == 4);
  // root 1, two single-parent nodes with 2 valuations, one two-parent node with 4
  CHECK(b.switch_count() == 9);
  auto tree = exact_conditional(b.program, b.query, b.evidence);
  auto world = world_conditional(b.program, b.query, b.evidence);
  CHECK(std::abs(tree.p_conditional - world.p_conditional) <= 1e-12);
  CHECK(gen_bn(6, 6, 6, 1).program.clauses_for("node", 3).size() == 36);
}

TEST_CASE("single-node bn: query probability is the prior") {
  auto b = gen_bn(1, 1, 0, 11);
  REQUIRE(b.switch_count() == 1);
  CHECK(b.evidence == Term::atom("true"));
  auto value = *b.program.outcome_index(0, b.query.arg(2));
  CHECK(exact_prob(b.program, b.query) == doctest::Approx(b.program.probs(0)[value]));
  double p = b.program.probs(0)[0];
  CHECK(p >= 0.05);
  CHECK(p <= 0.95);
}

TEST_CASE("hamming code") {
  auto b = gen_hamming(4, 0, 1);
  CHECK(b.switch_count() == 4);
  CHECK(b.evidence == Term::atom("true"));
  CHECK(exact_prob(b.program, b.query) == doctest::Approx(0.5).epsilon(1e-15));

  // Parity bits of the all-zero word are zero.
  CHECK(exact_conditional(b.program, parse_goal("code(1,0), code(2,0), code(4,0)"),
                          parse_goal("code(3,0), code(5,0), code(6,0), code(7,0)"))
            .p_conditional == doctest::Approx(1.0).epsilon(1e-15));

  // Every codeword has syndrome zero: parity 1 covers positions 1,3,5,7.
  Program with_check = parse_program(
      b.text + "syndrome :- code(1,A), code(3,B), code(5,C), code(7,D),"
               " xor(A,B,X), xor(X,C,Y), xor(Y,D,0).\n");
  CHECK(exact_prob(with_check, parse_goal("syndrome")) == 1.0);

  auto ev = gen_hamming(4, 2, 1);
  auto tree = exact_conditional(ev.program, ev.query, ev.evidence);
  auto world = world_conditional(ev.program, ev.query, ev.evidence);
  CHECK(std::abs(tree.p_conditional - world.p_conditional) <= 1e-12);
}

namespace {

// Strings over {o,c} enumerated directly.
double grammar_truth(int length, int level) {
  double balanced = 0.0;
  double deep = 0.0;
  for (unsigned mask = 0; mask < (1u << length); ++mask) {
    int depth = 0;
    int max_depth = 0;
    bool ok = true;
    for (int i = 0; i < length; ++i) {
      depth += (mask >> i & 1) ? 1 : -1;
      if (depth < 0) ok = false;
      max_depth = std::max(max_depth, depth);
    }
    if (!ok || depth != 0) continue;
    balanced += 1.0;
    if (max_depth >= level) deep += 1.0;
  }
  return deep / balanced;
}

}  // namespace

TEST_CASE("grammar family") {
  auto one = gen_grammar(4, 1);
  CHECK(exact_conditional(one.program, one.query, one.evidence).p_conditional ==
        doctest::Approx(1.0).epsilon(1e-15));
  for (auto [len, level] : {std::pair{4, 2}, std::pair{8, 3}, std::pair{10, 2}, std::pair{12, 4}}) {
    auto g = gen_grammar(len, level);
    CHECK(g.switch_count() == static_cast<std::size_t>(len));
    double truth = grammar_truth(len, level);
    CHECK(exact_conditional(g.program, g.query, g.evidence).p_conditional ==
          doctest::Approx(truth).epsilon(1e-12));
    CHECK(world_conditional(g.program, g.query, g.evidence).p_conditional ==
          doctest::Approx(truth).epsilon(1e-12));
  }
  CHECK(grammar_truth(4, 2) == 0.5);
}

TEST_CASE("reach family reproduces the example graph") {
  auto b = gen_reach(fig1_reach_spec());
  CHECK(b.program == parse_program(fig1_program_text()));
  CHECK(b.query == parse_goal("reach(a,d)"));
  CHECK(b.evidence == parse_goal("reach(a,e)"));
  CHECK(b.program == parse_program(R"(
    poss_edge(a,b). poss_edge(a,c). poss_edge(b,d). poss_edge(b,e). poss_edge(c,d). poss_edge(c,e).
    values(r(_,_),[t,f]).
    :- set_sw(r(a,b),[0.9,0.1]). :- set_sw(r(a,c),[0.2,0.8]). :- set_sw(r(b,d),[0.8,0.2]).
    :- set_sw(r(b,e),[0.01,0.99]). :- set_sw(r(c,d),[0.7,0.3]). :- set_sw(r(c,e),[0.1,0.9]).
    edge(X,Y) :- poss_edge(X,Y), msw(r(X,Y),t).
    reach(X,Y) :- edge(X,Y).
    reach(X,Y) :- edge(X,Z), reach(Z,Y).
  )"));
}

TEST_CASE("single-edge reachability") {
  ReachSpec spec;
  spec.edges = {{"u", "v", 0.37}};
  spec.query_from = "u";
  spec.query_to = "v";
  auto b = gen_reach(spec);
  CHECK(b.evidence == Term::atom("true"));
  CHECK(exact_prob(b.program, b.query) == doctest::Approx(0.37).epsilon(1e-15));
}

TEST_CASE("random DAGs are acyclic and oracle-checkable") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto spec = random_dag_spec(10, 12, seed);
    CHECK(spec.edges.size() <= 12);
    for (const auto& e : spec.edges) {
      CHECK(std::stoi(e.from.substr(1)) < std::stoi(e.to.substr(1)));
    }
    auto b = gen_reach(spec, seed);
    auto tree = exact_conditional(b.program, b.query, b.evidence);
    auto world = world_conditional(b.program, b.query, b.evidence);
    CHECK(tree.p_evidence > 0.0);
    CHECK(std::abs(tree.p_conditional - world.p_conditional) <= 1e-12);
  }
}

TEST_CASE("manifest lists the instance") {
  auto b = gen_bn(2, 2, 1, 4);
  std::string m = bench_manifest(b, "grid.plp");
  CHECK(m.find("family=bn\n") != std::string::npos);
  CHECK(m.find("seed=4\n") != std::string::npos);
  CHECK(m.find("program=grid.plp\n") != std::string::npos);
  CHECK(m.find("query=" + to_string(b.query) + "\n") != std::string::npos);
  CHECK(m.find("evidence=" + to_string(b.evidence) + "\n") != std::string::npos);
  CHECK(m.find("switches=9\n") != std::string::npos);
  CHECK(m.find("param.rows=2\n") != std::string::npos);
}
