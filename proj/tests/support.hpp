#pragma once

#include <string>
#include <vector>

#include "amcmc/bench.hpp"
#include "amcmc/parse.hpp"

namespace amcmc::testing {

/// Generated instances small enough for full world enumeration
/// (at most 12 switch instances), covering every family.
inline std::vector<BenchInstance> small_benchmarks() {
  std::vector<BenchInstance> out;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    out.push_back(gen_bn(2, 2, 1, seed));
    out.push_back(gen_bn(1, 3, 2, seed + 10));
  }
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    out.push_back(gen_hamming(4, static_cast<int>(seed % 3), seed));
  }
  out.push_back(gen_grammar(4, 2));
  out.push_back(gen_grammar(6, 2));
  out.push_back(gen_grammar(8, 3));
  out.push_back(gen_grammar(10, 2));
  out.push_back(gen_grammar(12, 3));
  out.push_back(gen_reach(fig1_reach_spec()));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    out.push_back(gen_reach(random_dag_spec(7, 11, seed), seed));
  }
  return out;
}

/// Ten independent boolean switches, evidence fixes the prefix x1..x5 to t.
inline const char* chain10_text() {
  return R"(values(x(_), [t, f]).
:- set_sw(x(1), [0.6, 0.4]).
:- set_sw(x(2), [0.3, 0.7]).
:- set_sw(x(3), [0.5, 0.5]).
:- set_sw(x(4), [0.2, 0.8]).
:- set_sw(x(5), [0.7, 0.3]).
:- set_sw(x(6), [0.4, 0.6]).
:- set_sw(x(7), [0.35, 0.65]).
:- set_sw(x(8), [0.9, 0.1]).
:- set_sw(x(9), [0.25, 0.75]).
:- set_sw(x(10), [0.55, 0.45]).
prefix(N, N).
prefix(I, N) :- I < N, J is I + 1, msw(x(J), t), prefix(J, N).
evidence :- prefix(0, 5).
query :- msw(x(3), t), msw(x(6), A), msw(x(7), B), either(A, B).
query :- msw(x(9), t), msw(x(10), t).
either(t, _).
either(f, t).
)";
}

}  // namespace amcmc::testing
