#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "amcmc/program.hpp"
#include "amcmc/term.hpp"

namespace amcmc {

/// A generated benchmark: program text, the parsed program and a
/// conditional query over it.
struct BenchInstance {
  std::string family;
  std::string text;
  Program program;
  Term query;
  Term evidence;
  std::uint64_t seed = 0;
  /// Generator parameters, recorded in the genbench manifest.
  std::map<std::string, std::string> params;

  std::size_t switch_count() const { return program.switches().size(); }
};

/// Boolean grid network; node (r,c) has its top and left neighbours as
/// parents. One switch bn(R,C,Top,Left) per node and parent valuation,
/// with `n` for a missing parent. CPTs are drawn from `seed`.
BenchInstance gen_bn(int rows, int cols, int evidence_count, std::uint64_t seed);

/// Hamming code over `data_bits` fair data bits with computed parity bits.
/// Evidence fixes `evidence_count` positions of a random codeword; the
/// query asks whether another position is 1.
BenchInstance gen_hamming(int data_bits, int evidence_count = 0, std::uint64_t seed = 0);

/// Strings of `length` fair characters over {o, c}. Evidence: the string
/// is balanced. Query: its maximum nesting depth is at least `level`.
BenchInstance gen_grammar(int length, int level);

struct ReachEdge {
  std::string from;
  std::string to;
  double prob = 0.5;
};

struct ReachSpec {
  std::vector<ReachEdge> edges;
  std::string query_from, query_to;
  /// Empty evidence endpoints mean no evidence.
  std::string evidence_from, evidence_to;
};

/// Probabilistic reachability over an acyclic graph.
BenchInstance gen_reach(const ReachSpec& spec, std::uint64_t seed = 0);

/// The six-edge example graph with query reach(a,d) and evidence reach(a,e).
ReachSpec fig1_reach_spec();

/// Random DAG over v0..v(n-1) with at most `max_edges` edges, evidence and
/// query both reachability from v0 to vertices reachable in the full graph.
ReachSpec random_dag_spec(int vertices, int max_edges, std::uint64_t seed);

/// Text of the example reachability program (no query or evidence).
std::string fig1_program_text();

/// key=value lines: family, seed, query, evidence, switches and params.
std::string bench_manifest(const BenchInstance& b, const std::string& program_path);

}  // namespace amcmc
