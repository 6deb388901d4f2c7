#include "amcmc/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "amcmc/errors.hpp"
#include "amcmc/parse.hpp"
#include "amcmc/random.hpp"

namespace amcmc {
namespace {

/// Probability k/100 printed with two decimals.
std::string percent(int k) {
  std::ostringstream os;
  os << k / 100 << '.' << (k % 100 < 10 ? "0" : "") << k % 100;
  return os.str();
}

std::string shortest(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, end);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

/// Random CPT entry in [0.05, 0.95] on a 0.01 grid.
int random_percent(Rng& rng) { return 5 + static_cast<int>(rng.index(91)); }

BenchInstance finish(std::string family, std::string text, const std::string& query,
                     const std::string& evidence, std::uint64_t seed,
                     std::map<std::string, std::string> params) {
  BenchInstance b;
  b.family = std::move(family);
  b.text = std::move(text);
  b.program = parse_program(b.text);
  b.query = parse_goal(query);
  b.evidence = parse_goal(evidence);
  b.seed = seed;
  b.params = std::move(params);
  return b;
}

std::string conjunction(const std::vector<std::string>& goals) {
  std::string out;
  for (std::size_t i = 0; i < goals.size(); ++i) out += (i ? ", " : "") + goals[i];
  return out;
}

}  // namespace

BenchInstance gen_bn(int rows, int cols, int evidence_count, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw ProgramError("grid dimensions must be positive");
  int nodes = rows * cols;
  if (evidence_count < 0 || evidence_count >= nodes) {
    throw ProgramError("evidence count must leave at least one query node");
  }
  Rng rng(seed);
  std::ostringstream os;
  os << "% grid network " << rows << "x" << cols << ", seed " << seed << "\n";
  os << "values(bn(_,_,_,_), [t,f]).\n";
  const char* vals[] = {"t", "f"};
  for (int r = 1; r <= rows; ++r) {
    for (int c = 1; c <= cols; ++c) {
      std::vector<std::string> tops = r > 1 ? std::vector<std::string>{"t", "f"}
                                            : std::vector<std::string>{"n"};
      std::vector<std::string> lefts = c > 1 ? std::vector<std::string>{"t", "f"}
                                             : std::vector<std::string>{"n"};
      for (const auto& t : tops) {
        for (const auto& l : lefts) {
          int k = random_percent(rng);
          os << ":- set_sw(bn(" << r << "," << c << "," << t << "," << l << "), [" << percent(k)
             << "," << percent(100 - k) << "]).\n";
        }
      }
    }
  }
  for (int r = 1; r <= rows; ++r) {
    for (int c = 1; c <= cols; ++c) {
      os << "node(" << r << "," << c << ",V) :- ";
      std::string top = "n";
      std::string left = "n";
      if (r > 1) {
        os << "node(" << r - 1 << "," << c << ",T), ";
        top = "T";
      }
      if (c > 1) {
        os << "node(" << r << "," << c - 1 << ",L), ";
        left = "L";
      }
      os << "msw(bn(" << r << "," << c << "," << top << "," << left << "),V).\n";
    }
  }

  std::vector<int> order(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(std::span<int>(order));
  int q = order[0];
  std::vector<int> ev(order.begin() + 1, order.begin() + 1 + evidence_count);
  std::sort(ev.begin(), ev.end());
  std::vector<std::string> goals;
  for (int n : ev) {
    goals.push_back("node(" + std::to_string(n / cols + 1) + "," + std::to_string(n % cols + 1) +
                    "," + vals[rng.index(2)] + ")");
  }
  std::string evidence = "true";
  if (!goals.empty()) {
    os << "evidence :- " << conjunction(goals) << ".\n";
    evidence = "evidence";
  }
  std::string query =
      "node(" + std::to_string(q / cols + 1) + "," + std::to_string(q % cols + 1) + ",t)";
  return finish("bn", os.str(), query, evidence, seed,
                {{"rows", std::to_string(rows)},
                 {"cols", std::to_string(cols)},
                 {"evidence_count", std::to_string(evidence_count)}});
}

BenchInstance gen_hamming(int data_bits, int evidence_count, std::uint64_t seed) {
  if (data_bits < 1) throw ProgramError("a Hamming code needs at least one data bit");
  auto is_pow2 = [](int x) { return (x & (x - 1)) == 0; };
  int n = 0;
  for (int data = 0; data < data_bits;) {
    ++n;
    if (!is_pow2(n)) ++data;
  }
  if (evidence_count < 0 || evidence_count >= n) {
    throw ProgramError("evidence count must leave at least one query position");
  }
  Rng rng(seed);
  std::ostringstream os;
  os << "% Hamming code, " << data_bits << " data bits, " << n - data_bits << " parity bits\n";
  os << "values(bit(_), [0,1]).\n";
  for (int i = 1; i <= data_bits; ++i) os << ":- set_sw(bit(" << i << "), [0.5,0.5]).\n";
  os << "xor(0,0,0).\nxor(0,1,1).\nxor(1,0,1).\nxor(1,1,0).\n";

  std::vector<int> word(static_cast<std::size_t>(n + 1), 0);
  int data_index = 0;
  for (int p = 1; p <= n; ++p) {
    if (is_pow2(p)) continue;
    ++data_index;
    word[static_cast<std::size_t>(p)] = static_cast<int>(rng.index(2));
    os << "code(" << p << ",V) :- msw(bit(" << data_index << "),V).\n";
  }
  for (int p = 1; p <= n; p <<= 1) {
    std::vector<int> covered;
    for (int q = 1; q <= n; ++q) {
      if (q != p && (q & p)) covered.push_back(q);
    }
    int parity = 0;
    for (int q : covered) parity ^= word[static_cast<std::size_t>(q)];
    word[static_cast<std::size_t>(p)] = parity;
    os << "code(" << p << ",V) :- ";
    if (covered.size() == 1) {
      os << "code(" << covered[0] << ",V).\n";
      continue;
    }
    for (std::size_t i = 0; i < covered.size(); ++i) os << "code(" << covered[i] << ",A" << i << "), ";
    std::string acc = "A0";
    for (std::size_t i = 1; i < covered.size(); ++i) {
      std::string out = i + 1 == covered.size() ? "V" : "X" + std::to_string(i);
      os << "xor(" << acc << ",A" << i << "," << out << ")" << (i + 1 == covered.size() ? ".\n" : ", ");
      acc = out;
    }
  }

  std::vector<int> positions(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) positions[static_cast<std::size_t>(i)] = i + 1;
  rng.shuffle(std::span<int>(positions));
  int q = positions[0];
  std::vector<int> ev(positions.begin() + 1, positions.begin() + 1 + evidence_count);
  std::sort(ev.begin(), ev.end());
  std::vector<std::string> goals;
  for (int p : ev) {
    goals.push_back("code(" + std::to_string(p) + "," +
                    std::to_string(word[static_cast<std::size_t>(p)]) + ")");
  }
  std::string evidence = "true";
  if (!goals.empty()) {
    os << "evidence :- " << conjunction(goals) << ".\n";
    evidence = "evidence";
  }
  return finish("hamming", os.str(), "code(" + std::to_string(q) + ",1)", evidence, seed,
                {{"data_bits", std::to_string(data_bits)},
                 {"evidence_count", std::to_string(evidence_count)}});
}

BenchInstance gen_grammar(int length, int level) {
  if (length < 1) throw ProgramError("string length must be positive");
  std::ostringstream os;
  os << "% strings of " << length << " characters over {o,c}\n";
  os << "values(ch(_), [o,c]).\n";
  for (int i = 1; i <= length; ++i) os << ":- set_sw(ch(" << i << "), [0.5,0.5]).\n";
  os << "chars(I, []) :- I > " << length << ".\n"
     << "chars(I, [C|T]) :- I =< " << length << ", msw(ch(I), C), J is I + 1, chars(J, T).\n"
     << "balanced :- chars(1, S), bal(S, 0).\n"
     << "bal([], 0).\n"
     << "bal([o|T], D) :- D1 is D + 1, bal(T, D1).\n"
     << "bal([c|T], D) :- D > 0, D1 is D - 1, bal(T, D1).\n"
     << "deep :- chars(1, S), maxdepth(S, 0, 0, M), M >= " << level << ".\n"
     << "maxdepth([], _, M, M).\n"
     << "maxdepth([o|T], D, M0, M) :- D1 is D + 1, M1 is max(M0, D1), maxdepth(T, D1, M1, M).\n"
     << "maxdepth([c|T], D, M0, M) :- D1 is max(0, D - 1), maxdepth(T, D1, M0, M).\n";
  return finish("grammar", os.str(), "deep", "balanced", 0,
                {{"length", std::to_string(length)}, {"level", std::to_string(level)}});
}

BenchInstance gen_reach(const ReachSpec& spec, std::uint64_t seed) {
  if (spec.edges.empty()) throw ProgramError("reachability graph has no edges");
  std::ostringstream os;
  for (const auto& e : spec.edges) os << "poss_edge(" << e.from << "," << e.to << ").\n";
  os << "values(r(_,_), [t,f]).\n";
  for (const auto& e : spec.edges) {
    double rest = std::round((1.0 - e.prob) * 1e12) / 1e12;
    os << ":- set_sw(r(" << e.from << "," << e.to << "), [" << shortest(e.prob) << ","
       << shortest(rest) << "]).\n";
  }
  os << "edge(X,Y) :- poss_edge(X,Y), msw(r(X,Y),t).\n"
     << "reach(X,Y) :- edge(X,Y).\n"
     << "reach(X,Y) :- edge(X,Z), reach(Z,Y).\n";
  std::string query = "reach(" + spec.query_from + "," + spec.query_to + ")";
  std::string evidence = spec.evidence_from.empty()
                             ? "true"
                             : "reach(" + spec.evidence_from + "," + spec.evidence_to + ")";
  return finish("reach", os.str(), query, evidence, seed,
                {{"edges", std::to_string(spec.edges.size())}});
}

ReachSpec fig1_reach_spec() {
  ReachSpec s;
  s.edges = {{"a", "b", 0.9}, {"a", "c", 0.2}, {"b", "d", 0.8},
             {"b", "e", 0.01}, {"c", "d", 0.7}, {"c", "e", 0.1}};
  s.query_from = "a";
  s.query_to = "d";
  s.evidence_from = "a";
  s.evidence_to = "e";
  return s;
}

std::string fig1_program_text() { return gen_reach(fig1_reach_spec()).text; }

ReachSpec random_dag_spec(int vertices, int max_edges, std::uint64_t seed) {
  if (vertices < 2 || max_edges < 1) throw ProgramError("graph needs two vertices and an edge");
  Rng rng(seed);
  std::vector<std::pair<int, int>> candidates;
  for (int i = 0; i < vertices; ++i) {
    for (int j = i + 1; j < vertices; ++j) candidates.emplace_back(i, j);
  }
  rng.shuffle(std::span<std::pair<int, int>>(candidates));
  std::size_t m = std::min(candidates.size(), static_cast<std::size_t>(max_edges));
  std::vector<std::pair<int, int>> chosen(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(m));
  bool from_source = std::any_of(chosen.begin(), chosen.end(), [](auto e) { return e.first == 0; });
  if (!from_source) chosen.back() = {0, 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(vertices - 1)))};
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());

  std::set<int> reachable;
  std::vector<int> frontier{0};
  while (!frontier.empty()) {
    int v = frontier.back();
    frontier.pop_back();
    for (auto [a, b] : chosen) {
      if (a == v && reachable.insert(b).second) frontier.push_back(b);
    }
  }
  std::vector<int> targets(reachable.begin(), reachable.end());
  auto name = [](int v) { return "v" + std::to_string(v); };

  ReachSpec s;
  for (auto [a, b] : chosen) s.edges.push_back({name(a), name(b), random_percent(rng) / 100.0});
  int e = targets[rng.index(targets.size())];
  int q = targets[rng.index(targets.size())];
  if (targets.size() > 1) {
    while (q == e) q = targets[rng.index(targets.size())];
  }
  s.evidence_from = name(0);
  s.evidence_to = name(e);
  s.query_from = name(0);
  s.query_to = name(q);
  return s;
}

std::string bench_manifest(const BenchInstance& b, const std::string& program_path) {
  std::ostringstream os;
  os << "family=" << b.family << "\n"
     << "seed=" << b.seed << "\n"
     << "program=" << program_path << "\n"
     << "query=" << to_string(b.query) << "\n"
     << "evidence=" << to_string(b.evidence) << "\n"
     << "switches=" << b.switch_count() << "\n";
  for (const auto& [k, v] : b.params) os << "param." << k << "=" << v << "\n";
  return os.str();
}

}  // namespace amcmc
