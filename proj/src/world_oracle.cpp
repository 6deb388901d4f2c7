#include <unordered_map>

#include "amcmc/errors.hpp"
#include "amcmc/oracle.hpp"
#include "amcmc/unify.hpp"

namespace amcmc {
namespace {

/// Plain backtracking interpreter over Terms. Looks for any derivation;
/// msw literals read the fixed world.
class WorldSolver {
 public:
  WorldSolver(const Program& prog, const World& world, std::size_t step_limit)
      : prog_(prog), limit_(step_limit) {
    for (std::size_t i = 0; i < world.universe.size(); ++i) {
      lookup_.emplace(world.universe[i], world.values[i]);
    }
  }

  bool prove(const Term& goal) {
    next_var_ = var_bound(goal);
    return solve({goal});
  }

 private:
  bool solve(std::vector<Term> goals) {
    if (goals.empty()) return true;
    if (++steps_ > limit_) throw StepLimitExceeded(limit_);
    Term g = theta_.walk(goals.back());
    goals.pop_back();

    if (g.is_functor("true", 0)) return solve(std::move(goals));
    if (g.is_functor("fail", 0) || g.is_functor("false", 0)) return false;
    if (g.is_functor(",", 2)) {
      goals.push_back(g.arg(1));
      goals.push_back(g.arg(0));
      return solve(std::move(goals));
    }
    if (g.is_functor("=", 2)) return unify_then(g.arg(0), g.arg(1), std::move(goals));
    if (g.is_functor("is", 2)) {
      return unify_then(g.arg(0), Term::integer(arith(g.arg(1))), std::move(goals));
    }
    if (g.arity() == 2 && is_comparison(g.name().name())) {
      if (!compare(g.name().name(), arith(g.arg(0)), arith(g.arg(1)))) return false;
      return solve(std::move(goals));
    }
    if (g.is_functor("msw", 3) || g.is_functor("msw", 2)) {
      bool three = g.arity() == 3;
      Term name = theta_.resolve(g.arg(0));
      Term inst = three ? theta_.resolve(g.arg(1)) : Term::integer(0);
      if (!name.is_ground() || !inst.is_ground()) throw EvalError("msw switch is not ground");
      SwitchInstance k;
      try {
        k = make_instance(prog_, name, inst);
      } catch (const ProgramError& e) {
        throw EvalError(e.what());
      }
      auto it = lookup_.find(k);
      if (it == lookup_.end()) {
        throw EvalError("switch instance " + to_string(name) + "/" + to_string(inst) +
                        " is outside the enumerated universe");
      }
      return unify_then(g.arg(three ? 2 : 1), prog_.outcomes(k.sw)[it->second], std::move(goals));
    }
    if (!g.is_callable()) throw EvalError("goal " + to_string(g) + " is not callable");

    auto clauses = prog_.clauses_for(g.name().name(), g.arity());
    if (clauses.empty()) {
      throw EvalError("unknown predicate " + std::string(g.name().name()) + "/" +
                      std::to_string(g.arity()));
    }
    for (const Clause* c : clauses) {
      VarId offset = next_var_;
      VarId width = var_bound(c->head);
      for (const auto& b : c->body) width = std::max(width, var_bound(b));
      next_var_ += width;
      auto mark = theta_.mark();
      if (unify_into(offset_vars(c->head, offset), g, theta_)) {
        std::vector<Term> next = goals;
        for (auto it = c->body.rbegin(); it != c->body.rend(); ++it) {
          next.push_back(offset_vars(*it, offset));
        }
        if (solve(std::move(next))) return true;
      }
      theta_.undo(mark);
    }
    return false;
  }

  bool unify_then(const Term& a, const Term& b, std::vector<Term> goals) {
    auto mark = theta_.mark();
    if (unify_into(a, b, theta_) && solve(std::move(goals))) return true;
    theta_.undo(mark);
    return false;
  }

  static bool is_comparison(std::string_view op) {
    return op == "<" || op == ">" || op == "=<" || op == ">=" || op == "=:=" || op == "=\\=";
  }

  static bool compare(std::string_view op, std::int64_t a, std::int64_t b) {
    if (op == "<") return a < b;
    if (op == ">") return a > b;
    if (op == "=<") return a <= b;
    if (op == ">=") return a >= b;
    if (op == "=:=") return a == b;
    return a != b;
  }

  std::int64_t arith(const Term& t0) {
    Term t = theta_.walk(t0);
    if (t.is_int()) return t.int_value();
    if (t.is_var()) throw EvalError("arithmetic on an unbound variable");
    if (!t.is_compound()) throw EvalError("cannot evaluate " + to_string(t));
    auto op = t.name().name();
    if (t.arity() == 1) {
      std::int64_t x = arith(t.arg(0));
      if (op == "-") return -x;
      if (op == "abs") return x < 0 ? -x : x;
    }
    if (t.arity() == 2) {
      std::int64_t x = arith(t.arg(0));
      std::int64_t y = arith(t.arg(1));
      if (op == "+") return x + y;
      if (op == "-") return x - y;
      if (op == "*") return x * y;
      if (op == "min") return x < y ? x : y;
      if (op == "max") return x < y ? y : x;
      if (op == "//") {
        if (y == 0) throw EvalError("integer division by zero");
        return x / y;
      }
      if (op == "mod") {
        if (y == 0) throw EvalError("integer division by zero");
        std::int64_t m = x % y;
        if (m != 0 && ((m < 0) != (y < 0))) m += y;
        return m;
      }
    }
    throw EvalError("unknown arithmetic function " + std::string(op));
  }

  const Program& prog_;
  std::unordered_map<SwitchInstance, Outcome, SwitchInstanceHash> lookup_;
  Substitution theta_;
  VarId next_var_ = 0;
  std::size_t limit_;
  std::size_t steps_ = 0;
};

}  // namespace

std::vector<SwitchInstance> default_universe(const Program& prog) {
  std::vector<SwitchInstance> out;
  for (SwitchId id = 0; id < prog.switches().size(); ++id) {
    out.push_back({id, {InstanceKey::Kind::Int, 0}});
  }
  return out;
}

void for_each_world(const Program& prog, const std::vector<SwitchInstance>& universe,
                    const std::function<void(const World&, double)>& f,
                    std::size_t world_limit) {
  std::vector<std::vector<Outcome>> support;
  double count = 1.0;
  for (const auto& k : universe) {
    std::vector<Outcome> s;
    auto probs = prog.probs(k.sw);
    for (Outcome v = 0; v < probs.size(); ++v) {
      if (probs[v] > 0.0) s.push_back(v);
    }
    count *= static_cast<double>(s.size());
    support.push_back(std::move(s));
  }
  if (count > static_cast<double>(world_limit)) {
    throw InferenceError("world enumeration would visit " + std::to_string(count) +
                         " worlds, above the limit of " + std::to_string(world_limit));
  }
  World w{universe, std::vector<Outcome>(universe.size())};
  std::vector<std::size_t> digit(universe.size(), 0);
  for (;;) {
    double p = 1.0;
    for (std::size_t i = 0; i < universe.size(); ++i) {
      w.values[i] = support[i][digit[i]];
      p *= prog.probs(universe[i].sw)[w.values[i]];
    }
    f(w, p);
    std::size_t i = 0;
    while (i < digit.size() && ++digit[i] == support[i].size()) digit[i++] = 0;
    if (i == digit.size()) return;
  }
}

bool holds_in_world(const Program& prog, const Term& goal, const World& world,
                    std::size_t step_limit) {
  WorldSolver solver(prog, world, step_limit);
  return solver.prove(goal);
}

ExactResult world_conditional(const Program& prog, const Term& query, const Term& evidence,
                              const std::vector<SwitchInstance>& universe) {
  ExactSum pq;
  ExactSum pe;
  ExactSum pj;
  ExactResult res;
  for_each_world(prog, universe, [&](const World& w, double p) {
    ++res.leaf_count;
    bool q = holds_in_world(prog, query, w);
    bool e = holds_in_world(prog, evidence, w);
    if (q) pq.add(p);
    if (e) pe.add(p);
    if (q && e) pj.add(p);
  });
  res.p_query = pq.value();
  res.p_evidence = pe.value();
  res.p_joint = pj.value();
  if (res.p_evidence <= 0.0) {
    throw InferenceError("evidence " + to_string(evidence) + " is unsatisfiable");
  }
  res.p_conditional = res.p_joint / res.p_evidence;
  return res;
}

ExactResult world_conditional(const Program& prog, const Term& query, const Term& evidence) {
  return world_conditional(prog, query, evidence, default_universe(prog));
}

double world_prob(const Program& prog, const Term& goal) {
  return world_conditional(prog, goal, Term::atom("true")).p_query;
}

}  // namespace amcmc
