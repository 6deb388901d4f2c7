#pragma once

// Heap-based resolution engine shared by the sampling evaluator, the
// randomized initial-state search and the evaluation-tree oracle.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "amcmc/program.hpp"
#include "amcmc/random.hpp"
#include "amcmc/worlds.hpp"
#include "program_impl.hpp"

namespace amcmc::detail {

/// Resolves msw literals in sampling mode.
class MswPolicy {
 public:
  virtual ~MswPolicy() = default;
  virtual Outcome pick(const SwitchInstance& k) = 0;
};

class Machine {
 public:
  explicit Machine(Program prog);

  void set_step_limit(std::size_t limit) { limit_ = limit; }
  std::size_t steps() const { return steps_; }

  /// Depth-first, left-to-right, textual clause order; stops at the first
  /// derivation. Switch outcomes come from `policy` and are never revisited.
  bool run_sample(const Term& goal, MswPolicy& policy);

  /// Backtracking search for one derivation with clause and outcome order
  /// shuffled at each choice point. Outcome choices are undone on
  /// backtracking; on success `assignment` holds the chosen outcomes.
  bool run_search(const Term& goal, Rng& rng, Assignment& assignment);

 private:
  enum class Builtin : std::uint8_t {
    None, True, Fail, Conj, Unify, Is, Lt, Gt, Le, Ge, Eq, Ne, Msw2, Msw3
  };
  struct PredEntry {
    Builtin builtin = Builtin::None;
    const std::vector<std::uint32_t>* clauses = nullptr;
  };
  struct GoalNode {
    Cell goal;
    std::int32_t next;
  };
  enum class CpKind : std::uint8_t { Clause, Msw };
  struct ChoicePoint {
    CpKind kind;
    bool in_arena;
    Cell goal;  // the call, or the outcome argument for Msw
    std::int32_t cont;
    std::uint32_t heap_top, trail_top, goals_top;
    const std::vector<std::uint32_t>* list;
    std::uint32_t alt_begin, alt_count, alt_pos;
    SwitchInstance key;
    std::uint32_t assign_mark;
  };

  void reset();
  bool solve(Cell goal);
  bool step(Cell goal, std::int32_t cont);
  bool backtrack();
  void restore(const ChoicePoint& cp);

  bool call_user(Cell goal, const std::vector<std::uint32_t>& list, std::int32_t cont);
  std::uint32_t next_match(const std::vector<std::uint32_t>& list, std::uint32_t from,
                           std::uint32_t args_at, std::uint32_t arity) const;
  bool clause_matches(const CompiledClause& cc, std::uint32_t args_at, std::uint32_t arity) const;
  bool try_clause(std::uint32_t ci, std::uint32_t args_at, std::uint32_t arity,
                  std::int32_t cont);
  bool unify_head(const CompiledClause& cc, Cell c, Cell h);
  Cell build(const CompiledClause& cc, Cell c);

  bool msw(Cell sw, Cell inst, Cell value, std::int32_t cont);
  Cell outcome_cell(SwitchId sw, Outcome v);

  Cell deref(Cell c) const;
  void bind(std::uint32_t var, Cell value);
  bool occurs(std::uint32_t var, Cell t) const;
  bool unify(Cell a, Cell b);
  std::int64_t eval(Cell c) const;

  Cell put_term(const Term& t);
  Term get_term(Cell c) const;
  std::int32_t push_goal(Cell goal, std::int32_t next);

  Program prog_;
  const ProgramImpl* impl_;
  std::unordered_map<std::uint64_t, PredEntry> preds_;

  std::vector<Cell> heap_;
  std::vector<std::uint32_t> trail_;
  std::vector<GoalNode> goals_;
  std::vector<ChoicePoint> cps_;
  std::vector<std::uint32_t> arena_;
  std::vector<Cell> locals_;
  std::vector<std::pair<Cell, Cell>> ustack_;
  GroundKey key_scratch_;
  std::int32_t cur_ = -1;

  std::size_t limit_ = 1'000'000;
  std::size_t steps_ = 0;

  bool search_ = false;
  MswPolicy* policy_ = nullptr;
  Rng* rng_ = nullptr;
  Assignment* assignment_ = nullptr;
};

}  // namespace amcmc::detail
