#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "amcmc/program.hpp"
#include "amcmc/term.hpp"
#include "amcmc/worlds.hpp"

namespace amcmc {

inline constexpr std::size_t kDefaultBranchLimit = 1'000'000;

struct ExactResult {
  double p_query = 0.0;
  double p_evidence = 0.0;
  double p_joint = 0.0;
  double p_conditional = 0.0;
  /// Leaves of the evidence tree plus the query subtrees below its
  /// successful leaves.
  std::size_t leaf_count = 0;
};

struct Leaf {
  bool success = false;
  Assignment assignment;
};

/// Every leaf of the evaluation tree of `goal` below `base`: the sampling
/// evaluator re-run with every possible outcome at each fresh switch
/// instance. Leaf assignments contain only the entries the evaluation
/// touched. Throws InferenceError once more than `branch_limit`
/// evaluations would be needed.
std::vector<Leaf> enumerate_leaves(const Program& prog, const Term& goal,
                                   const Assignment& base = {},
                                   std::size_t branch_limit = kDefaultBranchLimit,
                                   std::size_t step_limit = 1'000'000);

/// Sum of prob(leaf) over successful leaves of the evaluation tree.
double exact_prob(const Program& prog, const Term& goal,
                  std::size_t branch_limit = kDefaultBranchLimit);
/// Sum of prob(leaf) over failed leaves.
double exact_prob_failure(const Program& prog, const Term& goal,
                          std::size_t branch_limit = kDefaultBranchLimit);

/// Exact P(query | evidence) by exploring the evidence tree and, below
/// each successful evidence leaf, the query tree. Throws InferenceError if
/// the evidence has probability 0.
ExactResult exact_conditional(const Program& prog, const Term& query, const Term& evidence,
                              std::size_t branch_limit = kDefaultBranchLimit);

/// Compensated (Neumaier) sum.
class ExactSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Second, independent oracle: enumerate complete worlds and decide goals
// by a plain backtracking interpreter in each world.

/// A complete world over a fixed universe of switch instances.
struct World {
  std::vector<SwitchInstance> universe;
  std::vector<Outcome> values;
};

/// Every distribution at instance 0.
std::vector<SwitchInstance> default_universe(const Program& prog);

/// Calls f(world, probability) for each world of the universe, skipping
/// outcomes of probability 0. Throws InferenceError above `world_limit`.
void for_each_world(const Program& prog, const std::vector<SwitchInstance>& universe,
                    const std::function<void(const World&, double)>& f,
                    std::size_t world_limit = 1u << 20);

/// Whether `goal` has a derivation in `world`. Throws EvalError if the
/// derivation consults a switch instance outside the world's universe.
bool holds_in_world(const Program& prog, const Term& goal, const World& world,
                    std::size_t step_limit = 1'000'000);

ExactResult world_conditional(const Program& prog, const Term& query, const Term& evidence,
                              const std::vector<SwitchInstance>& universe);
ExactResult world_conditional(const Program& prog, const Term& query, const Term& evidence);
double world_prob(const Program& prog, const Term& goal);

}  // namespace amcmc
