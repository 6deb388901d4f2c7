#include "amcmc/oracle.hpp"

#include <cmath>

#include "amcmc/errors.hpp"
#include "amcmc/evaluator.hpp"

namespace amcmc {
namespace {

struct Suspend {
  SwitchInstance key;
};

/// Interrupts the evaluation at the first switch instance that needs a
/// fresh outcome.
class SuspendingSource final : public OutcomeSource {
 public:
  Outcome draw(const SwitchInstance& k, Rng&) override { throw Suspend{k}; }
};

class TreeWalker {
 public:
  TreeWalker(const Program& prog, std::size_t branch_limit, std::size_t step_limit)
      : prog_(prog), ev_(prog, {step_limit, false}), limit_(branch_limit) {}

  std::vector<Leaf> leaves(const Term& goal, const Assignment& base) {
    std::vector<Leaf> out;
    std::vector<Assignment> pending{base};
    Rng unused(0);
    while (!pending.empty()) {
      Assignment forced = std::move(pending.back());
      pending.pop_back();
      if (++runs_ > limit_) {
        throw InferenceError("exact inference exceeded the branch limit of " +
                             std::to_string(limit_) + " evaluations");
      }
      try {
        EvalResult r = ev_.eval(goal, forced, source_, unused);
        out.push_back({r.success, std::move(r.assignment)});
      } catch (const Suspend& s) {
        auto probs = prog_.probs(s.key.sw);
        for (Outcome v = static_cast<Outcome>(probs.size()); v-- > 0;) {
          if (probs[v] <= 0.0) continue;
          Assignment next = forced;
          next.set(s.key, v);
          pending.push_back(std::move(next));
        }
      }
    }
    return out;
  }

 private:
  const Program& prog_;
  Evaluator ev_;
  SuspendingSource source_;
  std::size_t limit_;
  std::size_t runs_ = 0;
};

double success_mass(const std::vector<Leaf>& leaves, const Program& prog, bool success) {
  ExactSum s;
  for (const auto& l : leaves) {
    if (l.success == success) s.add(prob(l.assignment, prog));
  }
  return s.value();
}

}  // namespace

void ExactSum::add(double x) {
  double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

std::vector<Leaf> enumerate_leaves(const Program& prog, const Term& goal, const Assignment& base,
                                   std::size_t branch_limit, std::size_t step_limit) {
  TreeWalker walker(prog, branch_limit, step_limit);
  return walker.leaves(goal, base);
}

double exact_prob(const Program& prog, const Term& goal, std::size_t branch_limit) {
  return success_mass(enumerate_leaves(prog, goal, {}, branch_limit), prog, true);
}

double exact_prob_failure(const Program& prog, const Term& goal, std::size_t branch_limit) {
  return success_mass(enumerate_leaves(prog, goal, {}, branch_limit), prog, false);
}

ExactResult exact_conditional(const Program& prog, const Term& query, const Term& evidence,
                              std::size_t branch_limit) {
  TreeWalker walker(prog, branch_limit, 1'000'000);
  ExactResult res;
  auto qleaves = walker.leaves(query, {});
  res.p_query = success_mass(qleaves, prog, true);

  auto eleaves = walker.leaves(evidence, {});
  res.leaf_count = eleaves.size();
  ExactSum evidence_mass;
  ExactSum joint;
  for (const auto& el : eleaves) {
    if (!el.success) continue;
    double pe = prob(el.assignment, prog);
    evidence_mass.add(pe);
    auto below = walker.leaves(query, el.assignment);
    res.leaf_count += below.size();
    for (const auto& ql : below) {
      if (!ql.success) continue;
      double p = pe;
      for (const auto& e : ql.assignment.entries()) {
        if (!el.assignment.contains(e.key)) p *= prog.probs(e.key.sw)[e.value];
      }
      joint.add(p);
    }
  }
  res.p_evidence = evidence_mass.value();
  res.p_joint = joint.value();
  if (res.p_evidence <= 0.0) {
    throw InferenceError("evidence " + to_string(evidence) + " is unsatisfiable");
  }
  res.p_conditional = res.p_joint / res.p_evidence;
  return res;
}

}  // namespace amcmc
