#include "amcmc/evaluator.hpp"

#include "amcmc/errors.hpp"
#include "machine.hpp"

namespace amcmc {
namespace {

class PickPolicy final : public detail::MswPolicy {
 public:
  PickPolicy(const Assignment& input, OutcomeSource& src, Rng& rng, EvalResult& out, bool dedup)
      : input_(input), src_(src), rng_(rng), out_(out), dedup_(dedup) {}

  Outcome pick(const SwitchInstance& k) override {
    Outcome v;
    bool fresh = false;
    if (auto seen = out_.assignment.get(k)) {
      v = *seen;
    } else {
      auto given = input_.get(k);
      v = given ? *given : src_.draw(k, rng_);
      out_.assignment.set(k, v);
      fresh = true;
    }
    if (fresh || !dedup_) out_.trace.push_back({k, v});
    return v;
  }

 private:
  const Assignment& input_;
  OutcomeSource& src_;
  Rng& rng_;
  EvalResult& out_;
  bool dedup_;
};

}  // namespace

Evaluator::Evaluator(Program prog, EvalOptions opts)
    : prog_(std::move(prog)), opts_(opts), machine_(std::make_unique<detail::Machine>(prog_)) {
  machine_->set_step_limit(opts_.step_limit);
}

Evaluator::~Evaluator() = default;
Evaluator::Evaluator(Evaluator&&) noexcept = default;
Evaluator& Evaluator::operator=(Evaluator&&) noexcept = default;

void Evaluator::eval_into(const Term& goal, const Assignment& sigma, OutcomeSource& src, Rng& rng,
                          EvalResult& out) {
  out.assignment.clear();
  out.trace.clear();
  PickPolicy policy(sigma, src, rng, out, opts_.trace_dedup);
  out.success = machine_->run_sample(goal, policy);
  out.steps = machine_->steps();
}

EvalResult Evaluator::eval(const Term& goal, const Assignment& sigma, OutcomeSource& src,
                           Rng& rng) {
  EvalResult out;
  eval_into(goal, sigma, src, rng, out);
  return out;
}

Assignment Evaluator::initial_sample(const Term& goal, Rng& rng) {
  Assignment out;
  if (!machine_->run_search(goal, rng, out)) {
    throw InferenceError("evidence " + to_string(goal) + " is unsatisfiable in every world");
  }
  return out;
}

EvalResult sample_eval(const Program& prog, const Term& goal, const Assignment& sigma,
                       OutcomeSource& src, Rng& rng, EvalOptions opts) {
  Evaluator ev(prog, opts);
  return ev.eval(goal, sigma, src, rng);
}

Assignment initial_sample(const Program& prog, const Term& goal, Rng& rng,
                          std::size_t step_limit) {
  Evaluator ev(prog, {step_limit, false});
  return ev.initial_sample(goal, rng);
}

}  // namespace amcmc
