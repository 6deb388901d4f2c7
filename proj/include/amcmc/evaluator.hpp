#pragma once

#include <cstddef>
#include <memory>

#include "amcmc/program.hpp"
#include "amcmc/random.hpp"
#include "amcmc/term.hpp"
#include "amcmc/worlds.hpp"

namespace amcmc {

namespace detail {
class Machine;
}

struct EvalOptions {
  std::size_t step_limit = 1'000'000;
  /// Record only the first access to each switch instance in the trace.
  bool trace_dedup = false;
};

struct EvalResult {
  bool success = false;
  /// Entries touched by this evaluation: looked up in the input or drawn.
  Assignment assignment;
  Trace trace;
  std::size_t steps = 0;
};

/// Sampling evaluator bound to one program. Reuses its working memory
/// across calls; not thread-safe, use one instance per thread.
class Evaluator {
 public:
  explicit Evaluator(Program prog, EvalOptions opts = {});
  ~Evaluator();
  Evaluator(Evaluator&&) noexcept;
  Evaluator& operator=(Evaluator&&) noexcept;

  const Program& program() const { return prog_; }
  const EvalOptions& options() const { return opts_; }

  /// First derivation of `goal` by depth-first resolution. At each msw the
  /// value is read from the result so far, else copied from `sigma`, else
  /// drawn from `src`; every access is traced.
  EvalResult eval(const Term& goal, const Assignment& sigma, OutcomeSource& src, Rng& rng);
  /// As eval, writing into `out` to reuse its buffers.
  void eval_into(const Term& goal, const Assignment& sigma, OutcomeSource& src, Rng& rng,
                 EvalResult& out);

  /// Randomized backtracking search for an assignment under which `goal`
  /// holds. Throws InferenceError if no derivation exists.
  Assignment initial_sample(const Term& goal, Rng& rng);

 private:
  Program prog_;
  EvalOptions opts_;
  std::unique_ptr<detail::Machine> machine_;
};

EvalResult sample_eval(const Program& prog, const Term& goal, const Assignment& sigma,
                       OutcomeSource& src, Rng& rng, EvalOptions opts = {});

Assignment initial_sample(const Program& prog, const Term& goal, Rng& rng,
                          std::size_t step_limit = 1'000'000);

}  // namespace amcmc
