#include <chrono>

#include "amcmc/errors.hpp"
#include "amcmc/mcmc.hpp"

namespace amcmc {

IndependentResult independent_sampler(const Program& prog, const Term& query,
                                      const Term& evidence, const IndependentConfig& cfg,
                                      const QStore::UpdateHook& on_q_update) {
  if (cfg.samples == 0) throw InferenceError("number of samples must be positive");
  using Clock = std::chrono::steady_clock;
  auto start = Clock::now();
  Rng base(cfg.seed);
  Rng eval_rng = base.split(2);

  IndependentResult res;
  if (on_q_update) res.q_store.set_update_hook(on_q_update);
  Evaluator ev(prog, cfg.eval);
  OriginalDistribution original(prog);
  AdaptedDistribution adapted(prog, res.q_store);
  const Assignment empty;
  EvalResult eres;
  EvalResult qres;
  if (cfg.record_rows) res.rows.reserve(cfg.samples);
  for (std::size_t i = 1; i <= cfg.samples; ++i) {
    ev.eval_into(evidence, empty, adapted, eval_rng, eres);
    adapt(eres.trace, eres.success ? 1.0 : 0.0, res.q_store, prog);
    if (eres.success) {
      ++res.consistent;
      ev.eval_into(query, eres.assignment, original, eval_rng, qres);
      res.joint += qres.success;
    }
    ++res.samples;
    if (cfg.record_rows) {
      double est = res.consistent ? static_cast<double>(res.joint) / static_cast<double>(res.consistent)
                                  : 0.0;
      res.rows.push_back({i, est, eres.success, eres.success, res.samples - res.consistent,
                          std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start)
                              .count()});
    }
  }
  if (res.consistent == 0) {
    throw InferenceError("no consistent samples; cannot estimate");
  }
  res.estimate = static_cast<double>(res.joint) / static_cast<double>(res.consistent);
  res.elapsed_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return res;
}

}  // namespace amcmc
