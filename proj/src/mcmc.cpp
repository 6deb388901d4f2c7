#include "amcmc/mcmc.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "amcmc/errors.hpp"

namespace amcmc {
namespace {

enum Stream : std::uint64_t { kInit = 0, kProposal = 1, kEval = 2, kAccept = 3 };

using Clock = std::chrono::steady_clock;

std::int64_t micros_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
}

void merge_into(Assignment& base, const Assignment& extra) {
  for (const auto& e : extra.entries()) {
    if (!base.contains(e.key)) base.set(e.key, e.value);
  }
}

}  // namespace

ResampleStrategy ResampleStrategy::multi(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw InferenceError("multi-switch forget probability must be in (0,1], got " +
                         std::to_string(p));
  }
  return {Kind::Multi, p};
}

Assignment resample(const Assignment& sigma, const ResampleStrategy& strategy, Rng& rng) {
  Assignment out;
  if (strategy.kind == ResampleStrategy::Kind::Single) {
    if (sigma.empty()) throw InferenceError("single-switch resampling of an empty state");
    auto drop = rng.index(sigma.size());
    auto entries = sigma.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (i != drop) out.set(entries[i].key, entries[i].value);
    }
    return out;
  }
  for (const auto& e : sigma.entries()) {
    if (!rng.bernoulli(strategy.forget_prob)) out.set(e.key, e.value);
  }
  return out;
}

double accept_ratio(const Assignment& current, const Assignment& proposed,
                    const ResampleStrategy& strategy, const Program& prog,
                    AdaptedDistribution* adapted, AdaptedKeys keys) {
  bool single = strategy.kind == ResampleStrategy::Kind::Single;
  if (!adapted) {
    if (!single) return 1.0;
    return static_cast<double>(current.size()) / static_cast<double>(proposed.size());
  }
  double ratio = 1.0;
  // entries leaving the state: P'(x) / P(x)
  for_each_part(current, proposed, [&](int part, const AssignmentEntry& e) {
    if (part == 3 || (keys.current && !keys.current->contains(e.key))) return;
    double p = prog.probs(e.key.sw)[e.value];
    if (p == 0.0) throw InferenceError("current state has an outcome of probability 0");
    ratio *= adapted->probability(e.key, e.value) / p;
  });
  // entries entering the state: P(x) / P'(x)
  for_each_part(proposed, current, [&](int part, const AssignmentEntry& e) {
    if (part == 3 || (keys.proposed && !keys.proposed->contains(e.key))) return;
    double q = adapted->probability(e.key, e.value);
    if (q == 0.0) throw InferenceError("proposed outcome has adapted probability 0");
    ratio *= prog.probs(e.key.sw)[e.value] / q;
  });
  if (single) {
    ratio *= static_cast<double>(current.size()) / static_cast<double>(proposed.size());
  }
  return ratio;
}

double accept_prob(const Assignment& current, const Assignment& proposed,
                   const ResampleStrategy& strategy, const Program& prog,
                   AdaptedDistribution* adapted, AdaptedKeys keys) {
  return std::min(1.0, accept_ratio(current, proposed, strategy, prog, adapted, keys));
}

ChainResult run_chain(const Program& prog, const Term& query, const Term& evidence,
                      const ChainConfig& cfg, const ChainHooks& hooks) {
  if (cfg.samples == 0) throw InferenceError("number of samples must be positive");
  auto start = Clock::now();
  Rng base(cfg.seed);
  Rng init_rng = base.split(kInit);
  Rng proposal_rng = base.split(kProposal);
  Rng eval_rng = base.split(kEval);
  Rng accept_rng = base.split(kAccept);

  ChainResult res;
  res.q_store = QStore(cfg.q_mode);
  if (hooks.on_q_update) res.q_store.set_update_hook(hooks.on_q_update);

  Evaluator ev(prog, cfg.eval);
  OriginalDistribution original(prog);
  AdaptedDistribution adapted(prog, res.q_store);
  OutcomeSource& source = cfg.adaptive ? static_cast<OutcomeSource&>(adapted) : original;
  AdaptedDistribution* accept_dist = cfg.adaptive ? &adapted : nullptr;

  // Only evidence draws use the adapted source; `state_evidence` holds the
  // entries of `state` that the evidence evaluation produced.
  Assignment state = ev.initial_sample(evidence, init_rng);
  Assignment state_evidence = state;
  EvalResult eres;
  EvalResult qres;
  ev.eval_into(query, state, original, eval_rng, qres);
  merge_into(state, qres.assignment);
  bool query_ok = qres.success;

  const std::size_t total = cfg.burn_in + cfg.samples;
  res.query_trace.reserve(cfg.samples);
  if (cfg.record_rows) res.rows.reserve(cfg.samples);
  Assignment proposal;
  Assignment candidate;
  Assignment query_input;
  for (std::size_t iter = 1; iter <= total; ++iter) {
    proposal = state.empty() ? state : resample(state, cfg.strategy, proposal_rng);
    ev.eval_into(evidence, proposal, source, eval_rng, eres);
    bool accepted = false;
    double a = 0.0;
    if (eres.success) {
      // Keys the evidence no longer touches stay visible to the query, so
      // the only entries redrawn are the forgotten ones.
      query_input = eres.assignment;
      merge_into(query_input, proposal);
      ev.eval_into(query, query_input, original, eval_rng, qres);
      candidate = eres.assignment;
      merge_into(candidate, qres.assignment);
      a = accept_prob(state, candidate, cfg.strategy, prog, accept_dist,
                      {&state_evidence, &eres.assignment});
      double u = accept_rng.uniform();
      if (u < a) {
        accepted = true;
        if (hooks.on_iteration) {
          hooks.on_iteration({iter, &state, &candidate, a, true, true});
        }
        std::swap(state, candidate);
        state_evidence = eres.assignment;
        query_ok = qres.success;
      } else if (hooks.on_iteration) {
        hooks.on_iteration({iter, &state, &candidate, a, false, true});
      }
    } else if (hooks.on_iteration) {
      hooks.on_iteration({iter, &state, nullptr, 0.0, false, false});
    }
    if (cfg.adaptive && !cfg.freeze_q) {
      adapt(eres.trace, eres.success ? 1.0 : 0.0, res.q_store, prog);
    }
    if (cfg.check_invariants) {
      EvalResult check;
      Rng unused(0);
      ev.eval_into(evidence, state, original, unused, check);
      if (!check.success) {
        throw InferenceError("invariant violated: evidence fails on the retained state");
      }
    }
    if (iter <= cfg.burn_in) continue;
    ++res.samples;
    res.accepted += accepted;
    res.evidence_rejections += !eres.success;
    res.query_hits += query_ok;
    res.query_trace.push_back(query_ok);
    if (cfg.record_rows) {
      res.rows.push_back({res.samples,
                          static_cast<double>(res.query_hits) / static_cast<double>(res.samples),
                          accepted, eres.success, res.evidence_rejections, micros_since(start)});
    }
  }
  res.estimate = static_cast<double>(res.query_hits) / static_cast<double>(res.samples);
  res.final_state = std::move(state);
  res.elapsed_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return res;
}

std::uint64_t chain_seed(std::uint64_t base_seed, std::size_t index) {
  return base_seed + 0x9e3779b97f4a7c15ULL * index;
}

std::optional<double> gelman_rubin(const std::vector<std::vector<std::uint8_t>>& traces) {
  if (traces.size() < 2) return std::nullopt;
  std::size_t n = traces.front().size();
  for (const auto& t : traces) n = std::min(n, t.size());
  if (n < 2) return std::nullopt;
  auto m = static_cast<double>(traces.size());
  std::vector<double> means;
  double within = 0.0;
  for (const auto& t : traces) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += t[i];
    double mean = s / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (t[i] - mean) * (t[i] - mean);
    within += ss / static_cast<double>(n - 1);
    means.push_back(mean);
  }
  within /= m;
  if (within <= 0.0) return std::nullopt;
  double grand = 0.0;
  for (double x : means) grand += x;
  grand /= m;
  double between = 0.0;
  for (double x : means) between += (x - grand) * (x - grand);
  between *= static_cast<double>(n) / (m - 1.0);
  double nn = static_cast<double>(n);
  double var_plus = (nn - 1.0) / nn * within + between / nn;
  return std::sqrt(var_plus / within);
}

MultiChainResult run_chains(const Program& prog, const Term& query, const Term& evidence,
                            const ChainConfig& cfg, std::size_t chains) {
  if (chains == 0) throw InferenceError("number of chains must be positive");
  MultiChainResult out;
  out.chains.resize(chains);
  std::vector<std::exception_ptr> errors(chains);
  std::vector<std::thread> workers;
  for (std::size_t k = 0; k < chains; ++k) {
    workers.emplace_back([&, k] {
      try {
        ChainConfig c = cfg;
        c.seed = chain_seed(cfg.seed, k);
        out.chains[k] = run_chain(prog, query, evidence, c);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  double sum = 0.0;
  for (const auto& c : out.chains) sum += c.estimate;
  out.pooled_mean = sum / static_cast<double>(chains);
  if (chains > 1) {
    double ss = 0.0;
    for (const auto& c : out.chains) ss += (c.estimate - out.pooled_mean) * (c.estimate - out.pooled_mean);
    out.spread = std::sqrt(ss / static_cast<double>(chains - 1));
    std::vector<std::vector<std::uint8_t>> traces;
    for (const auto& c : out.chains) traces.push_back(c.query_trace);
    out.r_hat = gelman_rubin(traces);
  }
  return out;
}

}  // namespace amcmc
