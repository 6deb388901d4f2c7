#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "amcmc/adapt.hpp"
#include "amcmc/evaluator.hpp"
#include "amcmc/program.hpp"
#include "amcmc/random.hpp"
#include "amcmc/worlds.hpp"

namespace amcmc {

struct ResampleStrategy {
  enum class Kind : std::uint8_t { Single, Multi };
  Kind kind = Kind::Single;
  /// Forget probability per key for Multi, in (0,1].
  double forget_prob = 0.5;

  static ResampleStrategy single() { return {Kind::Single, 0.5}; }
  static ResampleStrategy multi(double p);
};

/// Proposal: Single forgets one uniformly chosen key, Multi forgets each
/// key independently. Throws InferenceError for Single on an empty state.
Assignment resample(const Assignment& sigma, const ResampleStrategy& strategy, Rng& rng);

/// Which entries of a state were drawn from the adapted distribution.
/// Null means all of them; entries outside the set count as drawn from
/// the original distribution, so their P'/P factors are 1.
struct AdaptedKeys {
  const Assignment* current = nullptr;
  const Assignment* proposed = nullptr;
};

/// Unclamped Metropolis-Hastings ratio for moving from `current` to
/// `proposed`. With `adapted` null the non-adaptive formulas apply.
double accept_ratio(const Assignment& current, const Assignment& proposed,
                    const ResampleStrategy& strategy, const Program& prog,
                    AdaptedDistribution* adapted = nullptr, AdaptedKeys keys = {});
/// min(1, accept_ratio).
double accept_prob(const Assignment& current, const Assignment& proposed,
                   const ResampleStrategy& strategy, const Program& prog,
                   AdaptedDistribution* adapted = nullptr, AdaptedKeys keys = {});

struct ChainConfig {
  std::size_t samples = 10'000;
  std::size_t burn_in = 0;
  ResampleStrategy strategy;
  bool adaptive = false;
  /// Use the adaptive acceptance path but never update Q-values.
  bool freeze_q = false;
  QMode q_mode = QMode::Averaging;
  std::uint64_t seed = 0;
  EvalOptions eval;
  bool record_rows = true;
  /// Re-evaluate the evidence on every retained state and throw if it fails.
  bool check_invariants = false;
};

struct ChainRow {
  std::size_t iter = 0;
  double estimate = 0.0;
  bool accepted = false;
  bool evidence_ok = false;
  std::size_t cum_evidence_rejections = 0;
  std::int64_t elapsed_us = 0;
};

struct ChainResult {
  double estimate = 0.0;
  std::size_t samples = 0;
  std::size_t query_hits = 0;
  std::size_t accepted = 0;
  std::size_t evidence_rejections = 0;
  double elapsed_seconds = 0.0;
  std::vector<ChainRow> rows;
  /// Query answer of the retained state per post-burn-in iteration.
  std::vector<std::uint8_t> query_trace;
  Assignment final_state;
  QStore q_store;

  double rejection_rate() const {
    return samples ? static_cast<double>(evidence_rejections) / static_cast<double>(samples) : 0.0;
  }
};

/// Per-iteration view for instrumentation.
struct IterationInfo {
  std::size_t iter = 0;  // 1-based, including burn-in
  const Assignment* current = nullptr;
  const Assignment* proposed = nullptr;  // null when the evidence failed
  double accept_prob = 0.0;
  bool accepted = false;
  bool evidence_ok = false;
};

struct ChainHooks {
  std::function<void(const IterationInfo&)> on_iteration;
  QStore::UpdateHook on_q_update;
};

/// Metropolis-Hastings estimate of P(query | evidence).
ChainResult run_chain(const Program& prog, const Term& query, const Term& evidence,
                      const ChainConfig& cfg, const ChainHooks& hooks = {});

/// Seed used by chain `index` of a multi-chain run.
std::uint64_t chain_seed(std::uint64_t base_seed, std::size_t index);

struct MultiChainResult {
  std::vector<ChainResult> chains;
  double pooled_mean = 0.0;
  /// Sample standard deviation of the per-chain estimates.
  double spread = 0.0;
  /// Gelman-Rubin potential scale reduction of the query indicator;
  /// nullopt when undefined (fewer than 2 chains or zero variance).
  std::optional<double> r_hat;
};

/// Independent chains run concurrently, results in chain order.
MultiChainResult run_chains(const Program& prog, const Term& query, const Term& evidence,
                            const ChainConfig& cfg, std::size_t chains);

std::optional<double> gelman_rubin(const std::vector<std::vector<std::uint8_t>>& traces);

struct IndependentConfig {
  std::size_t samples = 10'000;
  std::uint64_t seed = 0;
  EvalOptions eval;
  bool record_rows = true;
};

struct IndependentResult {
  double estimate = 0.0;
  std::size_t samples = 0;
  std::size_t consistent = 0;
  std::size_t joint = 0;
  double elapsed_seconds = 0.0;
  std::vector<ChainRow> rows;
  QStore q_store{QMode::LastReward};
};

/// Independent sampling for programs with Markovian evaluation structure:
/// each sample evaluates the evidence from scratch under the last-reward
/// adapted distribution, adapts, and on success evaluates the query under
/// the original distribution. Throws InferenceError if no sample is
/// consistent with the evidence.
IndependentResult independent_sampler(const Program& prog, const Term& query,
                                      const Term& evidence, const IndependentConfig& cfg,
                                      const QStore::UpdateHook& on_q_update = {});

}  // namespace amcmc
