#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "amcmc/program.hpp"
#include "amcmc/random.hpp"
#include "amcmc/worlds.hpp"

namespace amcmc {

enum class QMode : std::uint8_t {
  /// Q is the mean of all rewards received.
  Averaging,
  /// Q is the most recent reward.
  LastReward,
};

struct QEntry {
  double q = 1.0;
  double total = 0.0;
  std::uint64_t count = 0;
};

struct QKey {
  SwitchInstance inst;
  Outcome value = 0;

  friend auto operator<=>(const QKey&, const QKey&) = default;
};

/// Q-values, cumulative rewards and counts per (switch, instance, outcome).
/// Unseen keys have Q = 1.
class QStore {
 public:
  using UpdateHook =
      std::function<void(const QKey& key, const QEntry& before, const QEntry& after, double reward)>;

  explicit QStore(QMode mode = QMode::Averaging) : mode_(mode) {}

  QMode mode() const { return mode_; }
  double q(const SwitchInstance& k, Outcome v) const;
  QEntry entry(const SwitchInstance& k, Outcome v) const;
  /// Q-values of every outcome of an instance; nullptr if none was seen.
  const std::vector<QEntry>* find(const SwitchInstance& k) const;

  /// Deliver one reward to a key.
  void update(const SwitchInstance& k, Outcome v, double reward);

  std::size_t size() const;
  /// All seen keys in key order.
  std::vector<std::pair<QKey, QEntry>> entries() const;

  void set_update_hook(UpdateHook hook) { hook_ = std::move(hook); }

 private:
  QMode mode_;
  std::unordered_map<SwitchInstance, std::vector<QEntry>, SwitchInstanceHash> table_;
  UpdateHook hook_;
};

/// Deliver `reward` to the last triple of `trace` and propagate backwards:
/// each earlier triple receives sum_v P(s,i,v) * Q(s,i,v) over the
/// instance it precedes, computed after that instance was updated.
void adapt(std::span<const TraceEntry> trace, double reward, QStore& store, const Program& prog);

/// Floor applied to Q-values inside adapted distributions.
inline constexpr double kQFloor = 1e-6;

/// P(v) * max(Q(v), floor), normalised. Returns the original vector
/// unchanged when all outcomes of the instance share one Q-value.
void adapted_dist(const QStore& store, const SwitchInstance& k, const Program& prog,
                  std::vector<double>& out);
std::vector<double> adapted_dist(const QStore& store, const SwitchInstance& k,
                                 const Program& prog);

/// Draws from the adapted distribution of the store's current state.
class AdaptedDistribution final : public OutcomeSource {
 public:
  AdaptedDistribution(Program prog, const QStore& store)
      : prog_(std::move(prog)), store_(&store) {}

  Outcome draw(const SwitchInstance& k, Rng& rng) override;
  double probability(const SwitchInstance& k, Outcome v);

 private:
  Program prog_;
  const QStore* store_;
  std::vector<double> scratch_;
};

/// Diminishing adaptation check for one update:
/// |Q_after - Q_before| <= 1 / (c_before + 1).
bool adaptation_increment_bound(const QEntry& before, const QEntry& after);

/// Watches the rewards delivered to each key and counts increases.
class RewardMonitor {
 public:
  explicit RewardMonitor(double tolerance = 1e-12) : tolerance_(tolerance) {}

  void observe(const QKey& key, double reward);
  /// Hook suitable for QStore::set_update_hook.
  QStore::UpdateHook hook();

  std::size_t violations() const { return violations_; }
  std::size_t observations() const { return observations_; }

 private:
  double tolerance_;
  std::unordered_map<SwitchInstance, std::vector<double>, SwitchInstanceHash> last_;
  std::size_t violations_ = 0;
  std::size_t observations_ = 0;
};

/// CSV with header `switch,instance,outcome,q,count,total`.
void write_qstore_csv(std::ostream& os, const QStore& store, const Program& prog);

}  // namespace amcmc
