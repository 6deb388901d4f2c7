#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amcmc/program.hpp"
#include "amcmc/random.hpp"
#include "amcmc/term.hpp"

namespace amcmc {

/// Instance component of a switch instance: a ground integer or atom.
struct InstanceKey {
  enum class Kind : std::uint8_t { Int, Atom };
  Kind kind = Kind::Int;
  std::int64_t value = 0;  // integer value or atom symbol id

  static InstanceKey from_term(const Term& t);
  Term to_term() const;

  friend auto operator<=>(const InstanceKey&, const InstanceKey&) = default;
};

/// One trial (s, i) of a switch that has a distribution in the program.
struct SwitchInstance {
  SwitchId sw = 0;
  InstanceKey inst;

  friend auto operator<=>(const SwitchInstance&, const SwitchInstance&) = default;
};

struct SwitchInstanceHash {
  std::size_t operator()(const SwitchInstance& k) const noexcept {
    std::size_t h = k.sw * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::size_t>(k.inst.value) + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2);
    return h ^ static_cast<std::size_t>(k.inst.kind);
  }
};

/// Resolve a ground switch name and instance. Throws ProgramError for an
/// undeclared switch, a switch without distribution, or a bad instance.
SwitchInstance make_instance(const Program& prog, const Term& name, const Term& instance);

/// Outcome indices refer to the switch's values declaration.
using Outcome = std::uint32_t;

struct AssignmentEntry {
  SwitchInstance key;
  Outcome value;

  friend bool operator==(const AssignmentEntry&, const AssignmentEntry&) = default;
};

/// Partial map from switch instances to outcomes. Iteration follows
/// insertion order; equality is map equality.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::initializer_list<AssignmentEntry> entries);

  std::optional<Outcome> get(const SwitchInstance& k) const;
  bool contains(const SwitchInstance& k) const { return find(k) >= 0; }

  /// Insert or overwrite.
  void set(const SwitchInstance& k, Outcome v);
  /// Remove a key; returns whether it was present.
  bool erase(const SwitchInstance& k);
  /// Drop the most recently inserted entry.
  void pop_back();
  void clear();

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::span<const AssignmentEntry> entries() const { return entries_; }

  friend bool operator==(const Assignment& a, const Assignment& b);

 private:
  std::ptrdiff_t find(const SwitchInstance& k) const;

  std::vector<AssignmentEntry> entries_;
  std::vector<std::uint32_t> sorted_;  // positions in entries_, ordered by key
};

/// (switch, instance, outcome) triples recorded by one evaluation.
using TraceEntry = AssignmentEntry;
using Trace = std::vector<TraceEntry>;

/// Replay a trace from the empty assignment.
Assignment replay(std::span<const TraceEntry> trace);

/// Where fresh outcomes come from when pick_value finds no stored value.
class OutcomeSource {
 public:
  virtual ~OutcomeSource() = default;
  virtual Outcome draw(const SwitchInstance& k, Rng& rng) = 0;
};

/// Samples from the program's set_sw vectors.
class OriginalDistribution final : public OutcomeSource {
 public:
  explicit OriginalDistribution(Program prog) : prog_(std::move(prog)) {}
  Outcome draw(const SwitchInstance& k, Rng& rng) override {
    return rng.categorical(prog_.probs(k.sw));
  }

 private:
  Program prog_;
};

/// Stored value if present, otherwise a fresh draw from `src` recorded in
/// `sigma`. The result always extends the input.
Outcome pick_value(Assignment& sigma, const SwitchInstance& k, OutcomeSource& src, Rng& rng);

/// True iff every entry of `base` is also in `ext` with the same value.
bool extends(const Assignment& ext, const Assignment& base);
bool mutually_exclusive(const Assignment& a, const Assignment& b);
inline bool compatible(const Assignment& a, const Assignment& b) {
  return !mutually_exclusive(a, b);
}

/// Product of the original outcome probabilities.
double prob(const Assignment& sigma, const Program& prog);

Assignment forget(const Assignment& sigma, std::span<const SwitchInstance> keys);

/// Part 1: keys of `a` undefined in `b`; part 2: defined in both with
/// different values; part 3: defined in both and equal.
struct Partition {
  Assignment only;
  Assignment differ;
  Assignment agree;
};
Partition partition(const Assignment& a, const Assignment& b);

/// Allocation-free variant: calls f(part, entry) for each entry of `a`,
/// where part is 1, 2 or 3 as above.
template <class F>
void for_each_part(const Assignment& a, const Assignment& b, F&& f) {
  for (const auto& e : a.entries()) {
    auto v = b.get(e.key);
    f(!v ? 1 : (*v != e.value ? 2 : 3), e);
  }
}

/// Text form: one `switch/instance=outcome` line per entry, insertion order.
std::string to_text(const Assignment& sigma, const Program& prog);
std::string to_text(std::span<const TraceEntry> trace, const Program& prog);
/// Inverse of to_text. Throws ParseError or ProgramError.
Assignment parse_assignment(std::string_view text, const Program& prog);

}  // namespace amcmc
