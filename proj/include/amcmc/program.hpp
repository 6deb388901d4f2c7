#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amcmc/term.hpp"

namespace amcmc {

namespace detail {
struct ProgramImpl;
}

struct Clause {
  Term head;
  std::vector<Term> body;  // empty for facts

  friend bool operator==(const Clause&, const Clause&) = default;
};

/// `values(Pattern, [o1,...,ok]).`
struct ValuesDecl {
  Term pattern;
  std::vector<Term> outcomes;

  friend bool operator==(const ValuesDecl&, const ValuesDecl&) = default;
};

/// `:- set_sw(Name, [p1,...,pk]).` resolved against its values declaration.
struct SwitchDist {
  Term name;
  std::size_t values_index = 0;
  std::vector<double> probs;

  friend bool operator==(const SwitchDist&, const SwitchDist&) = default;
};

using SwitchId = std::uint32_t;

struct SwitchOutcomes {
  std::vector<Term> outcomes;
  std::vector<double> probs;
};

/// Validated, immutable PRISM-style program. Copies share state and are
/// safe to use concurrently from several threads.
class Program {
 public:
  /// Tolerance on the sum of a `set_sw` vector.
  static constexpr double kProbTolerance = 1e-9;

  Program();

  /// Validate the parts and build the program. `dists` entries need only
  /// `name` and `probs`; the matching values declaration is resolved here.
  /// Throws ProgramError on any invariant violation.
  static Program build(std::vector<Clause> clauses, std::vector<ValuesDecl> values,
                       std::vector<SwitchDist> dists);

  std::span<const Clause> clauses() const;
  std::span<const ValuesDecl> values() const;
  std::span<const SwitchDist> switches() const;

  /// Clauses whose head has the given functor and arity, in textual order.
  std::vector<const Clause*> clauses_for(std::string_view functor, std::size_t arity) const;

  std::optional<SwitchId> find_switch(const Term& ground_name) const;
  /// Index of the values declaration whose pattern matches `name`.
  std::optional<std::size_t> find_values(const Term& name) const;

  const SwitchDist& switch_at(SwitchId id) const { return switches()[id]; }
  std::span<const Term> outcomes(SwitchId id) const;
  std::span<const double> probs(SwitchId id) const { return switch_at(id).probs; }
  std::size_t outcome_count(SwitchId id) const { return probs(id).size(); }
  std::optional<std::uint32_t> outcome_index(SwitchId id, const Term& outcome) const;

  const detail::ProgramImpl& impl() const { return *impl_; }

  friend bool operator==(const Program& a, const Program& b);

 private:
  explicit Program(std::shared_ptr<const detail::ProgramImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const detail::ProgramImpl> impl_;
};

/// Outcomes and probability vector of a ground switch. Throws ProgramError
/// for an undeclared switch or one without a distribution.
SwitchOutcomes switch_outcomes(const Program& prog, const Term& name);

/// Re-parsable source text: clauses, then values declarations, then
/// set_sw directives.
std::string to_string(const Program& prog);

}  // namespace amcmc
