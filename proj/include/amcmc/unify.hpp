#pragma once

#include <map>
#include <optional>
#include <vector>

#include "amcmc/term.hpp"

namespace amcmc {

/// Triangular substitution over variable ids with an undo trail, so callers
/// that search (the reference interpreter) can roll bindings back cheaply.
class Substitution {
 public:
  const Term* lookup(VarId v) const {
    return v < slots_.size() && slots_[v] ? &*slots_[v] : nullptr;
  }
  void bind(VarId v, Term value);

  /// Follow variable bindings at the top level only.
  Term walk(const Term& t) const;
  /// Apply the substitution everywhere in `t`.
  Term resolve(const Term& t) const;

  std::size_t size() const { return trail_.size(); }
  bool empty() const { return trail_.empty(); }

  std::size_t mark() const { return trail_.size(); }
  void undo(std::size_t mark);

  /// Fully resolved bindings, keyed by variable id.
  std::map<VarId, Term> bindings() const;

 private:
  std::vector<std::optional<Term>> slots_;
  std::vector<VarId> trail_;
};

/// Most general unifier of t1 and t2 extending `theta`, with occurs check.
std::optional<Substitution> unify(const Term& t1, const Term& t2, Substitution theta = {});

/// In-place variant: on failure `theta` is restored to its state on entry.
bool unify_into(const Term& t1, const Term& t2, Substitution& theta);

/// Rename every variable v in `t` to v + offset.
Term offset_vars(const Term& t, VarId offset);

}  // namespace amcmc
