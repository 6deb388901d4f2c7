#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amcmc/symbol.hpp"

namespace amcmc {

using VarId = std::uint32_t;

/// Immutable first-order term with value semantics. Argument vectors are
/// shared between copies, so copying a Term is cheap.
///
/// A compound with zero arguments is normalised to an atom; lists use the
/// '.'/2 functor with '[]' as the empty list. Real numbers exist only so that
/// `set_sw` probability vectors can be written as ordinary terms; the
/// resolution engine rejects them in clauses and goals.
class Term {
 public:
  enum class Kind : std::uint8_t { Atom, Int, Real, Var, Compound };

  Term() : Term(Kind::Int) {}

  static Term atom(std::string_view name) { return atom(Symbol::intern(name)); }
  static Term atom(Symbol name);
  static Term integer(std::int64_t value);
  static Term real(double value);
  static Term var(VarId id);
  static Term compound(std::string_view functor, std::vector<Term> args) {
    return compound(Symbol::intern(functor), std::move(args));
  }
  static Term compound(Symbol functor, std::vector<Term> args);
  static Term nil();
  static Term list(std::vector<Term> items, Term tail = nil());

  Kind kind() const { return kind_; }
  bool is_atom() const { return kind_ == Kind::Atom; }
  bool is_int() const { return kind_ == Kind::Int; }
  bool is_real() const { return kind_ == Kind::Real; }
  bool is_var() const { return kind_ == Kind::Var; }
  bool is_compound() const { return kind_ == Kind::Compound; }
  bool is_callable() const { return is_atom() || is_compound(); }
  bool is_atomic() const { return is_atom() || is_int() || is_real(); }

  /// Name of an atom or functor of a compound.
  Symbol name() const { return sym_; }
  std::int64_t int_value() const { return int_; }
  double real_value() const { return real_; }
  VarId var_id() const { return static_cast<VarId>(int_); }

  std::size_t arity() const { return args_ ? args_->size() : 0; }
  std::span<const Term> args() const;
  const Term& arg(std::size_t i) const { return (*args_)[i]; }

  bool is_functor(std::string_view name, std::size_t arity) const;
  bool is_ground() const;

  /// Elements of a proper list, or nullopt if the term is not one.
  std::optional<std::vector<Term>> list_items() const;

  std::size_t hash() const;

  friend bool operator==(const Term& a, const Term& b);

 private:
  explicit Term(Kind kind) : kind_(kind) {}

  Kind kind_;
  Symbol sym_{};
  std::int64_t int_ = 0;
  double real_ = 0.0;
  std::shared_ptr<const std::vector<Term>> args_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

/// Largest variable id occurring in `t` plus one (0 for ground terms).
VarId var_bound(const Term& t);

/// Collect distinct variables in left-to-right first-occurrence order.
void collect_vars(const Term& t, std::vector<VarId>& out);

/// Print in re-parsable concrete syntax. Variables print as `_V<id>`.
std::string to_string(const Term& t);
std::ostream& operator<<(std::ostream& os, const Term& t);

}  // namespace amcmc
