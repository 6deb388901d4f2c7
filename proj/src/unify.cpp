#include "amcmc/unify.hpp"

#include <utility>

namespace amcmc {
namespace {

bool occurs(VarId v, const Term& t, const Substitution& s) {
  Term w = s.walk(t);
  if (w.is_var()) return w.var_id() == v;
  for (const auto& a : w.args()) {
    if (occurs(v, a, s)) return true;
  }
  return false;
}

bool unify_rec(const Term& a0, const Term& b0, Substitution& s) {
  Term a = s.walk(a0);
  Term b = s.walk(b0);
  if (a.is_var() && b.is_var() && a.var_id() == b.var_id()) return true;
  if (a.is_var()) {
    if (occurs(a.var_id(), b, s)) return false;
    s.bind(a.var_id(), b);
    return true;
  }
  if (b.is_var()) {
    if (occurs(b.var_id(), a, s)) return false;
    s.bind(b.var_id(), a);
    return true;
  }
  if (a.kind() != b.kind()) return false;
  if (!a.is_compound()) return a == b;
  if (a.name() != b.name() || a.arity() != b.arity()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (!unify_rec(a.arg(i), b.arg(i), s)) return false;
  }
  return true;
}

}  // namespace

void Substitution::bind(VarId v, Term value) {
  if (v >= slots_.size()) slots_.resize(v + 1);
  slots_[v] = std::move(value);
  trail_.push_back(v);
}

Term Substitution::walk(const Term& t) const {
  const Term* cur = &t;
  while (cur->is_var()) {
    const Term* next = lookup(cur->var_id());
    if (!next) break;
    cur = next;
  }
  return *cur;
}

Term Substitution::resolve(const Term& t) const {
  Term w = walk(t);
  if (!w.is_compound()) return w;
  std::vector<Term> args;
  args.reserve(w.arity());
  for (const auto& a : w.args()) args.push_back(resolve(a));
  return Term::compound(w.name(), std::move(args));
}

void Substitution::undo(std::size_t mark) {
  while (trail_.size() > mark) {
    slots_[trail_.back()].reset();
    trail_.pop_back();
  }
}

std::map<VarId, Term> Substitution::bindings() const {
  std::map<VarId, Term> out;
  for (auto v : trail_) out.emplace(v, resolve(Term::var(v)));
  return out;
}

std::optional<Substitution> unify(const Term& t1, const Term& t2, Substitution theta) {
  if (!unify_rec(t1, t2, theta)) return std::nullopt;
  return theta;
}

bool unify_into(const Term& t1, const Term& t2, Substitution& theta) {
  auto m = theta.mark();
  if (unify_rec(t1, t2, theta)) return true;
  theta.undo(m);
  return false;
}

Term offset_vars(const Term& t, VarId offset) {
  if (t.is_var()) return Term::var(t.var_id() + offset);
  if (!t.is_compound()) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const auto& a : t.args()) args.push_back(offset_vars(a, offset));
  return Term::compound(t.name(), std::move(args));
}

}  // namespace amcmc
