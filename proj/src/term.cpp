#include "amcmc/term.hpp"

#include <charconv>
#include <cctype>
#include <ostream>
#include <sstream>

namespace amcmc {
namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

bool is_plain_atom(std::string_view s) {
  if (s.empty()) return false;
  if (s == "[]") return true;
  if (!std::islower(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

void write_atom(std::ostream& os, std::string_view s) {
  if (is_plain_atom(s)) {
    os << s;
    return;
  }
  os << '\'';
  for (char c : s) {
    if (c == '\'' || c == '\\') os << '\\';
    os << c;
  }
  os << '\'';
}

bool is_infix(std::string_view s) {
  static constexpr std::string_view ops[] = {",", "=", "is", "<", ">", "=<", ">=", "=:=",
                                            "=\\=", "+", "-", "*", "//", "mod"};
  for (auto op : ops) {
    if (op == s) return true;
  }
  return false;
}

void write_real(std::ostream& os, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string_view text(buf, static_cast<std::size_t>(end - buf));
  os << text;
  if (text.find_first_of(".eEn") == std::string_view::npos) os << ".0";
}

void write(std::ostream& os, const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Atom:
      write_atom(os, t.name().name());
      return;
    case Term::Kind::Int:
      os << t.int_value();
      return;
    case Term::Kind::Real:
      write_real(os, t.real_value());
      return;
    case Term::Kind::Var:
      os << "_V" << t.var_id();
      return;
    case Term::Kind::Compound:
      break;
  }
  if (auto items = t.list_items()) {
    os << '[';
    for (std::size_t i = 0; i < items->size(); ++i) {
      if (i) os << ',';
      write(os, (*items)[i]);
    }
    os << ']';
    return;
  }
  if (t.is_functor(".", 2)) {
    os << '[';
    const Term* cur = &t;
    bool first = true;
    while (cur->is_functor(".", 2)) {
      if (!first) os << ',';
      first = false;
      write(os, cur->arg(0));
      cur = &cur->arg(1);
    }
    os << '|';
    write(os, *cur);
    os << ']';
    return;
  }
  auto name = t.name().name();
  if (t.arity() == 2 && is_infix(name)) {
    os << '(';
    write(os, t.arg(0));
    if (name == ",") {
      os << ", ";
    } else {
      os << ' ' << name << ' ';
    }
    write(os, t.arg(1));
    os << ')';
    return;
  }
  write_atom(os, name);
  os << '(';
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i) os << ',';
    write(os, t.arg(i));
  }
  os << ')';
}

}  // namespace

Term Term::atom(Symbol name) {
  Term t(Kind::Atom);
  t.sym_ = name;
  return t;
}

Term Term::integer(std::int64_t value) {
  Term t(Kind::Int);
  t.int_ = value;
  return t;
}

Term Term::real(double value) {
  Term t(Kind::Real);
  t.real_ = value;
  return t;
}

Term Term::var(VarId id) {
  Term t(Kind::Var);
  t.int_ = id;
  return t;
}

Term Term::compound(Symbol functor, std::vector<Term> args) {
  if (args.empty()) return atom(functor);
  Term t(Kind::Compound);
  t.sym_ = functor;
  t.args_ = std::make_shared<const std::vector<Term>>(std::move(args));
  return t;
}

Term Term::nil() {
  static const Symbol s = Symbol::intern("[]");
  return atom(s);
}

Term Term::list(std::vector<Term> items, Term tail) {
  static const Symbol dot = Symbol::intern(".");
  Term out = std::move(tail);
  for (auto it = items.rbegin(); it != items.rend(); ++it) {
    out = compound(dot, {std::move(*it), std::move(out)});
  }
  return out;
}

std::span<const Term> Term::args() const {
  if (!args_) return {};
  return {args_->data(), args_->size()};
}

bool Term::is_functor(std::string_view name, std::size_t n) const {
  if (n == 0) return is_atom() && sym_.name() == name;
  return is_compound() && arity() == n && sym_.name() == name;
}

bool Term::is_ground() const {
  if (kind_ == Kind::Var) return false;
  for (const auto& a : args()) {
    if (!a.is_ground()) return false;
  }
  return true;
}

std::optional<std::vector<Term>> Term::list_items() const {
  static const Symbol dot = Symbol::intern(".");
  static const Symbol nil_sym = Symbol::intern("[]");
  std::vector<Term> items;
  const Term* cur = this;
  while (cur->is_compound() && cur->sym_ == dot && cur->arity() == 2) {
    items.push_back(cur->arg(0));
    cur = &cur->arg(1);
  }
  if (!(cur->is_atom() && cur->sym_ == nil_sym)) return std::nullopt;
  return items;
}

std::size_t Term::hash() const {
  std::size_t h = static_cast<std::size_t>(kind_);
  switch (kind_) {
    case Kind::Atom:
      return mix(h, sym_.id());
    case Kind::Int:
    case Kind::Var:
      return mix(h, static_cast<std::size_t>(int_));
    case Kind::Real:
      return mix(h, std::hash<double>{}(real_));
    case Kind::Compound:
      h = mix(h, sym_.id());
      for (const auto& a : args()) h = mix(h, a.hash());
      return h;
  }
  return h;
}

bool operator==(const Term& a, const Term& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case Term::Kind::Atom:
      return a.sym_ == b.sym_;
    case Term::Kind::Int:
    case Term::Kind::Var:
      return a.int_ == b.int_;
    case Term::Kind::Real:
      return a.real_ == b.real_;
    case Term::Kind::Compound:
      if (a.sym_ != b.sym_ || a.arity() != b.arity()) return false;
      if (a.args_ == b.args_) return true;
      for (std::size_t i = 0; i < a.arity(); ++i) {
        if (!(a.arg(i) == b.arg(i))) return false;
      }
      return true;
  }
  return false;
}

VarId var_bound(const Term& t) {
  if (t.is_var()) return t.var_id() + 1;
  VarId m = 0;
  for (const auto& a : t.args()) m = std::max(m, var_bound(a));
  return m;
}

void collect_vars(const Term& t, std::vector<VarId>& out) {
  if (t.is_var()) {
    for (auto v : out) {
      if (v == t.var_id()) return;
    }
    out.push_back(t.var_id());
    return;
  }
  for (const auto& a : t.args()) collect_vars(a, out);
}

std::string to_string(const Term& t) {
  std::ostringstream os;
  write(os, t);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Term& t) {
  write(os, t);
  return os;
}

}  // namespace amcmc
