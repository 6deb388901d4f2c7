#include <cmath>
#include <sstream>
#include <unordered_map>

#include "amcmc/errors.hpp"
#include "amcmc/program.hpp"
#include "amcmc/unify.hpp"
#include "program_impl.hpp"

namespace amcmc {
namespace detail {

void serialize_ground(const Term& t, GroundKey& out) {
  switch (t.kind()) {
    case Term::Kind::Atom:
      out.push_back(atom_cell(t.name()));
      return;
    case Term::Kind::Int:
      out.push_back(int_cell(t.int_value()));
      return;
    case Term::Kind::Compound:
      out.push_back({Tag::Functor, static_cast<std::uint32_t>(t.arity()), t.name().id()});
      for (const auto& a : t.args()) serialize_ground(a, out);
      return;
    case Term::Kind::Real:
    case Term::Kind::Var:
      break;
  }
  throw ProgramError("term " + to_string(t) + " cannot be used as a ground key");
}

}  // namespace detail

namespace {

using detail::ArgKey;
using detail::Cell;
using detail::CompiledClause;
using detail::Tag;

bool is_reserved_head(const Term& h) {
  static constexpr std::pair<std::string_view, std::size_t> reserved[] = {
      {"true", 0}, {"fail", 0}, {"false", 0}, {",", 2}, {"=", 2},   {"is", 2},
      {"<", 2},    {">", 2},    {"=<", 2},    {">=", 2}, {"=:=", 2}, {"=\\=", 2},
      {"msw", 2},  {"msw", 3},  {"values", 2}, {"set_sw", 2}};
  for (auto [name, arity] : reserved) {
    if (h.is_functor(name, arity)) return true;
  }
  return false;
}

void check_no_reals(const Term& t, const Clause& c) {
  if (t.is_real()) {
    throw ProgramError("real number " + to_string(t) + " is not allowed in clause for " +
                       to_string(c.head));
  }
  for (const auto& a : t.args()) check_no_reals(a, c);
}

Term normalize_goal(const Term& g) {
  static const Symbol msw = Symbol::intern("msw");
  if (g.is_functor("msw", 2)) return Term::compound(msw, {g.arg(0), Term::integer(0), g.arg(1)});
  if (g.is_functor(",", 2)) {
    return Term::compound(g.name(), {normalize_goal(g.arg(0)), normalize_goal(g.arg(1))});
  }
  return g;
}

class ClauseCompiler {
 public:
  explicit ClauseCompiler(CompiledClause& out) : out_(out) {}

  Cell emit(const Term& t) {
    switch (t.kind()) {
      case Term::Kind::Atom:
        return detail::atom_cell(t.name());
      case Term::Kind::Int:
        return detail::int_cell(t.int_value());
      case Term::Kind::Var:
        return {Tag::Local, 0, local(t.var_id())};
      case Term::Kind::Compound: {
        auto off = out_.cells.size();
        out_.cells.resize(off + 1 + t.arity());
        out_.cells[off] = {Tag::Functor, static_cast<std::uint32_t>(t.arity()), t.name().id()};
        for (std::size_t i = 0; i < t.arity(); ++i) {
          Cell c = emit(t.arg(i));
          out_.cells[off + 1 + i] = c;
        }
        return {Tag::Str, 0, static_cast<std::int64_t>(off)};
      }
      case Term::Kind::Real:
        break;
    }
    throw ProgramError("cannot compile " + to_string(t));
  }

  std::uint32_t num_vars() const { return static_cast<std::uint32_t>(vars_.size()); }

 private:
  std::int64_t local(VarId v) {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == v) return static_cast<std::int64_t>(i);
    }
    vars_.push_back(v);
    return static_cast<std::int64_t>(vars_.size() - 1);
  }

  CompiledClause& out_;
  std::vector<VarId> vars_;
};

CompiledClause compile_clause(const Clause& c) {
  CompiledClause out;
  ClauseCompiler cc(out);
  out.head = cc.emit(c.head);
  for (const auto& g : c.body) out.body.push_back(cc.emit(g));
  out.num_vars = cc.num_vars();
  for (const auto& a : c.head.args()) {
    ArgKey k;
    if (a.is_atom()) {
      k = {false, Tag::Atom, 0, a.name().id()};
    } else if (a.is_int()) {
      k = {false, Tag::Int, 0, a.int_value()};
    } else if (a.is_compound()) {
      k = {false, Tag::Functor, static_cast<std::uint32_t>(a.arity()), a.name().id()};
    }
    out.keys.push_back(k);
  }
  return out;
}

bool patterns_overlap(const Term& a, const Term& b) {
  Term b2 = offset_vars(b, var_bound(a));
  return unify(a, b2).has_value();
}

}  // namespace

Program::Program() : impl_(std::make_shared<detail::ProgramImpl>()) {}

Program Program::build(std::vector<Clause> clauses, std::vector<ValuesDecl> values,
                       std::vector<SwitchDist> dists) {
  auto impl = std::make_shared<detail::ProgramImpl>();

  for (auto& c : clauses) {
    if (!c.head.is_callable()) {
      throw ProgramError("clause head " + to_string(c.head) + " is not callable");
    }
    if (is_reserved_head(c.head)) {
      throw ProgramError("cannot define built-in or switch predicate " + to_string(c.head));
    }
    check_no_reals(c.head, c);
    for (auto& g : c.body) {
      if (!g.is_callable()) {
        throw ProgramError("body goal " + to_string(g) + " in clause for " + to_string(c.head) +
                           " is not callable");
      }
      check_no_reals(g, c);
      g = normalize_goal(g);
    }
  }

  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& v = values[i];
    if (!v.pattern.is_callable()) {
      throw ProgramError("values pattern " + to_string(v.pattern) + " is not an atom or compound");
    }
    if (v.outcomes.empty()) {
      throw ProgramError("values declaration for " + to_string(v.pattern) + " has no outcomes");
    }
    for (std::size_t a = 0; a < v.outcomes.size(); ++a) {
      const auto& o = v.outcomes[a];
      if (!o.is_ground() || o.is_real()) {
        throw ProgramError("outcome " + to_string(o) + " of " + to_string(v.pattern) +
                           " must be a ground atom, integer or compound");
      }
      for (std::size_t b = 0; b < a; ++b) {
        if (v.outcomes[b] == o) {
          throw ProgramError("duplicate outcome " + to_string(o) + " in values declaration for " +
                             to_string(v.pattern));
        }
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (patterns_overlap(values[j].pattern, v.pattern)) {
        throw ProgramError("values declarations " + to_string(values[j].pattern) + " and " +
                           to_string(v.pattern) + " overlap");
      }
    }
  }

  impl->clauses = std::move(clauses);
  impl->values = std::move(values);

  for (auto& d : dists) {
    if (!d.name.is_ground() || !d.name.is_callable()) {
      throw ProgramError("set_sw switch " + to_string(d.name) + " must be a ground atom or compound");
    }
    std::optional<std::size_t> vi;
    for (std::size_t i = 0; i < impl->values.size(); ++i) {
      if (unify(impl->values[i].pattern, d.name)) {
        vi = i;
        break;
      }
    }
    if (!vi) {
      throw ProgramError("set_sw for " + to_string(d.name) + " has no matching values declaration");
    }
    const auto& decl = impl->values[*vi];
    if (d.probs.size() != decl.outcomes.size()) {
      throw ProgramError("set_sw for " + to_string(d.name) + " gives " +
                         std::to_string(d.probs.size()) + " probabilities but the switch has " +
                         std::to_string(decl.outcomes.size()) + " outcomes");
    }
    double sum = 0.0;
    for (double p : d.probs) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ProgramError("set_sw for " + to_string(d.name) + ": probability " +
                           std::to_string(p) + " outside [0,1]");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "set_sw for " << to_string(d.name) << ": probabilities sum to " << sum
         << ", expected 1";
      throw ProgramError(os.str());
    }
    if (impl->switch_by_term.contains(d.name)) {
      throw ProgramError("duplicate set_sw for " + to_string(d.name));
    }
    d.values_index = *vi;
    auto id = static_cast<SwitchId>(impl->switches.size());
    impl->switch_by_term.emplace(d.name, id);
    detail::GroundKey key;
    detail::serialize_ground(d.name, key);
    impl->switch_ids.emplace(std::move(key), id);
    impl->switches.push_back(std::move(d));
  }

  for (std::size_t i = 0; i < impl->clauses.size(); ++i) {
    const auto& c = impl->clauses[i];
    impl->code.push_back(compile_clause(c));
    impl->index[detail::pred_key(c.head.name(), c.head.arity())].push_back(
        static_cast<std::uint32_t>(i));
  }
  for (const auto& v : impl->values) {
    std::vector<Cell> cells;
    for (const auto& o : v.outcomes) {
      if (o.is_atom()) {
        cells.push_back(detail::atom_cell(o.name()));
      } else if (o.is_int()) {
        cells.push_back(detail::int_cell(o.int_value()));
      } else {
        cells.push_back({Tag::Ref, 0, -1});
      }
    }
    impl->outcome_cells.push_back(std::move(cells));
  }
  return Program(std::move(impl));
}

std::span<const Clause> Program::clauses() const { return impl_->clauses; }
std::span<const ValuesDecl> Program::values() const { return impl_->values; }
std::span<const SwitchDist> Program::switches() const { return impl_->switches; }

std::vector<const Clause*> Program::clauses_for(std::string_view functor,
                                                std::size_t arity) const {
  std::vector<const Clause*> out;
  auto it = impl_->index.find(detail::pred_key(Symbol::intern(functor), arity));
  if (it == impl_->index.end()) return out;
  for (auto i : it->second) out.push_back(&impl_->clauses[i]);
  return out;
}

std::optional<SwitchId> Program::find_switch(const Term& ground_name) const {
  auto it = impl_->switch_by_term.find(ground_name);
  if (it == impl_->switch_by_term.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Program::find_values(const Term& name) const {
  for (std::size_t i = 0; i < impl_->values.size(); ++i) {
    if (unify(impl_->values[i].pattern, name)) return i;
  }
  return std::nullopt;
}

std::span<const Term> Program::outcomes(SwitchId id) const {
  return impl_->values[switch_at(id).values_index].outcomes;
}

std::optional<std::uint32_t> Program::outcome_index(SwitchId id, const Term& outcome) const {
  auto outs = outcomes(id);
  for (std::size_t i = 0; i < outs.size(); ++i) {
    if (outs[i] == outcome) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

bool operator==(const Program& a, const Program& b) {
  if (a.impl_ == b.impl_) return true;
  return a.impl_->clauses == b.impl_->clauses && a.impl_->values == b.impl_->values &&
         a.impl_->switches == b.impl_->switches;
}

SwitchOutcomes switch_outcomes(const Program& prog, const Term& name) {
  if (!name.is_ground()) throw ProgramError("switch " + to_string(name) + " is not ground");
  auto vi = prog.find_values(name);
  if (!vi) throw ProgramError("unknown switch " + to_string(name));
  auto id = prog.find_switch(name);
  if (!id) throw ProgramError("switch " + to_string(name) + " has no set_sw distribution");
  auto outs = prog.outcomes(*id);
  auto ps = prog.probs(*id);
  return {{outs.begin(), outs.end()}, {ps.begin(), ps.end()}};
}

std::string to_string(const Program& prog) {
  std::ostringstream os;
  for (const auto& c : prog.clauses()) {
    os << to_string(c.head);
    if (!c.body.empty()) {
      os << " :-\n";
      for (std::size_t i = 0; i < c.body.size(); ++i) {
        os << "    " << to_string(c.body[i]) << (i + 1 < c.body.size() ? ",\n" : "");
      }
    }
    os << ".\n";
  }
  for (const auto& v : prog.values()) {
    os << "values(" << to_string(v.pattern) << ", " << to_string(Term::list(v.outcomes)) << ").\n";
  }
  for (const auto& d : prog.switches()) {
    std::vector<Term> ps;
    for (double p : d.probs) ps.push_back(Term::real(p));
    os << ":- set_sw(" << to_string(d.name) << ", " << to_string(Term::list(ps)) << ").\n";
  }
  return os.str();
}

}  // namespace amcmc
