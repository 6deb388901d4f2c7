#include "machine.hpp"

#include <utility>

#include "amcmc/errors.hpp"

namespace amcmc::detail {
namespace {

constexpr Cell kUnset{Tag::Local, 0, -1};

Cell ref_cell(std::uint32_t i) { return {Tag::Ref, 0, static_cast<std::int64_t>(i)}; }

std::string pred_name(Symbol s, std::size_t arity) {
  return std::string(s.name()) + "/" + std::to_string(arity);
}

}  // namespace

Machine::Machine(Program prog) : prog_(std::move(prog)), impl_(&prog_.impl()) {
  for (const auto& [key, list] : impl_->index) preds_[key].clauses = &list;
  const std::pair<std::pair<const char*, std::size_t>, Builtin> builtins[] = {
      {{"true", 0}, Builtin::True}, {{"fail", 0}, Builtin::Fail}, {{"false", 0}, Builtin::Fail},
      {{",", 2}, Builtin::Conj},    {{"=", 2}, Builtin::Unify},   {{"is", 2}, Builtin::Is},
      {{"<", 2}, Builtin::Lt},      {{">", 2}, Builtin::Gt},      {{"=<", 2}, Builtin::Le},
      {{">=", 2}, Builtin::Ge},     {{"=:=", 2}, Builtin::Eq},    {{"=\\=", 2}, Builtin::Ne},
      {{"msw", 2}, Builtin::Msw2},  {{"msw", 3}, Builtin::Msw3}};
  for (const auto& [sig, b] : builtins) {
    preds_[pred_key(Symbol::intern(sig.first), sig.second)].builtin = b;
  }
}

void Machine::reset() {
  heap_.clear();
  trail_.clear();
  goals_.clear();
  cps_.clear();
  arena_.clear();
  steps_ = 0;
  cur_ = -1;
}

bool Machine::run_sample(const Term& goal, MswPolicy& policy) {
  reset();
  search_ = false;
  policy_ = &policy;
  Cell g = put_term(goal);
  return solve(g);
}

bool Machine::run_search(const Term& goal, Rng& rng, Assignment& assignment) {
  reset();
  search_ = true;
  rng_ = &rng;
  assignment_ = &assignment;
  Cell g = put_term(goal);
  return solve(g);
}

std::int32_t Machine::push_goal(Cell goal, std::int32_t next) {
  goals_.push_back({goal, next});
  return static_cast<std::int32_t>(goals_.size() - 1);
}

bool Machine::solve(Cell goal) {
  cur_ = push_goal(goal, -1);
  for (;;) {
    if (cur_ < 0) return true;
    GoalNode n = goals_[static_cast<std::size_t>(cur_)];
    if (++steps_ > limit_) throw StepLimitExceeded(limit_);
    if (!step(n.goal, n.next) && !backtrack()) return false;
  }
}

bool Machine::step(Cell goal, std::int32_t cont) {
  Cell g = deref(goal);
  std::uint64_t key;
  std::uint32_t args_at = 0;
  if (g.tag == Tag::Atom) {
    key = pred_key(Symbol::from_id(static_cast<std::uint32_t>(g.val)), 0);
  } else if (g.tag == Tag::Str) {
    const Cell& f = heap_[static_cast<std::size_t>(g.val)];
    key = pred_key(Symbol::from_id(static_cast<std::uint32_t>(f.val)), f.arity);
    args_at = static_cast<std::uint32_t>(g.val) + 1;
  } else if (g.tag == Tag::Ref) {
    throw EvalError("goal is an unbound variable");
  } else {
    throw EvalError("goal " + to_string(get_term(g)) + " is not callable");
  }

  auto it = preds_.find(key);
  if (it == preds_.end()) {
    Term t = get_term(g);
    throw EvalError("unknown predicate " + pred_name(t.name(), t.arity()));
  }
  const PredEntry& pe = it->second;
  auto arg = [&](std::uint32_t i) { return heap_[args_at + i]; };
  switch (pe.builtin) {
    case Builtin::None:
      return call_user(g, *pe.clauses, cont);
    case Builtin::True:
      cur_ = cont;
      return true;
    case Builtin::Fail:
      return false;
    case Builtin::Conj: {
      Cell a = arg(0);
      Cell b = arg(1);
      cur_ = push_goal(a, push_goal(b, cont));
      return true;
    }
    case Builtin::Unify:
      cur_ = cont;
      return unify(arg(0), arg(1));
    case Builtin::Is: {
      std::int64_t v = eval(arg(1));
      cur_ = cont;
      return unify(arg(0), int_cell(v));
    }
    case Builtin::Lt:
    case Builtin::Gt:
    case Builtin::Le:
    case Builtin::Ge:
    case Builtin::Eq:
    case Builtin::Ne: {
      std::int64_t a = eval(arg(0));
      std::int64_t b = eval(arg(1));
      cur_ = cont;
      switch (pe.builtin) {
        case Builtin::Lt:
          return a < b;
        case Builtin::Gt:
          return a > b;
        case Builtin::Le:
          return a <= b;
        case Builtin::Ge:
          return a >= b;
        case Builtin::Eq:
          return a == b;
        default:
          return a != b;
      }
    }
    case Builtin::Msw2:
      return msw(arg(0), int_cell(0), arg(1), cont);
    case Builtin::Msw3:
      return msw(arg(0), arg(1), arg(2), cont);
  }
  return false;
}

bool Machine::call_user(Cell g, const std::vector<std::uint32_t>& list, std::int32_t cont) {
  std::uint32_t arity = 0;
  std::uint32_t args_at = 0;
  if (g.tag == Tag::Str) {
    arity = heap_[static_cast<std::size_t>(g.val)].arity;
    args_at = static_cast<std::uint32_t>(g.val) + 1;
  }
  auto n = static_cast<std::uint32_t>(list.size());
  ChoicePoint cp{};
  cp.kind = CpKind::Clause;
  cp.goal = g;
  cp.cont = cont;
  cp.heap_top = static_cast<std::uint32_t>(heap_.size());
  cp.trail_top = static_cast<std::uint32_t>(trail_.size());
  cp.goals_top = static_cast<std::uint32_t>(goals_.size());
  cp.list = &list;
  cp.assign_mark = search_ ? static_cast<std::uint32_t>(assignment_->size()) : 0;

  if (!search_) {
    std::uint32_t first = next_match(list, 0, args_at, arity);
    if (first == n) return false;
    std::uint32_t second = next_match(list, first + 1, args_at, arity);
    if (second < n) {
      cp.in_arena = false;
      cp.alt_pos = second;
      cps_.push_back(cp);
    }
    return try_clause(list[first], args_at, arity, cont);
  }

  auto begin = static_cast<std::uint32_t>(arena_.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    if (clause_matches(impl_->code[list[i]], args_at, arity)) arena_.push_back(list[i]);
  }
  auto count = static_cast<std::uint32_t>(arena_.size()) - begin;
  if (count == 0) return false;
  rng_->shuffle(std::span<std::uint32_t>(arena_.data() + begin, count));
  std::uint32_t first = arena_[begin];
  if (count > 1) {
    cp.in_arena = true;
    cp.alt_begin = begin;
    cp.alt_count = count;
    cp.alt_pos = 1;
    cps_.push_back(cp);
  } else {
    arena_.resize(begin);
  }
  return try_clause(first, args_at, arity, cont);
}

bool Machine::clause_matches(const CompiledClause& cc, std::uint32_t args_at,
                             std::uint32_t arity) const {
  for (std::uint32_t a = 0; a < arity; ++a) {
    const ArgKey& k = cc.keys[a];
    if (k.any) continue;
    Cell c = deref(heap_[args_at + a]);
    switch (c.tag) {
      case Tag::Ref:
        continue;
      case Tag::Atom:
      case Tag::Int:
        if (c.tag != k.tag || c.val != k.val) return false;
        continue;
      case Tag::Str: {
        const Cell& f = heap_[static_cast<std::size_t>(c.val)];
        if (k.tag != Tag::Functor || f.val != k.val || f.arity != k.arity) return false;
        continue;
      }
      default:
        return false;
    }
  }
  return true;
}

std::uint32_t Machine::next_match(const std::vector<std::uint32_t>& list, std::uint32_t from,
                                  std::uint32_t args_at, std::uint32_t arity) const {
  auto n = static_cast<std::uint32_t>(list.size());
  for (std::uint32_t p = from; p < n; ++p) {
    if (clause_matches(impl_->code[list[p]], args_at, arity)) return p;
  }
  return n;
}

bool Machine::try_clause(std::uint32_t ci, std::uint32_t args_at, std::uint32_t arity,
                         std::int32_t cont) {
  const CompiledClause& cc = impl_->code[ci];
  locals_.assign(cc.num_vars, kUnset);
  if (cc.head.tag == Tag::Str) {
    auto off = static_cast<std::size_t>(cc.head.val);
    for (std::uint32_t a = 0; a < arity; ++a) {
      if (!unify_head(cc, cc.cells[off + 1 + a], heap_[args_at + a])) return false;
    }
  }
  std::int32_t next = cont;
  for (auto it = cc.body.rbegin(); it != cc.body.rend(); ++it) next = push_goal(build(cc, *it), next);
  cur_ = next;
  return true;
}

bool Machine::unify_head(const CompiledClause& cc, Cell c, Cell h) {
  switch (c.tag) {
    case Tag::Local: {
      Cell& l = locals_[static_cast<std::size_t>(c.val)];
      if (l.tag == Tag::Local) {
        l = h;
        return true;
      }
      return unify(l, h);
    }
    case Tag::Atom:
    case Tag::Int:
      h = deref(h);
      if (h.tag == Tag::Ref) {
        bind(static_cast<std::uint32_t>(h.val), c);
        return true;
      }
      return h.tag == c.tag && h.val == c.val;
    case Tag::Str: {
      h = deref(h);
      if (h.tag == Tag::Ref) {
        Cell b = build(cc, c);
        if (occurs(static_cast<std::uint32_t>(h.val), b)) return false;
        bind(static_cast<std::uint32_t>(h.val), b);
        return true;
      }
      if (h.tag != Tag::Str) return false;
      const Cell f = cc.cells[static_cast<std::size_t>(c.val)];
      const Cell hf = heap_[static_cast<std::size_t>(h.val)];
      if (f.val != hf.val || f.arity != hf.arity) return false;
      for (std::uint32_t i = 0; i < f.arity; ++i) {
        if (!unify_head(cc, cc.cells[static_cast<std::size_t>(c.val) + 1 + i],
                        heap_[static_cast<std::size_t>(h.val) + 1 + i])) {
          return false;
        }
      }
      return true;
    }
    default:
      return false;
  }
}

Cell Machine::build(const CompiledClause& cc, Cell c) {
  switch (c.tag) {
    case Tag::Local: {
      Cell& l = locals_[static_cast<std::size_t>(c.val)];
      if (l.tag == Tag::Local) {
        auto idx = static_cast<std::uint32_t>(heap_.size());
        heap_.push_back(ref_cell(idx));
        l = ref_cell(idx);
      }
      return l;
    }
    case Tag::Str: {
      const Cell f = cc.cells[static_cast<std::size_t>(c.val)];
      auto base = heap_.size();
      heap_.resize(base + 1 + f.arity);
      heap_[base] = f;
      for (std::uint32_t i = 0; i < f.arity; ++i) {
        Cell a = build(cc, cc.cells[static_cast<std::size_t>(c.val) + 1 + i]);
        heap_[base + 1 + i] = a;
      }
      return {Tag::Str, 0, static_cast<std::int64_t>(base)};
    }
    default:
      return c;
  }
}

bool Machine::msw(Cell sw, Cell inst, Cell value, std::int32_t cont) {
  key_scratch_.clear();
  // serialise the switch name; it must be ground
  std::vector<Cell> todo{sw};
  while (!todo.empty()) {
    Cell c = deref(todo.back());
    todo.pop_back();
    if (c.tag == Tag::Ref) {
      throw EvalError("msw switch name " + to_string(get_term(sw)) + " is not ground");
    }
    if (c.tag == Tag::Str) {
      const Cell f = heap_[static_cast<std::size_t>(c.val)];
      key_scratch_.push_back(f);
      for (std::uint32_t i = f.arity; i > 0; --i) {
        todo.push_back(heap_[static_cast<std::size_t>(c.val) + i]);
      }
    } else {
      key_scratch_.push_back(c);
    }
  }
  auto it = impl_->switch_ids.find(key_scratch_);
  if (it == impl_->switch_ids.end()) {
    Term name = get_term(sw);
    if (prog_.find_values(name)) {
      throw EvalError("switch " + to_string(name) + " has no set_sw distribution");
    }
    throw EvalError("unknown switch " + to_string(name));
  }
  Cell ic = deref(inst);
  SwitchInstance key{it->second, {}};
  if (ic.tag == Tag::Int) {
    key.inst = {InstanceKey::Kind::Int, ic.val};
  } else if (ic.tag == Tag::Atom) {
    key.inst = {InstanceKey::Kind::Atom, ic.val};
  } else {
    throw EvalError("msw instance " + to_string(get_term(inst)) +
                    " must be an integer or an atom");
  }

  if (!search_) {
    Outcome v = policy_->pick(key);
    cur_ = cont;
    return unify(value, outcome_cell(key.sw, v));
  }

  if (auto v = assignment_->get(key)) {
    cur_ = cont;
    return unify(value, outcome_cell(key.sw, *v));
  }
  auto probs = prog_.probs(key.sw);
  auto begin = static_cast<std::uint32_t>(arena_.size());
  for (std::uint32_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) arena_.push_back(i);
  }
  auto count = static_cast<std::uint32_t>(arena_.size()) - begin;
  rng_->shuffle(std::span<std::uint32_t>(arena_.data() + begin, count));
  Outcome first = arena_[begin];
  if (count > 1) {
    ChoicePoint cp{};
    cp.kind = CpKind::Msw;
    cp.in_arena = true;
    cp.goal = value;
    cp.cont = cont;
    cp.heap_top = static_cast<std::uint32_t>(heap_.size());
    cp.trail_top = static_cast<std::uint32_t>(trail_.size());
    cp.goals_top = static_cast<std::uint32_t>(goals_.size());
    cp.list = nullptr;
    cp.alt_begin = begin;
    cp.alt_count = count;
    cp.alt_pos = 1;
    cp.key = key;
    cp.assign_mark = static_cast<std::uint32_t>(assignment_->size());
    cps_.push_back(cp);
  } else {
    arena_.resize(begin);
  }
  assignment_->set(key, first);
  cur_ = cont;
  return unify(value, outcome_cell(key.sw, first));
}

Cell Machine::outcome_cell(SwitchId sw, Outcome v) {
  std::size_t vi = prog_.switch_at(sw).values_index;
  Cell c = impl_->outcome_cells[vi][v];
  if (c.tag != Tag::Ref) return c;
  return put_term(impl_->values[vi].outcomes[v]);
}

void Machine::restore(const ChoicePoint& cp) {
  while (trail_.size() > cp.trail_top) {
    std::uint32_t v = trail_.back();
    trail_.pop_back();
    heap_[v] = ref_cell(v);
  }
  heap_.resize(cp.heap_top);
  goals_.resize(cp.goals_top);
}

bool Machine::backtrack() {
  while (!cps_.empty()) {
    ChoicePoint& top = cps_.back();
    restore(top);
    if (search_) {
      while (assignment_->size() > top.assign_mark) assignment_->pop_back();
    }
    if (top.kind == CpKind::Clause) {
      Cell g = top.goal;
      std::int32_t cont = top.cont;
      std::uint32_t arity = 0;
      std::uint32_t args_at = 0;
      if (g.tag == Tag::Str) {
        arity = heap_[static_cast<std::size_t>(g.val)].arity;
        args_at = static_cast<std::uint32_t>(g.val) + 1;
      }
      std::uint32_t ci;
      if (top.in_arena) {
        ci = arena_[top.alt_begin + top.alt_pos];
        ++top.alt_pos;
        arena_.resize(top.alt_begin + top.alt_count);
        if (top.alt_pos == top.alt_count) {
          arena_.resize(top.alt_begin);
          cps_.pop_back();
        }
      } else {
        const auto& list = *top.list;
        ci = list[top.alt_pos];
        std::uint32_t next = next_match(list, top.alt_pos + 1, args_at, arity);
        if (next == list.size()) {
          cps_.pop_back();
        } else {
          top.alt_pos = next;
        }
      }
      if (try_clause(ci, args_at, arity, cont)) return true;
      continue;
    }

    Outcome v = arena_[top.alt_begin + top.alt_pos];
    ++top.alt_pos;
    arena_.resize(top.alt_begin + top.alt_count);
    SwitchInstance key = top.key;
    Cell value = top.goal;
    std::int32_t cont = top.cont;
    if (top.alt_pos == top.alt_count) {
      arena_.resize(top.alt_begin);
      cps_.pop_back();
    }
    assignment_->set(key, v);
    cur_ = cont;
    if (unify(value, outcome_cell(key.sw, v))) return true;
  }
  return false;
}

Cell Machine::deref(Cell c) const {
  while (c.tag == Tag::Ref) {
    const Cell& n = heap_[static_cast<std::size_t>(c.val)];
    if (n.tag == Tag::Ref && n.val == c.val) return c;
    c = n;
  }
  return c;
}

void Machine::bind(std::uint32_t var, Cell value) {
  heap_[var] = value;
  trail_.push_back(var);
}

bool Machine::occurs(std::uint32_t var, Cell t) const {
  t = deref(t);
  if (t.tag == Tag::Ref) return t.val == var;
  if (t.tag != Tag::Str) return false;
  const Cell f = heap_[static_cast<std::size_t>(t.val)];
  for (std::uint32_t i = 0; i < f.arity; ++i) {
    if (occurs(var, heap_[static_cast<std::size_t>(t.val) + 1 + i])) return true;
  }
  return false;
}

bool Machine::unify(Cell a0, Cell b0) {
  ustack_.clear();
  ustack_.emplace_back(a0, b0);
  while (!ustack_.empty()) {
    auto [a, b] = ustack_.back();
    ustack_.pop_back();
    a = deref(a);
    b = deref(b);
    if (a.tag == Tag::Ref && b.tag == Tag::Ref) {
      if (a.val == b.val) continue;
      if (a.val < b.val) std::swap(a, b);
      bind(static_cast<std::uint32_t>(a.val), b);
      continue;
    }
    if (b.tag == Tag::Ref) std::swap(a, b);
    if (a.tag == Tag::Ref) {
      if (b.tag == Tag::Str && occurs(static_cast<std::uint32_t>(a.val), b)) return false;
      bind(static_cast<std::uint32_t>(a.val), b);
      continue;
    }
    if (a.tag != b.tag) return false;
    if (a.tag != Tag::Str) {
      if (a.val != b.val) return false;
      continue;
    }
    if (a.val == b.val) continue;
    const Cell fa = heap_[static_cast<std::size_t>(a.val)];
    const Cell fb = heap_[static_cast<std::size_t>(b.val)];
    if (fa.val != fb.val || fa.arity != fb.arity) return false;
    for (std::uint32_t i = 0; i < fa.arity; ++i) {
      ustack_.emplace_back(heap_[static_cast<std::size_t>(a.val) + 1 + i],
                           heap_[static_cast<std::size_t>(b.val) + 1 + i]);
    }
  }
  return true;
}

std::int64_t Machine::eval(Cell c) const {
  c = deref(c);
  switch (c.tag) {
    case Tag::Int:
      return c.val;
    case Tag::Ref:
      throw EvalError("arithmetic on an unbound variable");
    case Tag::Str:
      break;
    default:
      throw EvalError("cannot evaluate " + to_string(get_term(c)) + " as an integer expression");
  }
  const Cell f = heap_[static_cast<std::size_t>(c.val)];
  auto name = Symbol::from_id(static_cast<std::uint32_t>(f.val)).name();
  auto at = [&](std::uint32_t i) { return heap_[static_cast<std::size_t>(c.val) + 1 + i]; };
  if (f.arity == 1) {
    std::int64_t x = eval(at(0));
    if (name == "-") return -x;
    if (name == "abs") return x < 0 ? -x : x;
  } else if (f.arity == 2) {
    std::int64_t x = eval(at(0));
    std::int64_t y = eval(at(1));
    if (name == "+") return x + y;
    if (name == "-") return x - y;
    if (name == "*") return x * y;
    if (name == "min") return std::min(x, y);
    if (name == "max") return std::max(x, y);
    if (name == "//" || name == "mod") {
      if (y == 0) throw EvalError("integer division by zero");
      if (name == "//") return x / y;
      std::int64_t m = x % y;
      return (m != 0 && ((m < 0) != (y < 0))) ? m + y : m;
    }
  }
  throw EvalError("unknown arithmetic function " + std::string(name) + "/" +
                  std::to_string(f.arity));
}

Cell Machine::put_term(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Atom:
      return atom_cell(t.name());
    case Term::Kind::Int:
      return int_cell(t.int_value());
    case Term::Kind::Compound: {
      auto base = heap_.size();
      heap_.resize(base + 1 + t.arity());
      heap_[base] = {Tag::Functor, static_cast<std::uint32_t>(t.arity()), t.name().id()};
      for (std::size_t i = 0; i < t.arity(); ++i) {
        Cell a = put_term(t.arg(i));
        heap_[base + 1 + i] = a;
      }
      return {Tag::Str, 0, static_cast<std::int64_t>(base)};
    }
    case Term::Kind::Var:
      throw EvalError("goal is not ground");
    case Term::Kind::Real:
      throw EvalError("real number " + to_string(t) + " cannot appear in a goal");
  }
  return {};
}

Term Machine::get_term(Cell c) const {
  c = deref(c);
  switch (c.tag) {
    case Tag::Atom:
      return Term::atom(Symbol::from_id(static_cast<std::uint32_t>(c.val)));
    case Tag::Int:
      return Term::integer(c.val);
    case Tag::Ref:
      return Term::var(static_cast<VarId>(c.val));
    case Tag::Str: {
      const Cell f = heap_[static_cast<std::size_t>(c.val)];
      std::vector<Term> args;
      for (std::uint32_t i = 0; i < f.arity; ++i) {
        args.push_back(get_term(heap_[static_cast<std::size_t>(c.val) + 1 + i]));
      }
      return Term::compound(Symbol::from_id(static_cast<std::uint32_t>(f.val)), std::move(args));
    }
    default:
      return Term::atom("?");
  }
}

}  // namespace amcmc::detail
