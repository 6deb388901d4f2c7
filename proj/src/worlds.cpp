#include "amcmc/worlds.hpp"

#include <algorithm>
#include <sstream>

#include "amcmc/errors.hpp"
#include "amcmc/parse.hpp"

namespace amcmc {

InstanceKey InstanceKey::from_term(const Term& t) {
  if (t.is_int()) return {Kind::Int, t.int_value()};
  if (t.is_atom()) return {Kind::Atom, t.name().id()};
  throw ProgramError("switch instance " + to_string(t) + " must be an integer or an atom");
}

Term InstanceKey::to_term() const {
  if (kind == Kind::Int) return Term::integer(value);
  return Term::atom(Symbol::from_id(static_cast<std::uint32_t>(value)));
}

SwitchInstance make_instance(const Program& prog, const Term& name, const Term& instance) {
  if (auto id = prog.find_switch(name)) return {*id, InstanceKey::from_term(instance)};
  if (!name.is_ground()) throw ProgramError("switch " + to_string(name) + " is not ground");
  if (prog.find_values(name)) {
    throw ProgramError("switch " + to_string(name) + " has no set_sw distribution");
  }
  throw ProgramError("unknown switch " + to_string(name));
}

Assignment::Assignment(std::initializer_list<AssignmentEntry> entries) {
  for (const auto& e : entries) set(e.key, e.value);
}

std::ptrdiff_t Assignment::find(const SwitchInstance& k) const {
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), k,
                             [&](std::uint32_t pos, const SwitchInstance& key) {
                               return entries_[pos].key < key;
                             });
  if (it != sorted_.end() && entries_[*it].key == k) return *it;
  return -1;
}

std::optional<Outcome> Assignment::get(const SwitchInstance& k) const {
  auto pos = find(k);
  if (pos < 0) return std::nullopt;
  return entries_[static_cast<std::size_t>(pos)].value;
}

void Assignment::set(const SwitchInstance& k, Outcome v) {
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), k,
                             [&](std::uint32_t pos, const SwitchInstance& key) {
                               return entries_[pos].key < key;
                             });
  if (it != sorted_.end() && entries_[*it].key == k) {
    entries_[*it].value = v;
    return;
  }
  sorted_.insert(it, static_cast<std::uint32_t>(entries_.size()));
  entries_.push_back({k, v});
}

bool Assignment::erase(const SwitchInstance& k) {
  auto pos = find(k);
  if (pos < 0) return false;
  auto p = static_cast<std::uint32_t>(pos);
  entries_.erase(entries_.begin() + pos);
  sorted_.erase(std::find(sorted_.begin(), sorted_.end(), p));
  for (auto& s : sorted_) {
    if (s > p) --s;
  }
  return true;
}

void Assignment::pop_back() {
  auto p = static_cast<std::uint32_t>(entries_.size() - 1);
  sorted_.erase(std::find(sorted_.begin(), sorted_.end(), p));
  entries_.pop_back();
}

void Assignment::clear() {
  entries_.clear();
  sorted_.clear();
}

bool operator==(const Assignment& a, const Assignment& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.sorted_.size(); ++i) {
    if (!(a.entries_[a.sorted_[i]] == b.entries_[b.sorted_[i]])) return false;
  }
  return true;
}

Assignment replay(std::span<const TraceEntry> trace) {
  Assignment out;
  for (const auto& t : trace) out.set(t.key, t.value);
  return out;
}

Outcome pick_value(Assignment& sigma, const SwitchInstance& k, OutcomeSource& src, Rng& rng) {
  if (auto v = sigma.get(k)) return *v;
  Outcome v = src.draw(k, rng);
  sigma.set(k, v);
  return v;
}

bool extends(const Assignment& ext, const Assignment& base) {
  for (const auto& e : base.entries()) {
    auto v = ext.get(e.key);
    if (!v || *v != e.value) return false;
  }
  return true;
}

bool mutually_exclusive(const Assignment& a, const Assignment& b) {
  const Assignment& small = a.size() <= b.size() ? a : b;
  const Assignment& large = a.size() <= b.size() ? b : a;
  for (const auto& e : small.entries()) {
    auto v = large.get(e.key);
    if (v && *v != e.value) return true;
  }
  return false;
}

double prob(const Assignment& sigma, const Program& prog) {
  double p = 1.0;
  for (const auto& e : sigma.entries()) p *= prog.probs(e.key.sw)[e.value];
  return p;
}

Assignment forget(const Assignment& sigma, std::span<const SwitchInstance> keys) {
  Assignment out;
  for (const auto& e : sigma.entries()) {
    if (std::find(keys.begin(), keys.end(), e.key) == keys.end()) out.set(e.key, e.value);
  }
  return out;
}

Partition partition(const Assignment& a, const Assignment& b) {
  Partition out;
  for_each_part(a, b, [&](int part, const AssignmentEntry& e) {
    (part == 1 ? out.only : part == 2 ? out.differ : out.agree).set(e.key, e.value);
  });
  return out;
}

namespace {

void write_entry(std::ostream& os, const AssignmentEntry& e, const Program& prog) {
  os << to_string(prog.switch_at(e.key.sw).name) << '/' << to_string(e.key.inst.to_term()) << '='
     << to_string(prog.outcomes(e.key.sw)[e.value]) << '\n';
}

}  // namespace

std::string to_text(const Assignment& sigma, const Program& prog) {
  std::ostringstream os;
  for (const auto& e : sigma.entries()) write_entry(os, e, prog);
  return os.str();
}

std::string to_text(std::span<const TraceEntry> trace, const Program& prog) {
  std::ostringstream os;
  for (const auto& e : trace) write_entry(os, e, prog);
  return os.str();
}

Assignment parse_assignment(std::string_view text, const Program& prog) {
  Assignment out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
      line.remove_suffix(1);
    }
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    // split at depth 0: last '/' before the first '='
    int depth = 0;
    std::size_t slash = std::string_view::npos;
    std::size_t eq = std::string_view::npos;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size() && eq == std::string_view::npos; ++i) {
      char c = line[i];
      if (c == '\'') quoted = !quoted;
      if (quoted) continue;
      if (c == '(' || c == '[') ++depth;
      if (c == ')' || c == ']') --depth;
      if (depth == 0 && c == '/') slash = i;
      if (depth == 0 && c == '=') eq = i;
    }
    if (slash == std::string_view::npos || eq == std::string_view::npos || slash > eq) {
      throw ParseError("expected switch/instance=outcome", line_no, 1);
    }
    Term name = parse_term(line.substr(0, slash));
    Term inst = parse_term(line.substr(slash + 1, eq - slash - 1));
    Term value = parse_term(line.substr(eq + 1));
    SwitchInstance k = make_instance(prog, name, inst);
    auto idx = prog.outcome_index(k.sw, value);
    if (!idx) {
      throw ProgramError(to_string(value) + " is not an outcome of switch " + to_string(name));
    }
    out.set(k, *idx);
  }
  return out;
}

}  // namespace amcmc
