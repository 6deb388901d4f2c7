#pragma once

// Compiled form of a Program used by the resolution engine.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "amcmc/program.hpp"

namespace amcmc::detail {

enum class Tag : std::uint8_t { Ref, Atom, Int, Str, Functor, Local };

/// One heap word. Ref: val = heap index (self-reference = unbound).
/// Str: val = index of a Functor cell, arguments follow it contiguously.
/// Functor: val = symbol id, arity in `arity`. Local: clause variable number
/// (compiled code only).
struct Cell {
  Tag tag = Tag::Atom;
  std::uint32_t arity = 0;
  std::int64_t val = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

inline Cell atom_cell(Symbol s) { return {Tag::Atom, 0, s.id()}; }
inline Cell int_cell(std::int64_t v) { return {Tag::Int, 0, v}; }

/// Head-argument key used to skip clauses that cannot match.
struct ArgKey {
  bool any = true;
  Tag tag = Tag::Atom;  // Atom, Int or Functor
  std::uint32_t arity = 0;
  std::int64_t val = 0;
};

struct CompiledClause {
  std::vector<Cell> cells;  // Str values are offsets into `cells`
  Cell head;
  std::vector<Cell> body;
  std::uint32_t num_vars = 0;
  std::vector<ArgKey> keys;
};

struct PredKeyHash {
  std::size_t operator()(std::uint64_t k) const { return std::hash<std::uint64_t>{}(k); }
};

inline std::uint64_t pred_key(Symbol s, std::size_t arity) {
  return (static_cast<std::uint64_t>(s.id()) << 16) | static_cast<std::uint64_t>(arity);
}

/// Prefix serialisation of a ground term: atomic cells as themselves, a
/// compound as its Functor cell followed by its serialised arguments.
using GroundKey = std::vector<Cell>;

struct GroundKeyHash {
  std::size_t operator()(const GroundKey& k) const {
    std::size_t h = 1469598103934665603ULL;
    for (const auto& c : k) {
      h = (h ^ static_cast<std::size_t>(c.tag)) * 1099511628211ULL;
      h = (h ^ c.arity) * 1099511628211ULL;
      h = (h ^ static_cast<std::size_t>(c.val)) * 1099511628211ULL;
    }
    return h;
  }
};

void serialize_ground(const Term& t, GroundKey& out);

struct ProgramImpl {
  std::vector<Clause> clauses;
  std::vector<ValuesDecl> values;
  std::vector<SwitchDist> switches;

  std::vector<CompiledClause> code;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>, PredKeyHash> index;
  std::unordered_map<GroundKey, SwitchId, GroundKeyHash> switch_ids;
  std::unordered_map<Term, SwitchId, TermHash> switch_by_term;

  /// Per values declaration: constant cell for atomic outcomes, or a Ref
  /// cell for compound outcomes that must be built from the Term.
  std::vector<std::vector<Cell>> outcome_cells;
};

}  // namespace amcmc::detail
