#pragma once

#include <string_view>

#include "amcmc/program.hpp"
#include "amcmc/term.hpp"

namespace amcmc {

/// Parse program text (see docs/grammar.md). Throws ParseError on syntax
/// errors and ProgramError on invariant violations.
Program parse_program(std::string_view text);

/// Parse a single term; an optional trailing '.' is accepted. Variables are
/// numbered from 0 in order of first occurrence.
Term parse_term(std::string_view text);

/// Parse a ground goal such as "reach(a,e)" or "p, q". `msw/2` goals are
/// normalised to `msw/3` with instance 0. Throws ParseError if the goal is
/// not ground or not callable.
Term parse_goal(std::string_view text);

}  // namespace amcmc
