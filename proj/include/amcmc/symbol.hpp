#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string_view>

namespace amcmc {

/// Interned atom / functor name. Interning is process-wide and thread-safe;
/// ids are stable for the lifetime of the process.
class Symbol {
 public:
  constexpr Symbol() = default;

  static Symbol intern(std::string_view name);
  static constexpr Symbol from_id(std::uint32_t id) { return Symbol(id); }

  std::string_view name() const;
  constexpr std::uint32_t id() const { return id_; }

  friend constexpr bool operator==(Symbol, Symbol) = default;
  friend constexpr auto operator<=>(Symbol, Symbol) = default;

 private:
  constexpr explicit Symbol(std::uint32_t id) : id_(id) {}
  std::uint32_t id_ = 0;
};

}  // namespace amcmc

template <>
struct std::hash<amcmc::Symbol> {
  std::size_t operator()(amcmc::Symbol s) const noexcept { return s.id(); }
};
