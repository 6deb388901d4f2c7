#include "amcmc/symbol.hpp"

#include <deque>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>

namespace amcmc {
namespace {

struct SymbolTable {
  std::shared_mutex mutex;
  std::deque<std::string> names;
  std::unordered_map<std::string_view, std::uint32_t> ids;

  SymbolTable() { insert(""); }

  std::uint32_t insert(std::string_view name) {
    names.emplace_back(name);
    auto id = static_cast<std::uint32_t>(names.size() - 1);
    ids.emplace(names.back(), id);
    return id;
  }
};

SymbolTable& table() {
  static SymbolTable t;
  return t;
}

}  // namespace

Symbol Symbol::intern(std::string_view name) {
  auto& t = table();
  {
    std::shared_lock lock(t.mutex);
    if (auto it = t.ids.find(name); it != t.ids.end()) return Symbol(it->second);
  }
  std::unique_lock lock(t.mutex);
  if (auto it = t.ids.find(name); it != t.ids.end()) return Symbol(it->second);
  return Symbol(t.insert(name));
}

std::string_view Symbol::name() const {
  auto& t = table();
  std::shared_lock lock(t.mutex);
  return t.names[id_];
}

}  // namespace amcmc
