#include "amcmc/adapt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace amcmc {

double QStore::q(const SwitchInstance& k, Outcome v) const {
  auto it = table_.find(k);
  if (it == table_.end() || v >= it->second.size()) return 1.0;
  return it->second[v].q;
}

QEntry QStore::entry(const SwitchInstance& k, Outcome v) const {
  auto it = table_.find(k);
  if (it == table_.end() || v >= it->second.size()) return {};
  return it->second[v];
}

const std::vector<QEntry>* QStore::find(const SwitchInstance& k) const {
  auto it = table_.find(k);
  return it == table_.end() ? nullptr : &it->second;
}

void QStore::update(const SwitchInstance& k, Outcome v, double reward) {
  auto& row = table_[k];
  if (row.size() <= v) row.resize(v + 1);
  QEntry& e = row[v];
  QEntry before = e;
  e.total += reward;
  e.count += 1;
  e.q = mode_ == QMode::Averaging ? e.total / static_cast<double>(e.count) : reward;
  if (hook_) hook_({k, v}, before, e, reward);
}

std::size_t QStore::size() const {
  std::size_t n = 0;
  for (const auto& [k, row] : table_) {
    for (const auto& e : row) n += e.count > 0;
  }
  return n;
}

std::vector<std::pair<QKey, QEntry>> QStore::entries() const {
  std::vector<std::pair<QKey, QEntry>> out;
  for (const auto& [k, row] : table_) {
    for (Outcome v = 0; v < row.size(); ++v) {
      if (row[v].count > 0) out.push_back({{k, v}, row[v]});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

void adapt(std::span<const TraceEntry> trace, double reward, QStore& store, const Program& prog) {
  double r = reward;
  for (std::size_t j = trace.size(); j-- > 0;) {
    const auto& t = trace[j];
    store.update(t.key, t.value, r);
    if (j == 0) break;
    auto probs = prog.probs(t.key.sw);
    const auto* row = store.find(t.key);
    r = 0.0;
    for (Outcome v = 0; v < probs.size(); ++v) {
      double q = row && v < row->size() ? (*row)[v].q : 1.0;
      r += probs[v] * q;
    }
  }
}

void adapted_dist(const QStore& store, const SwitchInstance& k, const Program& prog,
                  std::vector<double>& out) {
  auto probs = prog.probs(k.sw);
  out.assign(probs.begin(), probs.end());
  const auto* row = store.find(k);
  if (!row) return;
  auto qv = [&](Outcome v) { return v < row->size() ? (*row)[v].q : 1.0; };
  bool uniform = true;
  for (Outcome v = 1; v < probs.size(); ++v) uniform = uniform && qv(v) == qv(0);
  if (uniform) return;
  double sum = 0.0;
  for (Outcome v = 0; v < probs.size(); ++v) {
    out[v] = probs[v] * std::max(qv(v), kQFloor);
    sum += out[v];
  }
  for (auto& x : out) x /= sum;
}

std::vector<double> adapted_dist(const QStore& store, const SwitchInstance& k,
                                 const Program& prog) {
  std::vector<double> out;
  adapted_dist(store, k, prog, out);
  return out;
}

Outcome AdaptedDistribution::draw(const SwitchInstance& k, Rng& rng) {
  adapted_dist(*store_, k, prog_, scratch_);
  return rng.categorical(scratch_);
}

double AdaptedDistribution::probability(const SwitchInstance& k, Outcome v) {
  if (!store_->find(k)) return prog_.probs(k.sw)[v];
  adapted_dist(*store_, k, prog_, scratch_);
  return scratch_[v];
}

bool adaptation_increment_bound(const QEntry& before, const QEntry& after) {
  return std::abs(after.q - before.q) <= 1.0 / static_cast<double>(before.count + 1) + 1e-15;
}

void RewardMonitor::observe(const QKey& key, double reward) {
  ++observations_;
  auto& row = last_[key.inst];
  if (row.size() <= key.value) row.resize(key.value + 1, NAN);
  double& prev = row[key.value];
  if (!std::isnan(prev) && reward > prev + tolerance_) ++violations_;
  prev = reward;
}

QStore::UpdateHook RewardMonitor::hook() {
  return [this](const QKey& key, const QEntry&, const QEntry&, double reward) {
    observe(key, reward);
  };
}

void write_qstore_csv(std::ostream& os, const QStore& store, const Program& prog) {
  os << "switch,instance,outcome,q,count,total\n";
  auto csv_field = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  // Shortest text that reads back to the same double.
  auto num = [](double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
  };
  for (const auto& [key, e] : store.entries()) {
    os << csv_field(to_string(prog.switch_at(key.inst.sw).name)) << ','
       << csv_field(to_string(key.inst.inst.to_term())) << ','
       << csv_field(to_string(prog.outcomes(key.inst.sw)[key.value])) << ',' << num(e.q) << ','
       << e.count << ',' << num(e.total) << '\n';
  }
}

}  // namespace amcmc
