#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "selfplay/core.hpp"
#include "selfplay/evaluator/types.hpp"
#include "selfplay/random.hpp"

namespace selfplay {

/// Exponential moving-average reward baseline per (game, role).
class BaselineTable {
 public:
  struct Entry {
    double value = 0.0;
    std::size_t updates = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  explicit BaselineTable(double decay = 0.95) : decay_(decay) { check_decay(decay); }

  double decay() const noexcept { return decay_; }

  double value(GameId g, Role r) const {
    const auto it = entries_.find({g, r});
    return it == entries_.end() ? 0.0 : it->second.value;
  }

  Entry entry(GameId g, Role r) const {
    const auto it = entries_.find({g, r});
    return it == entries_.end() ? Entry{} : it->second;
  }

  /// b <- decay * b + (1 - decay) * reward
  void update(GameId g, Role r, double reward) {
    if (!std::isfinite(reward)) throw std::invalid_argument("baseline update with non-finite reward");
    auto& e = entries_[{g, r}];
    e.value = decay_ * e.value + (1.0 - decay_) * reward;
    ++e.updates;
  }

  void set(GameId g, Role r, Entry e) {
    if (!std::isfinite(e.value)) throw std::invalid_argument("non-finite baseline value");
    entries_[{g, r}] = e;
  }

  const std::map<std::pair<GameId, Role>, Entry>& entries() const noexcept { return entries_; }

  friend bool operator==(const BaselineTable&, const BaselineTable&) = default;

 private:
  static void check_decay(double d) {
    if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("decay must lie in [0, 1]");
  }

  double decay_;
  std::map<std::pair<GameId, Role>, Entry> entries_;
};

inline BaselineTable update_baseline(BaselineTable table, GameId g, Role r, double reward) {
  table.update(g, r, reward);
  return table;
}

/// [{"game", "role", "value", "updates"}], ordered by (game, role).
inline nlohmann::json to_json(const BaselineTable& t) {
  auto arr = nlohmann::json::array();
  for (const auto& [k, e] : t.entries())
    arr.push_back({{"game", std::string(game_name(k.first))},
                   {"role", index(k.second)},
                   {"value", e.value},
                   {"updates", e.updates}});
  return arr;
}

inline BaselineTable baselines_from_json(const nlohmann::json& j, double decay) {
  BaselineTable t(decay);
  if (!j.is_array()) throw std::invalid_argument("baselines: expected an array");
  for (const auto& e : j) {
    const int r = e.at("role").get<int>();
    if (r != 0 && r != 1) throw std::invalid_argument("baselines: role must be 0 or 1");
    t.set(parse_game_id(e.at("game").get<std::string>()), role_from_index(r),
          {e.at("value").get<double>(), e.at("updates").get<std::size_t>()});
  }
  return t;
}

inline double game_advantage(double reward, double baseline) noexcept { return reward - baseline; }

struct ModulationWeights {
  double w_alpha = 0.35;
  double w_sigma = 0.35;
  double w_rho = 0.30;
  double w_d = 0.35;
  double w_a = 0.25;
  double w_c = 0.40;
  double beta = 0.2;

  friend bool operator==(const ModulationWeights&, const ModulationWeights&) = default;
};

inline double phi(const TransferabilityDims& d, const ModulationWeights& w = {}) {
  return w.w_alpha * d.abstraction + w.w_sigma * d.structure + w.w_rho * d.principle;
}

inline double psi(const EvolutionDims& d, const ModulationWeights& w = {}) {
  return w.w_d * d.deepening + w.w_a * d.adaptation + w.w_c * d.coherence;
}

inline double modulate(double a_game, double phi_value, double psi_value, double beta) {
  if (!std::isfinite(a_game) || !std::isfinite(phi_value) || !std::isfinite(psi_value) ||
      !std::isfinite(beta))
    throw std::domain_error("modulate: non-finite input");
  if (phi_value < 0.0 || phi_value > 1.0) throw std::domain_error("modulate: phi outside [0, 1]");
  if (psi_value < -1.0 || psi_value > 1.0) throw std::domain_error("modulate: psi outside [-1, 1]");
  if (beta < 0.0) throw std::domain_error("modulate: negative beta");
  return a_game * phi_value + beta * psi_value;
}

enum class FillSource { evaluated, batch_mean, neutral };

inline std::string_view fill_source_name(FillSource f) noexcept {
  switch (f) {
    case FillSource::evaluated: return "evaluated";
    case FillSource::batch_mean: return "batch_mean";
    case FillSource::neutral: return "neutral";
  }
  return "evaluated";
}

struct ScoredAdvantage {
  double a_game = 0.0;
  double phi = 1.0;
  double psi = 0.0;
  double a_mod = 0.0;
  FillSource fill_source = FillSource::evaluated;
};

/// Gives every entry whose status is not `scored` the mean (phi, psi) of the
/// scored entries in its group, or (1, 0) when its group has none; then
/// recomputes a_mod for the whole batch. `groups` (optional, parallel to
/// `batch`) restricts the mean to entries sharing a group id.
inline void fill_unscored(std::vector<ScoredAdvantage>& batch,
                          const std::vector<VerdictStatus>& statuses, double beta,
                          const std::vector<int>& groups = {}) {
  if (batch.empty()) throw std::invalid_argument("fill_unscored: empty batch");
  if (statuses.size() != batch.size())
    throw std::invalid_argument("fill_unscored: status count does not match batch");
  if (!groups.empty() && groups.size() != batch.size())
    throw std::invalid_argument("fill_unscored: group count does not match batch");
  auto group_of = [&](std::size_t i) { return groups.empty() ? 0 : groups[i]; };

  struct Sum {
    double phi = 0.0, psi = 0.0;
    std::size_t n = 0;
  };
  std::map<int, Sum> sums;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (statuses[i] != VerdictStatus::scored) continue;
    auto& s = sums[group_of(i)];
    s.phi += batch[i].phi;
    s.psi += batch[i].psi;
    ++s.n;
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto& e = batch[i];
    if (statuses[i] == VerdictStatus::scored) {
      e.fill_source = FillSource::evaluated;
    } else if (const auto it = sums.find(group_of(i)); it != sums.end()) {
      e.phi = it->second.phi / static_cast<double>(it->second.n);
      e.psi = it->second.psi / static_cast<double>(it->second.n);
      e.fill_source = FillSource::batch_mean;
    } else {
      e.phi = 1.0;
      e.psi = 0.0;
      e.fill_source = FillSource::neutral;
    }
    e.a_mod = modulate(e.a_game, e.phi, e.psi, beta);
  }
}

inline std::size_t subsample_count(std::size_t n, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw std::invalid_argument("subsample fraction must lie in [0, 1]");
  return std::min(n, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5)));
}

/// Uniform sample without replacement; indices returned ascending.
inline std::vector<std::size_t> select_subsample(std::size_t n, double fraction,
                                                 RandomStream& rng) {
  const std::size_t k = subsample_count(n, fraction);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Scores block attached to a trajectory record. Rubric dimensions are null
/// when the values were filled rather than evaluated.
inline nlohmann::json scores_block(const ScoredAdvantage& s, const EvaluatorVerdict& v,
                                   const std::optional<std::pair<double, double>>& a_game_by_role =
                                       std::nullopt,
                                   const std::optional<std::pair<double, double>>& a_mod_by_role =
                                       std::nullopt) {
  using nlohmann::json;
  json phi_j = {{"a", nullptr}, {"s", nullptr}, {"r", nullptr}, {"value", s.phi}};
  json psi_j = {{"d", nullptr}, {"a", nullptr}, {"c", nullptr}, {"value", s.psi}};
  if (s.fill_source == FillSource::evaluated && v.transferability && v.evolution) {
    phi_j["a"] = v.transferability->abstraction;
    phi_j["s"] = v.transferability->structure;
    phi_j["r"] = v.transferability->principle;
    psi_j["d"] = v.evolution->deepening;
    psi_j["a"] = v.evolution->adaptation;
    psi_j["c"] = v.evolution->coherence;
  }
  json j = {{"phi", phi_j},
            {"psi", psi_j},
            {"a_game", s.a_game},
            {"a_mod", s.a_mod},
            {"fill_source", std::string(fill_source_name(s.fill_source))},
            {"evaluator_id", v.evaluator_id}};
  if (v.status != VerdictStatus::scored) j["evaluator_status"] = std::string(status_name(v.status));
  if (!v.error.empty()) j["evaluator_error"] = v.error;
  if (a_game_by_role) j["a_game_by_role"] = {a_game_by_role->first, a_game_by_role->second};
  if (a_mod_by_role) j["a_mod_by_role"] = {a_mod_by_role->first, a_mod_by_role->second};
  return j;
}

}  // namespace selfplay
