#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "selfplay/core.hpp"
#include "selfplay/game.hpp"
#include "selfplay/random.hpp"

namespace selfplay {

/// Canonical key of what the acting role can see. Equal keys must mean the
/// role cannot tell the states apart; the key never carries hidden data.
struct InfoStateKey {
  GameId game = GameId::tictactoe;
  Role role = Role::p0;
  std::string abstraction;

  std::string str() const {
    return std::string(game_name(game)) + "|p" + std::to_string(index(role)) + "|" +
           abstraction;
  }
  friend bool operator==(const InfoStateKey&, const InfoStateKey&) = default;
};

namespace detail {

/// Quintile of v over [0, range); values at or past the range land in 4.
inline int quintile(int v, int range) noexcept {
  if (range <= 0) return 0;
  return std::clamp(v * 5 / range, 0, 4);
}

}  // namespace detail

inline InfoStateKey info_state_key(const GameState& s, Role role) {
  InfoStateKey key{s.game, role, {}};
  std::visit(
      detail::overloaded{
          [&](const ttt::Board& b) { key.abstraction = ttt::board_string(b); },
          [&](const kuhn::Hand& h) {
            key.abstraction = std::string(1, kuhn::card_char(h.cards[index(role)])) + "|" +
                              kuhn::history_string(h.history);
          },
          [&](const negotiation::State& n) {
            const auto& mine = n.holdings[index(role)];
            const auto& theirs = n.holdings[index(other(role))];
            const auto& val = n.valuations[index(role)];
            std::string a = "v" + std::to_string(val[0]) + "-" + std::to_string(val[1]);
            a += "|h" + std::to_string(detail::quintile(mine[0], 21)) +
                 std::to_string(detail::quintile(mine[1], 21));
            a += "|o" + std::to_string(detail::quintile(theirs[0], 21)) +
                 std::to_string(detail::quintile(theirs[1], 21));
            if (!n.pending) a += "|none";
            else a += std::string(n.proposer == role ? "|out:" : "|in:") +
                      negotiation::offer_token(*n.pending);
            a += "|t" + std::to_string(n.turns_left);
            key.abstraction = std::move(a);
          },
          [&](const pig::State& p) {
            const int tt = s.acting_role == role ? p.turn_total : 0;
            const int tt_bucket = tt == 0 ? 0 : 1 + detail::quintile(tt, p.target);
            key.abstraction = "b" + std::to_string(detail::quintile(p.banked[index(role)], p.target)) +
                              "|o" + std::to_string(detail::quintile(p.banked[index(other(role))], p.target)) +
                              "|t" + std::to_string(tt_bucket);
          },
      },
      s.detail);
  return key;
}

class NonFiniteGradientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse map (info-state key string, action token) -> real. Missing entries
/// read as 0. Iteration order is lexicographic, which keeps serialization
/// and accumulation order deterministic.
class SparseTable {
 public:
  using Row = std::map<std::string, double, std::less<>>;
  using Rows = std::map<std::string, Row, std::less<>>;

  double get(std::string_view key, std::string_view action) const {
    const auto r = rows_.find(key);
    if (r == rows_.end()) return 0.0;
    const auto a = r->second.find(action);
    return a == r->second.end() ? 0.0 : a->second;
  }

  void set(std::string_view key, std::string_view action, double v) {
    row(key)[std::string(action)] = v;
  }

  void add(std::string_view key, std::string_view action, double v) {
    auto& r = row(key);
    auto it = r.find(action);
    if (it == r.end()) r.emplace(std::string(action), v);
    else it->second += v;
  }

  const Rows& rows() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_.empty(); }

  std::size_t entry_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [k, r] : rows_) n += r.size();
    return n;
  }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& [k, r] : rows_)
      for (const auto& [a, v] : r) f(k, a, v);
  }

  friend bool operator==(const SparseTable&, const SparseTable&) = default;

 private:
  Row& row(std::string_view key) {
    auto it = rows_.find(key);
    if (it == rows_.end()) it = rows_.emplace(std::string(key), Row{}).first;
    return it->second;
  }

  Rows rows_;
};

/// Role-conditioned tabular logits; the role is part of the key string.
using PolicyParameters = SparseTable;
using SparseGradient = SparseTable;

/// Softmax of logits/temperature over the legal tokens, in `legal` order.
inline std::vector<double> action_probabilities(const PolicyParameters& params,
                                                std::string_view key,
                                                std::span<const std::string> legal,
                                                double temperature = 1.0) {
  if (legal.empty()) throw std::invalid_argument("empty legal action set");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  std::vector<double> z(legal.size());
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < legal.size(); ++i) {
    z[i] = params.get(key, legal[i]) / temperature;
    zmax = std::max(zmax, z[i]);
  }
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    total += v;
  }
  for (double& v : z) v /= total;
  return z;
}

inline std::size_t legal_index(std::span<const std::string> legal, std::string_view action) {
  const auto it = std::find(legal.begin(), legal.end(), action);
  if (it == legal.end())
    throw IllegalActionError(std::string(action), {legal.begin(), legal.end()});
  return static_cast<std::size_t>(it - legal.begin());
}

inline double action_log_prob(const PolicyParameters& params, std::string_view key,
                              std::span<const std::string> legal, std::string_view action,
                              double temperature = 1.0) {
  const std::size_t chosen = legal_index(legal, action);
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  double zmax = -std::numeric_limits<double>::infinity();
  std::vector<double> z(legal.size());
  for (std::size_t i = 0; i < legal.size(); ++i) {
    z[i] = params.get(key, legal[i]) / temperature;
    zmax = std::max(zmax, z[i]);
  }
  double total = 0.0;
  for (double v : z) total += std::exp(v - zmax);
  return z[chosen] - zmax - std::log(total);
}

/// d log pi(action) / d logit(key, a) = (1[a == action] - pi(a)) / temperature
/// for every legal a; nothing else is touched.
inline void accumulate_log_prob_gradient(SparseGradient& grad, double scale,
                                         const PolicyParameters& params, std::string_view key,
                                         std::span<const std::string> legal,
                                         std::string_view action, double temperature = 1.0) {
  const std::size_t chosen = legal_index(legal, action);
  const auto probs = action_probabilities(params, key, legal, temperature);
  for (std::size_t i = 0; i < legal.size(); ++i) {
    const double g = ((i == chosen ? 1.0 : 0.0) - probs[i]) / temperature;
    grad.add(key, legal[i], scale * g);
  }
}

inline SparseGradient log_prob_gradient(const PolicyParameters& params, std::string_view key,
                                        std::span<const std::string> legal,
                                        std::string_view action, double temperature = 1.0) {
  SparseGradient g;
  accumulate_log_prob_gradient(g, 1.0, params, key, legal, action, temperature);
  return g;
}

/// Gradient ascent step. Rejects the whole update if any entry is non-finite.
inline PolicyParameters apply_update(PolicyParameters params, const SparseGradient& grad,
                                     double learning_rate) {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning rate must be finite and non-negative");
  grad.for_each([](const std::string& k, const std::string& a, double v) {
    if (!std::isfinite(v))
      throw NonFiniteGradientError("non-finite gradient at (" + k + ", " + a + ")");
  });
  grad.for_each([&](const std::string& k, const std::string& a, double v) {
    if (const double d = learning_rate * v; d != 0.0) params.add(k, a, d);
  });
  return params;
}

}  // namespace selfplay
