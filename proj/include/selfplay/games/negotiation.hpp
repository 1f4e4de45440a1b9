#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "selfplay/core.hpp"

// Two-resource trading game. The ruleset below is a reconstruction with
// every number exposed through Config:
//   - both roles start with 10 Wood and 10 Gold;
//   - valuations are opposed (p0 values Gold, p1 values Wood);
//   - a turn is an offer, or (with an offer pending) accept / reject;
//   - an accepted trade transfers resources and ends the game;
//   - after turn_cap turns without a trade the game ends with no transfer;
//   - the role with the larger value gain wins, equal gains draw.
namespace selfplay::negotiation {

enum class Resource { wood = 0, gold = 1 };

constexpr std::string_view resource_token(Resource r) noexcept {
  return r == Resource::wood ? "wood" : "gold";
}
constexpr std::string_view resource_title(Resource r) noexcept {
  return r == Resource::wood ? "Wood" : "Gold";
}
constexpr Resource counterpart(Resource r) noexcept {
  return r == Resource::wood ? Resource::gold : Resource::wood;
}

using Holdings = std::array<int, 2>;    // indexed by Resource
using Valuation = std::array<int, 2>;   // value per unit, indexed by Resource

struct Config {
  std::array<Valuation, 2> valuations{{{5, 15}, {15, 5}}};
  Holdings initial_holdings{10, 10};
  int turn_cap = 8;
  int max_offer_qty = 5;

  friend bool operator==(const Config&, const Config&) = default;
};

/// Offer from the proposer's point of view: give give_qty of `give`, receive
/// get_qty of the other resource.
struct Offer {
  Resource give = Resource::wood;
  int give_qty = 1;
  int get_qty = 1;

  Resource get() const noexcept { return counterpart(give); }
  friend bool operator==(const Offer&, const Offer&) = default;
};

struct State {
  std::array<Holdings, 2> holdings{};
  std::array<Valuation, 2> valuations{};
  std::array<int, 2> initial_value{};
  std::optional<Offer> pending;
  Role proposer = Role::p0;  // author of `pending`
  int turns_left = 8;
  int max_offer_qty = 5;
  bool trade_done = false;

  friend bool operator==(const State&, const State&) = default;
};

inline int value(const Holdings& h, const Valuation& v) noexcept {
  return h[0] * v[0] + h[1] * v[1];
}

inline int role_value(const State& s, Role r) noexcept {
  return value(s.holdings[index(r)], s.valuations[index(r)]);
}

inline State initial_state(const Config& cfg) {
  State s;
  s.holdings = {cfg.initial_holdings, cfg.initial_holdings};
  s.valuations = cfg.valuations;
  for (int r = 0; r < 2; ++r) s.initial_value[r] = value(s.holdings[r], s.valuations[r]);
  s.turns_left = cfg.turn_cap;
  s.max_offer_qty = cfg.max_offer_qty;
  return s;
}

/// "offer_<n><give>_<m><get>", e.g. offer_3wood_2gold.
inline std::string offer_token(const Offer& o) {
  return "offer_" + std::to_string(o.give_qty) + std::string(resource_token(o.give)) +
         "_" + std::to_string(o.get_qty) + std::string(resource_token(o.get()));
}

inline std::optional<Offer> parse_offer_token(std::string_view t) {
  constexpr std::string_view prefix = "offer_";
  if (!t.starts_with(prefix)) return std::nullopt;
  t.remove_prefix(prefix.size());
  auto read_part = [](std::string_view part, int& qty, Resource& res) {
    int n = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), n);
    if (ec != std::errc{} || n <= 0) return false;
    std::string_view word(ptr, part.data() + part.size() - ptr);
    if (word == "wood") res = Resource::wood;
    else if (word == "gold") res = Resource::gold;
    else return false;
    qty = n;
    return true;
  };
  const auto sep = t.find('_');
  if (sep == std::string_view::npos) return std::nullopt;
  Offer o;
  Resource get{};
  if (!read_part(t.substr(0, sep), o.give_qty, o.give)) return std::nullopt;
  if (!read_part(t.substr(sep + 1), o.get_qty, get)) return std::nullopt;
  if (get == o.give) return std::nullopt;
  return o;
}

/// Legal tokens for the acting role, in lexicographic order.
inline std::vector<std::string> legal_tokens(const State& s, Role actor) {
  std::vector<std::string> out;
  if (s.pending && s.proposer != actor) {
    out.emplace_back("accept");
    out.emplace_back("reject");
  }
  const auto& mine = s.holdings[index(actor)];
  const auto& theirs = s.holdings[index(other(actor))];
  for (Resource give : {Resource::wood, Resource::gold}) {
    const Resource get = counterpart(give);
    const int max_give = std::min(s.max_offer_qty, mine[static_cast<int>(give)]);
    const int max_get = std::min(s.max_offer_qty, theirs[static_cast<int>(get)]);
    for (int g = 1; g <= max_give; ++g)
      for (int r = 1; r <= max_get; ++r) out.push_back(offer_token({give, g, r}));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Transfers an accepted offer between the two roles.
inline void execute_trade(State& s) {
  const Offer& o = *s.pending;
  auto& prop = s.holdings[index(s.proposer)];
  auto& resp = s.holdings[index(other(s.proposer))];
  const int give = static_cast<int>(o.give);
  const int get = static_cast<int>(o.get());
  if (prop[give] < o.give_qty || resp[get] < o.get_qty)
    throw std::logic_error("negotiation: offer exceeds holdings");
  prop[give] -= o.give_qty;
  resp[give] += o.give_qty;
  resp[get] -= o.get_qty;
  prop[get] += o.get_qty;
  s.trade_done = true;
}

/// Winner by value gain; equal gains draw.
inline Outcome score(const State& s) {
  const int gain0 = role_value(s, Role::p0) - s.initial_value[0];
  const int gain1 = role_value(s, Role::p1) - s.initial_value[1];
  if (gain0 > gain1) return Outcome::win_for(Role::p0);
  if (gain1 > gain0) return Outcome::win_for(Role::p1);
  return Outcome::draw();
}

struct StepOutcome {
  State next;
  bool terminal = false;
};

/// Applies a token that has already been checked against legal_tokens.
inline StepOutcome apply(State s, Role actor, std::string_view token) {
  if (token == "accept") {
    execute_trade(s);
  } else if (token == "reject") {
    s.pending.reset();
  } else {
    auto offer = parse_offer_token(token);
    if (!offer) throw std::invalid_argument("negotiation: bad token");
    s.pending = *offer;
    s.proposer = actor;
  }
  s.turns_left -= 1;
  const bool terminal = s.trade_done || s.turns_left <= 0;
  return {std::move(s), terminal};
}

}  // namespace selfplay::negotiation
