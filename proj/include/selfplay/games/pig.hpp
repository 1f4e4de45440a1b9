#pragma once

#include <array>
#include <optional>
#include <stdexcept>

#include "selfplay/core.hpp"

namespace selfplay::pig {

enum class Move { roll, hold };

struct Config {
  int target = 30;
  int die_sides = 6;

  friend bool operator==(const Config&, const Config&) = default;
};

struct State {
  std::array<int, 2> banked{0, 0};
  int turn_total = 0;
  int target = 30;
  int die_sides = 6;
  Role to_act = Role::p0;

  friend bool operator==(const State&, const State&) = default;
};

struct Resolution {
  State next;
  bool terminal = false;
  std::optional<Role> winner;
};

inline State initial_state(const Config& cfg) {
  if (cfg.target <= 0) throw std::invalid_argument("pig target must be positive");
  if (cfg.die_sides < 2) throw std::invalid_argument("pig die needs >= 2 sides");
  State s;
  s.target = cfg.target;
  s.die_sides = cfg.die_sides;
  return s;
}

/// Holding with nothing accumulated is a no-op, so only rolling is offered
/// at the start of a turn.
inline bool may_hold(const State& s) noexcept { return s.turn_total > 0; }

/// Rolling a 1 wipes the turn total and passes the die; any other face is
/// added and the same role continues. Holding banks the turn total, and a
/// bank reaching the target wins.
inline Resolution resolve(State s, Move move, int die) {
  const int me = index(s.to_act);
  if (move == Move::roll) {
    if (die < 1 || die > s.die_sides) throw std::invalid_argument("die face out of range");
    if (die == 1) {
      s.turn_total = 0;
      s.to_act = other(s.to_act);
    } else {
      s.turn_total += die;
    }
    return {s, false, std::nullopt};
  }
  s.banked[me] += s.turn_total;
  s.turn_total = 0;
  if (s.banked[me] >= s.target) {
    const Role winner = s.to_act;
    return {s, true, winner};
  }
  s.to_act = other(s.to_act);
  return {s, false, std::nullopt};
}

}  // namespace selfplay::pig
