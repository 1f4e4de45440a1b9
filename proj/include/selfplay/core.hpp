#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace selfplay {

enum class Role : int { p0 = 0, p1 = 1 };

constexpr int index(Role r) noexcept { return static_cast<int>(r); }
constexpr Role other(Role r) noexcept {
  return r == Role::p0 ? Role::p1 : Role::p0;
}
constexpr Role role_from_index(int i) { return i == 0 ? Role::p0 : Role::p1; }

/// Terminal rewards. r0 + r1 == 0 holds exactly for every constructor below.
struct Outcome {
  double r0 = 0.0;
  double r1 = 0.0;

  static constexpr Outcome from_r0(double r0) noexcept { return {r0, -r0}; }
  static constexpr Outcome draw() noexcept { return {0.0, 0.0}; }
  static constexpr Outcome win_for(Role r, double stake = 1.0) noexcept {
    return r == Role::p0 ? from_r0(stake) : from_r0(-stake);
  }

  constexpr double reward(Role r) const noexcept {
    return r == Role::p0 ? r0 : r1;
  }
  constexpr bool is_zero_sum() const noexcept { return r0 + r1 == 0.0; }

  friend constexpr bool operator==(const Outcome&, const Outcome&) = default;
};

enum class GameId { tictactoe, kuhn_poker, negotiation, pig_dice };

inline constexpr std::array kAllGames{GameId::tictactoe, GameId::kuhn_poker,
                                      GameId::negotiation, GameId::pig_dice};

constexpr std::string_view game_name(GameId g) noexcept {
  switch (g) {
    case GameId::tictactoe: return "tictactoe";
    case GameId::kuhn_poker: return "kuhn_poker";
    case GameId::negotiation: return "negotiation";
    case GameId::pig_dice: return "pig_dice";
  }
  return "unknown";
}

/// Human-readable title used inside evaluator prompts.
constexpr std::string_view game_title(GameId g) noexcept {
  switch (g) {
    case GameId::tictactoe: return "Tic-Tac-Toe";
    case GameId::kuhn_poker: return "Kuhn Poker";
    case GameId::negotiation: return "Simple Negotiation";
    case GameId::pig_dice: return "Pig Dice";
  }
  return "Unknown";
}

class UnknownGameError : public std::invalid_argument {
 public:
  explicit UnknownGameError(std::string_view name)
      : std::invalid_argument("unknown game id '" + std::string(name) + "'") {}
};

inline GameId parse_game_id(std::string_view name) {
  for (GameId g : kAllGames)
    if (game_name(g) == name) return g;
  throw UnknownGameError(name);
}

inline std::string join_tokens(const std::vector<std::string>& tokens,
                               std::string_view sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

/// Raised when an action outside the legal set is submitted.
class IllegalActionError : public std::invalid_argument {
 public:
  IllegalActionError(std::string token, std::vector<std::string> legal)
      : std::invalid_argument("illegal action '" + token + "'; legal: {" +
                              join_tokens(legal) + "}"),
        token_(std::move(token)),
        legal_(std::move(legal)) {}

  const std::string& token() const noexcept { return token_; }
  const std::vector<std::string>& legal() const noexcept { return legal_; }

 private:
  std::string token_;
  std::vector<std::string> legal_;
};

/// Raised when a response contains no \boxed{...} span at all.
class NoBoxedActionError : public std::invalid_argument {
 public:
  NoBoxedActionError() : std::invalid_argument("no \\boxed{} span in response") {}
};

class TerminalStateError : public std::logic_error {
 public:
  explicit TerminalStateError(std::string_view what)
      : std::logic_error(std::string(what) + " called on a terminal state") {}
};

}  // namespace selfplay
