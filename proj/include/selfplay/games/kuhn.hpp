#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "selfplay/core.hpp"

namespace selfplay::kuhn {

enum class Card { jack = 0, queen = 1, king = 2 };
enum class Move { check, bet, call, fold };

inline constexpr std::array kCards{Card::jack, Card::queen, Card::king};

constexpr char card_char(Card c) noexcept {
  switch (c) {
    case Card::jack: return 'J';
    case Card::queen: return 'Q';
    case Card::king: return 'K';
  }
  return '?';
}

constexpr std::string_view card_word(Card c) noexcept {
  switch (c) {
    case Card::jack: return "Jack";
    case Card::queen: return "Queen";
    case Card::king: return "King";
  }
  return "?";
}

constexpr std::string_view move_token(Move m) noexcept {
  switch (m) {
    case Move::check: return "check";
    case Move::bet: return "bet";
    case Move::call: return "call";
    case Move::fold: return "fold";
  }
  return "?";
}

inline Move parse_move(std::string_view token) {
  for (Move m : {Move::check, Move::bet, Move::call, Move::fold})
    if (move_token(m) == token) return m;
  throw std::invalid_argument("unknown Kuhn move '" + std::string(token) + "'");
}

using History = std::vector<Move>;

inline std::string history_string(const History& h) {
  std::string out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i) out += ',';
    out += move_token(h[i]);
  }
  return out;
}

struct Hand {
  std::array<Card, 2> cards{Card::jack, Card::queen};
  History history;
  std::array<int, 2> contribution{1, 1};  // ante of 1 each

  friend bool operator==(const Hand&, const Hand&) = default;
};

/// The five terminal sequences: cc, bc, bf, cbc, cbf.
inline bool is_terminal(const History& h) noexcept {
  using enum Move;
  if (h.size() == 2)
    return (h[0] == check && h[1] == check) || h[0] == bet;
  return h.size() == 3;
}

/// Lexicographically ordered legal moves for a non-terminal history.
inline std::vector<Move> legal_moves(const History& h) {
  if (is_terminal(h)) throw TerminalStateError("kuhn::legal_moves");
  if (!h.empty() && h.back() == Move::bet) return {Move::call, Move::fold};
  return {Move::bet, Move::check};
}

inline bool history_valid(const History& h) {
  History prefix;
  for (Move m : h) {
    if (is_terminal(prefix)) return false;
    const auto legal = legal_moves(prefix);
    if (std::find(legal.begin(), legal.end(), m) == legal.end()) return false;
    prefix.push_back(m);
  }
  return true;
}

/// Payoff for a completed hand, read off the rule table:
/// a fold after a bet pays 1 to the bettor, an unbet showdown pays 1 to the
/// high card, a called bet pays 2 to the high card.
inline Outcome payoff(const Hand& hand) {
  const History& h = hand.history;
  if (!history_valid(h) || !is_terminal(h))
    throw std::invalid_argument("kuhn::payoff on non-terminal history '" +
                                history_string(h) + "'");
  const Role high = hand.cards[0] > hand.cards[1] ? Role::p0 : Role::p1;
  using enum Move;
  if (h.back() == fold) {
    // bet-fold: p0 bet; check-bet-fold: p1 bet.
    const Role bettor = h.size() == 2 ? Role::p0 : Role::p1;
    return Outcome::win_for(bettor, 1.0);
  }
  if (h.back() == call) return Outcome::win_for(high, 2.0);
  return Outcome::win_for(high, 1.0);  // check-check
}

/// Applies a move, tracking chip contributions. Acting role is history parity.
inline Hand apply(Hand hand, Move m) {
  const auto legal = legal_moves(hand.history);
  if (std::find(legal.begin(), legal.end(), m) == legal.end())
    throw std::invalid_argument("illegal Kuhn move");
  const int actor = static_cast<int>(hand.history.size() % 2);
  if (m == Move::bet || m == Move::call) hand.contribution[actor] += 1;
  hand.history.push_back(m);
  return hand;
}

}  // namespace selfplay::kuhn
