#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selfplay/policy.hpp"

// Deterministic reasoning text for template policies. Each game has an
// abstract register (case enumeration, expected-value phrasing) and a
// concrete register (game-token phrasing). The text is a pure function of
// (info-state key, action, style).
namespace selfplay {

enum class ReasoningStyle { abstract, concrete, mixed };

inline std::string_view style_name(ReasoningStyle s) noexcept {
  switch (s) {
    case ReasoningStyle::abstract: return "abstract";
    case ReasoningStyle::concrete: return "concrete";
    case ReasoningStyle::mixed: return "mixed";
  }
  return "abstract";
}

inline ReasoningStyle parse_reasoning_style(std::string_view s) {
  if (s == "abstract") return ReasoningStyle::abstract;
  if (s == "concrete") return ReasoningStyle::concrete;
  if (s == "mixed") return ReasoningStyle::mixed;
  throw std::invalid_argument("unknown reasoning style '" + std::string(s) + "'");
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::string_view kAdaptSentence =
    " The opponent's last move changes the picture, so I update my estimate in response.";
inline constexpr std::string_view kBackRefSentence =
    " Building on my earlier analysis, as established before, I extend the same framework"
    " instead of starting over.";

// ---- Kuhn Poker ---------------------------------------------------------

inline std::string kuhn_abstract(std::string_view abstraction, std::string_view action) {
  const auto parts = split(abstraction, '|');
  const char card = parts.at(0).empty() ? 'J' : parts[0][0];
  const std::string_view history = parts.size() > 1 ? parts[1] : "";
  const std::string_view rank = card == 'K' ? "highest" : card == 'Q' ? "middle" : "lowest";
  const int moves = history.empty() ? 0 : static_cast<int>(split(history, ',').size());
  const bool facing_bet = history.ends_with("bet");
  const bool raised = facing_bet || action == "bet";
  // Remaining opponent ranks: the highest sees two lower, the lowest two higher.
  const int lower = card == 'K' ? 2 : card == 'Q' ? 1 : 0;
  const char* p_lo = lower == 2 ? "1" : lower == 1 ? "1/2" : "0";
  const char* p_hi = lower == 0 ? "1" : lower == 1 ? "1/2" : "0";
  const int stake = raised ? 2 : 1;
  const int ev = stake * (lower - (2 - lower)) / 2;
  std::string out = "Enumerate the cases for the hidden signal: my private signal holds the ";
  out += rank;
  out += " of three ranks, so two cases remain.";
  if (moves >= 1) out += kAdaptSentence;
  if (moves >= 2) out += kBackRefSentence;
  out += " Case 1: the other signal ranks lower (probability ";
  out += p_lo;
  out += ") -> a showdown pays +" + std::to_string(stake) + ".";
  out += " Case 2: it ranks higher (probability ";
  out += p_hi;
  out += ") -> a showdown pays -" + std::to_string(stake) + ".";
  out += " Showdown expectation = " + std::to_string(stake) + " * (" + p_lo + " - " + p_hi +
         ") = " + (ev > 0 ? "+" : "") + std::to_string(ev) + ".";
  out += " If I choose ";
  out += action;
  out += ", then the expected value follows from this distribution over cases, so I select "
         "the option that maximizes expected utility.";
  return out;
}

inline std::string kuhn_concrete(std::string_view abstraction, std::string_view action) {
  const auto parts = split(abstraction, '|');
  const char card = parts.at(0).empty() ? 'J' : parts[0][0];
  const std::string_view history = parts.size() > 1 ? parts[1] : "";
  std::string out = card == 'K'   ? "I have the King, it beats everything."
                    : card == 'Q' ? "I have the Queen, it beats only the Jack."
                                  : "I have the Jack, the weakest card.";
  if (!history.empty()) out += " They played " + std::string(split(history, ',').back()) + ".";
  out += " I ";
  out += action;
  out += ".";
  return out;
}

// ---- Tic-Tac-Toe --------------------------------------------------------

inline std::string ttt_abstract(std::string_view board, std::string_view action) {
  int open = 0, mine = 0, theirs = 0;
  const int nx = static_cast<int>(std::count(board.begin(), board.end(), 'X'));
  const int no = static_cast<int>(std::count(board.begin(), board.end(), 'O'));
  const char me = nx == no ? 'X' : 'O';
  for (char c : board) {
    open += c == '.';
    mine += c == me;
    theirs += c != '.' && c != me;
  }
  std::string out = "Enumerate the cases: " + std::to_string(open) +
                    " open cells remain, and each candidate placement is one case in the "
                    "distribution of continuations.";
  if (theirs > 0) out += kAdaptSentence;
  if (mine > 0) out += kBackRefSentence;
  out += " Case 1: a placement that completes a line -> utility +1. Case 2: a placement that "
         "leaves an opposing line open -> utility -1. If I choose cell ";
  out += action;
  out += ", then the expected value of the position follows from these cases, so I select "
         "the option that maximizes expected utility.";
  return out;
}

inline std::string ttt_concrete(std::string_view board, std::string_view action) {
  const int cell = action.empty() ? 0 : action[0] - '0';
  const char* where = cell == 4                                            ? "the center"
                      : (cell == 0 || cell == 2 || cell == 6 || cell == 8) ? "a corner"
                                                                           : "an edge";
  std::string out = "I put my mark in ";
  out += where;
  out += ", cell ";
  out += action;
  out += ".";
  if (board.find_first_not_of('.') != std::string_view::npos) out += " The board is filling up.";
  return out;
}

// ---- Simple Negotiation -------------------------------------------------

struct NegotiationKeyView {
  int value_a = 0;  // per-unit value of the first resource
  int value_b = 0;
  std::string pending;  // "none", "in:<token>", "out:<token>"
  int turns_left = 0;
};

inline NegotiationKeyView parse_negotiation_key(std::string_view abstraction) {
  NegotiationKeyView v;
  const auto parts = split(abstraction, '|');
  if (!parts.empty() && parts[0].starts_with('v')) {
    const auto vals = split(parts[0].substr(1), '-');
    if (vals.size() == 2) {
      v.value_a = std::stoi(std::string(vals[0]));
      v.value_b = std::stoi(std::string(vals[1]));
    }
  }
  if (parts.size() > 3) v.pending = std::string(parts[3]);
  if (parts.size() > 4 && parts[4].starts_with('t'))
    v.turns_left = std::stoi(std::string(parts[4].substr(1)));
  return v;
}

inline std::string negotiation_abstract(std::string_view abstraction, std::string_view action) {
  const auto key = parse_negotiation_key(abstraction);
  std::string out =
      "Enumerate the cases for this exchange: my utility per unit is " +
      std::to_string(key.value_a) + " for resource A and " + std::to_string(key.value_b) +
      " for resource B, while the counterpart's valuation is an unknown distribution.";
  if (key.pending.starts_with("in:")) out += kAdaptSentence;
  if (key.pending.starts_with("out:") || key.turns_left < 7) out += kBackRefSentence;
  if (auto offer = negotiation::parse_offer_token(action)) {
    const int give_v = offer->give == negotiation::Resource::wood ? key.value_a : key.value_b;
    const int get_v = offer->give == negotiation::Resource::wood ? key.value_b : key.value_a;
    const int net = offer->get_qty * get_v - offer->give_qty * give_v;
    out += " Case 1: the counterpart accepts -> my value changes by a net utility of " +
           std::to_string(net) + ". Case 2: the counterpart declines -> the status quo remains.";
  } else {
    out += " Case 1: I agree -> the pending exchange settles now. Case 2: I decline -> the "
           "status quo remains with " + std::to_string(key.turns_left) + " turns of budget.";
  }
  out += " If I choose ";
  out += action;
  out += ", then the expected value follows from these cases, so I select the option that "
         "maximizes expected utility.";
  return out;
}

inline std::string negotiation_concrete(std::string_view abstraction, std::string_view action) {
  const auto key = parse_negotiation_key(abstraction);
  std::string out = key.value_b > key.value_a ? "Gold is worth more to me than Wood."
                                              : "Wood is worth more to me than Gold.";
  out += " I go with ";
  out += action;
  out += ".";
  return out;
}

// ---- Pig Dice -----------------------------------------------------------

inline std::string pig_abstract(std::string_view abstraction, std::string_view action) {
  const auto parts = split(abstraction, '|');
  const bool mid_turn = parts.size() > 2 && parts[2] != "t0";
  std::string out =
      "Enumerate the cases for the next roll: with probability 1/6 it shows a 1 and the "
      "turn total resets to 0, and with probability 5/6 it adds between 2 and 6 points.";
  if (parts.size() > 1 && parts[1] != "o0") out += kAdaptSentence;
  if (mid_turn) out += kBackRefSentence;
  out += " Case 1: continue -> the turn total grows by 4 on average but the reset risk "
         "compounds. Case 2: stop -> the current turn total is secured. If I choose ";
  out += action;
  out += ", then the expected value follows from this distribution, so I select the option "
         "that maximizes expected utility.";
  return out;
}

inline std::string pig_concrete(std::string_view abstraction, std::string_view action) {
  const auto parts = split(abstraction, '|');
  std::string out = action == "hold" ? "I bank my points now." : "I roll again, no bust yet.";
  if (parts.size() > 2 && parts[2] != "t0") out += " My pot is growing.";
  return out;
}

}  // namespace detail

/// Reasoning text for (key, action) in the requested register. The mixed
/// style picks a register per (key, action) from a fixed hash.
inline std::string template_reasoning(const InfoStateKey& key, std::string_view action,
                                      ReasoningStyle style) {
  if (style == ReasoningStyle::mixed) {
    const auto h = detail::fnv1a(key.str() + "#" + std::string(action));
    style = (h >> 7) & 1 ? ReasoningStyle::abstract : ReasoningStyle::concrete;
  }
  const bool abs = style == ReasoningStyle::abstract;
  const std::string_view a = key.abstraction;
  switch (key.game) {
    case GameId::kuhn_poker: return abs ? detail::kuhn_abstract(a, action) : detail::kuhn_concrete(a, action);
    case GameId::tictactoe: return abs ? detail::ttt_abstract(a, action) : detail::ttt_concrete(a, action);
    case GameId::negotiation:
      return abs ? detail::negotiation_abstract(a, action) : detail::negotiation_concrete(a, action);
    case GameId::pig_dice: return abs ? detail::pig_abstract(a, action) : detail::pig_concrete(a, action);
  }
  return {};
}

struct Response {
  std::string reasoning;
  std::string action;
};

/// Full response text as a language model would emit it.
inline std::string format_response(const Response& r) {
  return r.reasoning + "\n\\boxed{" + r.action + "}";
}

inline Response sample_response(const PolicyParameters& params, const InfoStateKey& key,
                                std::span<const std::string> legal, double temperature,
                                RandomStream& rng,
                                ReasoningStyle style = ReasoningStyle::abstract) {
  const auto probs = action_probabilities(params, key.str(), legal, temperature);
  const double u = rng.uniform01();
  double acc = 0.0;
  std::size_t pick = legal.size() - 1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) {
      pick = i;
      break;
    }
  }
  Response r;
  r.action = legal[pick];
  r.reasoning = template_reasoning(key, r.action, style);
  return r;
}

}  // namespace selfplay
