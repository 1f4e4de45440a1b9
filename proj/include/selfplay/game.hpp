#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "selfplay/core.hpp"
#include "selfplay/games/kuhn.hpp"
#include "selfplay/games/negotiation.hpp"
#include "selfplay/games/pig.hpp"
#include "selfplay/games/tictactoe.hpp"
#include "selfplay/random.hpp"

namespace selfplay {

/// Per-game rule parameters carried in the run configuration.
struct GameConfig {
  negotiation::Config negotiation;
  pig::Config pig;
  int pig_turn_cap = 200;

  friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

/// Decision-turn cap per game; an episode hitting it ends as a draw.
inline int turn_cap(GameId g, const GameConfig& cfg = {}) noexcept {
  switch (g) {
    case GameId::tictactoe: return 9;
    case GameId::kuhn_poker: return 3;
    case GameId::negotiation: return cfg.negotiation.turn_cap;
    case GameId::pig_dice: return cfg.pig_turn_cap;
  }
  return 0;
}

/// Stream domains. Card deals come from the episode seed at reset; in-play
/// chance (die rolls) comes from the stream the caller passes to apply_action.
inline constexpr std::uint64_t kDealDomain = 1;
inline constexpr std::uint64_t kChanceDomain = 2;
inline constexpr std::uint64_t kPolicyDomain = 3;

using GameDetail =
    std::variant<ttt::Board, kuhn::Hand, negotiation::State, pig::State>;

struct GameState {
  GameId game = GameId::tictactoe;
  std::uint64_t seed = 0;
  int turn_index = 0;
  Role acting_role = Role::p0;
  bool terminal = false;
  std::optional<Outcome> outcome;
  GameDetail detail;

  friend bool operator==(const GameState&, const GameState&) = default;
};

struct StepResult {
  GameState state;
  std::optional<Outcome> outcome;  // set iff state.terminal
};

inline GameState reset(GameId game, std::uint64_t seed, const GameConfig& cfg = {}) {
  GameState s;
  s.game = game;
  s.seed = seed;
  switch (game) {
    case GameId::tictactoe:
      s.detail = ttt::Board{};
      break;
    case GameId::kuhn_poker: {
      RandomStream deal(seed, kDealDomain);
      kuhn::Hand hand;
      const auto first = static_cast<int>(deal.below(3));
      auto second = static_cast<int>(deal.below(2));
      if (second >= first) ++second;
      hand.cards = {static_cast<kuhn::Card>(first), static_cast<kuhn::Card>(second)};
      s.detail = hand;
      break;
    }
    case GameId::negotiation:
      s.detail = negotiation::initial_state(cfg.negotiation);
      break;
    case GameId::pig_dice:
      s.detail = pig::initial_state(cfg.pig);
      break;
  }
  return s;
}

inline GameState reset(std::string_view game, std::uint64_t seed,
                       const GameConfig& cfg = {}) {
  return reset(parse_game_id(game), seed, cfg);
}

namespace detail {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

}  // namespace detail

/// Ordered (lexicographic) legal tokens for the acting role.
inline std::vector<std::string> legal_actions(const GameState& s) {
  if (s.terminal) throw TerminalStateError("legal_actions");
  std::vector<std::string> out = std::visit(
      detail::overloaded{
          [](const ttt::Board& b) {
            std::vector<std::string> v;
            for (int c : ttt::empty_cells(b)) v.push_back(std::to_string(c));
            return v;
          },
          [](const kuhn::Hand& h) {
            std::vector<std::string> v;
            for (auto m : kuhn::legal_moves(h.history))
              v.emplace_back(kuhn::move_token(m));
            return v;
          },
          [&](const negotiation::State& n) {
            return negotiation::legal_tokens(n, s.acting_role);
          },
          [](const pig::State& p) {
            std::vector<std::string> v;
            if (pig::may_hold(p)) v.emplace_back("hold");
            v.emplace_back("roll");
            return v;
          },
      },
      s.detail);
  std::sort(out.begin(), out.end());
  return out;
}

inline bool is_legal(const GameState& s, std::string_view token) {
  const auto legal = legal_actions(s);
  return std::find(legal.begin(), legal.end(), token) != legal.end();
}

/// Applies a legal token. Chance events draw from `chance` only.
inline StepResult apply_action(const GameState& s, std::string_view action,
                               RandomStream& chance) {
  if (s.terminal) throw TerminalStateError("apply_action");
  auto legal = legal_actions(s);
  if (std::find(legal.begin(), legal.end(), action) == legal.end())
    throw IllegalActionError(std::string(action), std::move(legal));

  GameState next = s;
  next.turn_index = s.turn_index + 1;

  std::visit(
      detail::overloaded{
          [&](const ttt::Board& b) {
            ttt::Board nb = b;
            const int cell = std::stoi(std::string(action));
            nb.cells[cell] = ttt::to_move(b);
            next.detail = nb;
            const auto w = ttt::winner(nb);
            if (w == ttt::Winner::ongoing) {
              next.acting_role = other(s.acting_role);
            } else {
              next.terminal = true;
              next.outcome = w == ttt::Winner::draw ? Outcome::draw()
                             : w == ttt::Winner::x  ? Outcome::win_for(Role::p0)
                                                    : Outcome::win_for(Role::p1);
            }
          },
          [&](const kuhn::Hand& h) {
            kuhn::Hand nh = kuhn::apply(h, kuhn::parse_move(action));
            if (kuhn::is_terminal(nh.history)) {
              next.terminal = true;
              next.outcome = kuhn::payoff(nh);
            } else {
              next.acting_role = other(s.acting_role);
            }
            next.detail = std::move(nh);
          },
          [&](const negotiation::State& n) {
            auto step = negotiation::apply(n, s.acting_role, action);
            if (step.terminal) {
              next.terminal = true;
              next.outcome = negotiation::score(step.next);
            } else {
              next.acting_role = other(s.acting_role);
            }
            next.detail = std::move(step.next);
          },
          [&](const pig::State& p) {
            const auto move = action == "roll" ? pig::Move::roll : pig::Move::hold;
            int die = 0;
            if (move == pig::Move::roll)
              die = 1 + static_cast<int>(chance.below(static_cast<std::uint64_t>(p.die_sides)));
            auto res = pig::resolve(p, move, die);
            if (res.terminal) {
              next.terminal = true;
              next.outcome = Outcome::win_for(*res.winner);
            }
            next.acting_role = res.next.to_act;
            next.detail = res.next;
          },
      },
      s.detail);

  return {next, next.outcome};
}

/// Ends the episode as a loss for `offender` (illegal or unparseable move).
inline GameState forfeit(const GameState& s, Role offender) {
  GameState next = s;
  next.terminal = true;
  next.outcome = Outcome::win_for(other(offender));
  return next;
}

/// Ends the episode as a draw because the turn cap was reached.
inline GameState truncate(const GameState& s) {
  GameState next = s;
  next.terminal = true;
  next.outcome = Outcome::draw();
  return next;
}

/// Text shown to `role`. Hidden information (the opponent's Kuhn card, the
/// opponent's negotiation valuations) never appears.
inline std::string render_observation(const GameState& s, Role role) {
  std::ostringstream os;
  os << game_title(s.game) << ". You are Player " << index(role);
  std::visit(
      detail::overloaded{
          [&](const ttt::Board& b) {
            os << " (" << (role == Role::p0 ? 'X' : 'O') << ").\n"
               << "Board:\n" << ttt::render_board(b);
          },
          [&](const kuhn::Hand& h) {
            const auto card = h.cards[index(role)];
            os << ".\nYour card: " << kuhn::card_char(card) << " ("
               << kuhn::card_word(card) << ").\n"
               << "Betting so far: "
               << (h.history.empty() ? std::string("none") : kuhn::history_string(h.history))
               << ".\nPot: " << h.contribution[0] + h.contribution[1]
               << " chips (you have put in " << h.contribution[index(role)] << ").\n";
          },
          [&](const negotiation::State& n) {
            using negotiation::Resource;
            const auto& mine = n.holdings[index(role)];
            const auto& val = n.valuations[index(role)];
            const auto& theirs = n.holdings[index(other(role))];
            os << ".\nYour resources: Wood " << mine[0] << " (value " << val[0]
               << " each), Gold " << mine[1] << " (value " << val[1] << " each).\n"
               << "Your total value: " << negotiation::value(mine, val) << ".\n"
               << "Opponent resources: Wood " << theirs[0] << ", Gold " << theirs[1] << ".\n";
            if (n.pending) {
              const auto& o = *n.pending;
              os << "Pending offer from Player " << index(n.proposer) << ": gives "
                 << o.give_qty << ' ' << negotiation::resource_title(o.give) << " for "
                 << o.get_qty << ' ' << negotiation::resource_title(o.get()) << ".\n";
            } else {
              os << "No pending offer.\n";
            }
            os << "Turns left: " << n.turns_left << ".\n";
          },
          [&](const pig::State& p) {
            os << ".\nTarget: " << p.target << ".\n"
               << "Your banked score: " << p.banked[index(role)] << ".\n"
               << "Opponent banked score: " << p.banked[index(other(role))] << ".\n"
               << "Current turn total: "
               << (s.acting_role == role ? p.turn_total : 0) << ".\n";
          },
      },
      s.detail);
  if (s.terminal) {
    os << "The game is over.";
  } else if (s.acting_role != role) {
    os << "Waiting for Player " << index(s.acting_role) << ".";
  } else if (s.game == GameId::negotiation) {
    const auto& n = std::get<negotiation::State>(s.detail);
    os << "Valid moves: "
       << (n.pending && n.proposer != role ? "accept, reject, " : "")
       << "offer_<n><give>_<m><get> with quantities 1-" << n.max_offer_qty
       << " (e.g. offer_2wood_1gold).";
  } else {
    os << "Valid moves: " << join_tokens(legal_actions(s)) << '.';
  }
  return os.str();
}

/// Self-play prompt wrapping an observation.
inline std::string render_selfplay_prompt(std::string_view observation) {
  std::string out = "<|im_start|>user\n";
  out += "You are playing a two-player zero-sum game. Make valid actions to win.\n";
  out += "Observation: ";
  out += observation;
  out += "\nPlease reason step by step, and put your final answer within \\boxed{}.<|im_end|>\n";
  out += "<|im_start|>assistant\n";
  return out;
}

namespace detail {

inline std::string normalize_token(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char ch : raw) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return out;
}

}  // namespace detail

/// Extracts the last \boxed{...} span and matches it against `legal`.
/// Throws NoBoxedActionError or IllegalActionError.
inline std::string parse_boxed_action(std::string_view response,
                                      const std::vector<std::string>& legal) {
  constexpr std::string_view open = "\\boxed{";
  const auto start = response.rfind(open);
  if (start == std::string_view::npos) throw NoBoxedActionError();
  std::size_t i = start + open.size();
  int depth = 1;
  std::size_t end = std::string_view::npos;
  for (; i < response.size(); ++i) {
    if (response[i] == '{') ++depth;
    else if (response[i] == '}' && --depth == 0) {
      end = i;
      break;
    }
  }
  if (end == std::string_view::npos) throw NoBoxedActionError();
  const std::string token =
      detail::normalize_token(response.substr(start + open.size(), end - start - open.size()));
  for (const auto& l : legal)
    if (detail::normalize_token(l) == token) return l;
  throw IllegalActionError(token, legal);
}

}  // namespace selfplay
