#pragma once

#include <functional>
#include <string>
#include <vector>

#include "selfplay/game.hpp"
#include "selfplay/policy.hpp"
#include "selfplay/reasoning.hpp"
#include "selfplay/trajectory.hpp"

namespace selfplay {

/// Produces a response (reasoning + proposed action text) for the acting
/// role. The episode runner checks legality, so an agent may propose
/// anything.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual Response respond(const GameState& s, const std::vector<std::string>& legal,
                           RandomStream& rng) = 0;
};

/// Samples from the tabular policy and narrates with template reasoning.
class PolicyAgent : public Agent {
 public:
  PolicyAgent(const PolicyParameters& params, double temperature = 1.0,
              ReasoningStyle style = ReasoningStyle::abstract)
      : params_(&params), temperature_(temperature), style_(style) {}

  Response respond(const GameState& s, const std::vector<std::string>& legal,
                   RandomStream& rng) override {
    return sample_response(*params_, info_state_key(s, s.acting_role), legal, temperature_, rng,
                           style_);
  }

 private:
  const PolicyParameters* params_;
  double temperature_;
  ReasoningStyle style_;
};

/// Picks the most probable action (ties to the first legal token).
class GreedyPolicyAgent : public Agent {
 public:
  explicit GreedyPolicyAgent(const PolicyParameters& params,
                             ReasoningStyle style = ReasoningStyle::abstract)
      : params_(&params), style_(style) {}

  Response respond(const GameState& s, const std::vector<std::string>& legal,
                   RandomStream&) override {
    const auto key = info_state_key(s, s.acting_role);
    const auto probs = action_probabilities(*params_, key.str(), legal);
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
      if (probs[i] > probs[best]) best = i;
    return {template_reasoning(key, legal[best], style_), legal[best]};
  }

 private:
  const PolicyParameters* params_;
  ReasoningStyle style_;
};

class UniformRandomAgent : public Agent {
 public:
  explicit UniformRandomAgent(ReasoningStyle style = ReasoningStyle::concrete) : style_(style) {}

  Response respond(const GameState& s, const std::vector<std::string>& legal,
                   RandomStream& rng) override {
    const auto& a = legal[rng.below(legal.size())];
    return {template_reasoning(info_state_key(s, s.acting_role), a, style_), a};
  }

 private:
  ReasoningStyle style_;
};

/// Adapts a plain function; handy for scripted opponents and interactive play.
class FunctionAgent : public Agent {
 public:
  using Fn = std::function<Response(const GameState&, const std::vector<std::string>&,
                                    RandomStream&)>;
  explicit FunctionAgent(Fn fn) : fn_(std::move(fn)) {}
  Response respond(const GameState& s, const std::vector<std::string>& legal,
                   RandomStream& rng) override {
    return fn_(s, legal, rng);
  }

 private:
  Fn fn_;
};

/// A finished episode plus the information-state key of every turn.
struct EpisodeRecord {
  Trajectory trajectory;
  std::vector<std::string> keys;  // parallel to trajectory.turns
};

/// Plays one episode. Responses go through the \boxed{} parser, so an
/// unparseable or illegal reply forfeits the game for its author. Reaching
/// the turn cap ends the game as a draw.
inline EpisodeRecord run_episode(GameId game, std::uint64_t seed, Agent& seat0, Agent& seat1,
                                 const GameConfig& cfg = {}) {
  EpisodeRecord rec;
  auto& tr = rec.trajectory;
  tr.game = game;
  tr.seed = seed;
  auto s = reset(game, seed, cfg);
  RandomStream chance(seed, kChanceDomain);
  RandomStream policy(seed, kPolicyDomain);
  const int cap = turn_cap(game, cfg);

  while (!s.terminal) {
    if (static_cast<int>(tr.turns.size()) >= cap) {
      s = truncate(s);
      tr.truncated = true;
      break;
    }
    const Role role = s.acting_role;
    auto legal = legal_actions(s);
    TurnRecord turn;
    turn.t = static_cast<int>(tr.turns.size());
    turn.role = role;
    turn.observation = render_observation(s, role);
    rec.keys.push_back(info_state_key(s, role).str());
    Agent& agent = role == Role::p0 ? seat0 : seat1;
    const Response r = agent.respond(s, legal, policy);
    turn.reasoning = r.reasoning;
    std::string action;
    try {
      action = parse_boxed_action(format_response(r), legal);
    } catch (const std::invalid_argument& e) {
      turn.action = r.action;
      turn.legal_actions = std::move(legal);
      tr.turns.push_back(std::move(turn));
      tr.forfeit = Forfeit{role, e.what()};
      s = forfeit(s, role);
      break;
    }
    turn.action = action;
    turn.legal_actions = std::move(legal);
    tr.turns.push_back(std::move(turn));
    s = apply_action(s, action, chance).state;
  }
  tr.outcome = *s.outcome;
  return rec;
}

/// Both seats driven by the same policy snapshot.
inline EpisodeRecord run_self_play_episode(const PolicyParameters& params, GameId game,
                                           std::uint64_t seed, double temperature = 1.0,
                                           ReasoningStyle style = ReasoningStyle::abstract,
                                           const GameConfig& cfg = {}) {
  PolicyAgent agent(params, temperature, style);
  return run_episode(game, seed, agent, agent, cfg);
}

}  // namespace selfplay
