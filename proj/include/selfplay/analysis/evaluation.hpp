#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfplay/agents.hpp"
#include "selfplay/analysis/kuhn_solver.hpp"
#include "selfplay/analysis/ttt_solver.hpp"
#include "selfplay/trainer.hpp"

namespace selfplay {

inline constexpr std::uint64_t kEvalDomain = 5;

enum class OpponentKind { uniform_random, ttt_minimax, kuhn_best_response };

inline std::string_view opponent_name(OpponentKind k) noexcept {
  switch (k) {
    case OpponentKind::uniform_random: return "uniform_random";
    case OpponentKind::ttt_minimax: return "ttt_minimax";
    case OpponentKind::kuhn_best_response: return "kuhn_best_response";
  }
  return "uniform_random";
}

inline OpponentKind parse_opponent(std::string_view s) {
  for (auto k : {OpponentKind::uniform_random, OpponentKind::ttt_minimax,
                 OpponentKind::kuhn_best_response})
    if (opponent_name(k) == s) return k;
  throw std::invalid_argument("unknown opponent '" + std::string(s) +
                              "' (expected uniform_random, ttt_minimax or kuhn_best_response)");
}

class UnsupportedOpponentError : public std::invalid_argument {
 public:
  UnsupportedOpponentError(OpponentKind k, GameId g)
      : std::invalid_argument("opponent " + std::string(opponent_name(k)) +
                              " is not available for " + std::string(game_name(g))) {}
};

inline bool opponent_supports(OpponentKind k, GameId g) noexcept {
  switch (k) {
    case OpponentKind::uniform_random: return true;
    case OpponentKind::ttt_minimax: return g == GameId::tictactoe;
    case OpponentKind::kuhn_best_response: return g == GameId::kuhn_poker;
  }
  return false;
}

inline std::vector<OpponentKind> default_opponents(GameId g) {
  std::vector<OpponentKind> out{OpponentKind::uniform_random};
  if (g == GameId::tictactoe) out.push_back(OpponentKind::ttt_minimax);
  if (g == GameId::kuhn_poker) out.push_back(OpponentKind::kuhn_best_response);
  return out;
}

class MinimaxAgent : public Agent {
 public:
  Response respond(const GameState& s, const std::vector<std::string>&, RandomStream&) override {
    const auto key = info_state_key(s, s.acting_role);
    const auto best = ttt_oracle::solve(key.abstraction);
    const auto a = std::to_string(best.move);
    return {template_reasoning(key, a, ReasoningStyle::concrete), a};
  }
};

/// Plays the exact best response to `target` in whichever seat it occupies.
class KuhnBestResponseAgent : public Agent {
 public:
  explicit KuhnBestResponseAgent(const PolicyParameters& target, double temperature = 1.0) {
    const auto p = kuhn_oracle::profile_from_policy(target, temperature);
    s0_ = kuhn_oracle::best_response_strategy_seat0(p.s1);
    s1_ = kuhn_oracle::best_response_strategy_seat1(p.s0);
  }

  Response respond(const GameState& s, const std::vector<std::string>&, RandomStream&) override {
    const auto key = info_state_key(s, s.acting_role);
    const auto bar = key.abstraction.find('|');
    const auto card = static_cast<int>(
        std::find(kuhn_oracle::kCardChars.begin(), kuhn_oracle::kCardChars.end(), key.abstraction[0]) -
        kuhn_oracle::kCardChars.begin());
    const auto hist = key.abstraction.substr(bar + 1);
    std::string a;
    if (hist.empty()) a = s0_.open_bet[card] > 0.5 ? "bet" : "check";
    else if (hist == "check,bet") a = s0_.call_check_bet[card] > 0.5 ? "call" : "fold";
    else if (hist == "bet") a = s1_.call_bet[card] > 0.5 ? "call" : "fold";
    else a = s1_.bet_after_check[card] > 0.5 ? "bet" : "check";
    return {template_reasoning(key, a, ReasoningStyle::concrete), a};
  }

 private:
  kuhn_oracle::Seat0Strategy s0_;
  kuhn_oracle::Seat1Strategy s1_;
};

/// `target` is the policy a best-response opponent is computed against.
inline std::unique_ptr<Agent> scripted_opponent(OpponentKind k, GameId g,
                                                const PolicyParameters* target = nullptr,
                                                double temperature = 1.0) {
  if (!opponent_supports(k, g)) throw UnsupportedOpponentError(k, g);
  switch (k) {
    case OpponentKind::uniform_random: return std::make_unique<UniformRandomAgent>();
    case OpponentKind::ttt_minimax: return std::make_unique<MinimaxAgent>();
    case OpponentKind::kuhn_best_response: {
      static const PolicyParameters uniform;
      return std::make_unique<KuhnBestResponseAgent>(target ? *target : uniform, temperature);
    }
  }
  throw UnsupportedOpponentError(k, g);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for k successes in n trials (95% by default).
inline Interval wilson_interval(int k, int n, double z = 1.959963984540054) {
  if (n <= 0) throw std::invalid_argument("wilson_interval: n must be positive");
  const double nn = n, p = k / nn, z2 = z * z;
  const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct MatchStats {
  int n = 0, wins = 0, draws = 0, losses = 0;
  double win_rate() const { return n ? static_cast<double>(wins) / n : 0.0; }
  double draw_rate() const { return n ? static_cast<double>(draws) / n : 0.0; }
  double loss_rate() const { return n ? static_cast<double>(losses) / n : 0.0; }
  Interval win_ci() const { return wilson_interval(wins, n); }
  Interval draw_ci() const { return wilson_interval(draws, n); }
  Interval loss_ci() const { return wilson_interval(losses, n); }
};

inline nlohmann::json to_json(const MatchStats& m) {
  auto ci = [](Interval i) { return nlohmann::json::array({i.lo, i.hi}); };
  return {{"n", m.n},
          {"wins", m.wins},
          {"draws", m.draws},
          {"losses", m.losses},
          {"win_rate", m.win_rate()},
          {"draw_rate", m.draw_rate()},
          {"loss_rate", m.loss_rate()},
          {"win_ci95", ci(m.win_ci())},
          {"draw_ci95", ci(m.draw_ci())},
          {"loss_ci95", ci(m.loss_ci())}};
}

/// Plays n matches, `agent` taking seat 0 in even-numbered matches and seat
/// 1 in odd ones. Results are from `agent`'s point of view.
inline MatchStats win_rate(Agent& agent, Agent& opponent, GameId game, int n, std::uint64_t seed,
                           const GameConfig& cfg = {}) {
  if (n < 1) throw std::invalid_argument("win_rate: n must be >= 1");
  MatchStats m;
  m.n = n;
  for (int k = 0; k < n; ++k) {
    const Role seat = k % 2 == 0 ? Role::p0 : Role::p1;
    const auto ep_seed = derive_seed(seed, kEvalDomain, static_cast<std::uint64_t>(k));
    const auto rec = seat == Role::p0 ? run_episode(game, ep_seed, agent, opponent, cfg)
                                      : run_episode(game, ep_seed, opponent, agent, cfg);
    const double r = rec.trajectory.outcome.reward(seat);
    if (r > 0) ++m.wins;
    else if (r < 0) ++m.losses;
    else ++m.draws;
  }
  return m;
}

struct SweepEntry {
  GameId game;
  OpponentKind opponent;
  MatchStats stats;
};

struct SweepRow {
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::vector<SweepEntry> results;
  std::optional<kuhn_oracle::ExploitabilityReport> exploitability;
  std::string out_dir;
};

inline nlohmann::json to_json(const SweepRow& r) {
  nlohmann::json wr = nlohmann::json::object();
  for (const auto& e : r.results)
    wr[std::string(game_name(e.game))][std::string(opponent_name(e.opponent))] = to_json(e.stats);
  nlohmann::json ex = nullptr;
  if (r.exploitability)
    ex = {{"br_value_seat0", r.exploitability->br_value_seat0},
          {"br_value_seat1", r.exploitability->br_value_seat1},
          {"exploitability", r.exploitability->exploitability}};
  return {{"beta", r.beta}, {"seed", r.seed}, {"win_rates", wr}, {"exploitability", ex},
          {"out", r.out_dir}};
}

inline const std::vector<double>& default_beta_grid() {
  static const std::vector<double> grid{0.01, 0.05, 0.10, 0.20, 0.30};
  return grid;
}

struct SweepOptions {
  std::vector<double> betas = default_beta_grid();
  int matches = 200;
  std::function<std::unique_ptr<Evaluator>(const TrainConfig&)> make_evaluator;  // null: from config
  std::function<void(const SweepRow&)> on_row;
};

inline std::string beta_label(double beta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "beta-%g", beta);
  return buf;
}

/// Trains once per beta from the same config and seed, then scores each
/// result against the scripted opponents of every trained game.
inline std::vector<SweepRow> sweep_beta(const TrainConfig& base, const SweepOptions& opt = {}) {
  for (double b : opt.betas)
    if (!std::isfinite(b) || b < 0) throw std::invalid_argument("sweep_beta: beta values must be finite and >= 0");
  std::vector<SweepRow> rows;
  for (double beta : opt.betas) {
    auto cfg = base;
    cfg.weights.beta = beta;
    if (!base.out_dir.empty())
      cfg.out_dir = (std::filesystem::path(base.out_dir) / beta_label(beta)).string();
    std::unique_ptr<Evaluator> ev = opt.make_evaluator ? opt.make_evaluator(cfg) : make_evaluator(cfg);
    TrainOptions topt;
    topt.evaluator = ev.get();
    const auto res = train(cfg, topt);

    SweepRow row;
    row.beta = beta;
    row.seed = cfg.seed;
    row.out_dir = cfg.out_dir;
    PolicyAgent agent(res.state.params, cfg.temperature, cfg.reasoning_style);
    for (const auto& g : cfg.games) {
      if (g.weight <= 0) continue;
      for (auto k : default_opponents(g.game)) {
        auto opp = scripted_opponent(k, g.game, &res.state.params, cfg.temperature);
        row.results.push_back(
            {g.game, k, win_rate(agent, *opp, g.game, opt.matches, cfg.seed, cfg.game_config)});
      }
      if (g.game == GameId::kuhn_poker)
        row.exploitability = kuhn_oracle::policy_exploitability(res.state.params, cfg.temperature);
    }
    if (opt.on_row) opt.on_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace selfplay
