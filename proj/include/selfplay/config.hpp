#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfplay/advantage.hpp"
#include "selfplay/evaluator/heuristic.hpp"
#include "selfplay/evaluator/remote.hpp"
#include "selfplay/game.hpp"
#include "selfplay/reasoning.hpp"

namespace selfplay {

struct GameWeight {
  GameId game = GameId::tictactoe;
  double weight = 1.0;
  friend bool operator==(const GameWeight&, const GameWeight&) = default;
};

enum class EvaluatorKind { heuristic, remote };
enum class BaselineMode { per_trajectory, per_batch };

struct TrainConfig {
  std::vector<GameWeight> games{{GameId::tictactoe, 1.0},
                                {GameId::kuhn_poker, 1.0},
                                {GameId::negotiation, 1.0},
                                {GameId::pig_dice, 1.0}};
  int steps = 400;
  int batch_size = 128;
  double learning_rate = 0.1;
  double decay = 0.95;
  ModulationWeights weights;  // weights.beta is the evolution-reward scale
  double temperature = 1.0;
  double gamma = 1.0;  // carried for completeness; rewards are terminal-only
  double subsample_fraction = 0.25;
  EvaluatorKind evaluator = EvaluatorKind::heuristic;
  RemoteClientConfig remote;
  HeuristicLexicon lexicon;
  std::uint64_t seed = 0;
  std::string out_dir;
  int checkpoint_every = 50;
  bool export_trajectories = true;
  bool both_seats_learn = true;
  BaselineMode baseline_mode = BaselineMode::per_trajectory;
  bool fill_per_game = false;
  ReasoningStyle reasoning_style = ReasoningStyle::abstract;
  std::optional<double> force_phi;
  GameConfig game_config;
};

/// Raised with every problem found, one per line.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out = "invalid configuration:";
    for (const auto& s : p) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> problems_;
};

inline std::vector<std::string> validate(const TrainConfig& c) {
  std::vector<std::string> p;
  if (c.games.empty()) p.emplace_back("games: at least one game is required");
  double total = 0.0;
  std::set<GameId> seen;
  for (const auto& g : c.games) {
    if (!(g.weight >= 0.0) || !std::isfinite(g.weight))
      p.push_back("games." + std::string(game_name(g.game)) + ": weight must be finite and >= 0");
    else total += g.weight;
    if (!seen.insert(g.game).second)
      p.push_back("games." + std::string(game_name(g.game)) + ": listed twice");
  }
  if (!c.games.empty() && !(total > 0.0)) p.emplace_back("games: weights must not all be zero");
  if (c.steps < 1) p.emplace_back("steps: must be >= 1");
  if (c.batch_size < 1) p.emplace_back("batch_size: must be >= 1");
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate))
    p.emplace_back("learning_rate: must be finite and >= 0");
  if (!(c.decay >= 0.0 && c.decay <= 1.0)) p.emplace_back("decay: must lie in [0, 1]");
  if (!(c.weights.beta >= 0.0) || !std::isfinite(c.weights.beta))
    p.emplace_back("beta: must be finite and >= 0");
  const auto& w = c.weights;
  for (double v : {w.w_alpha, w.w_sigma, w.w_rho, w.w_d, w.w_a, w.w_c})
    if (!(v >= 0.0)) {
      p.emplace_back("weights: all weights must be >= 0");
      break;
    }
  if (std::abs(w.w_alpha + w.w_sigma + w.w_rho - 1.0) > 1e-9)
    p.emplace_back("weights: phi weights must sum to 1");
  if (std::abs(w.w_d + w.w_a + w.w_c - 1.0) > 1e-9)
    p.emplace_back("weights: psi weights must sum to 1");
  if (!(c.temperature > 0.0) || !std::isfinite(c.temperature))
    p.emplace_back("temperature: must be finite and > 0");
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) p.emplace_back("gamma: must lie in [0, 1]");
  if (!(c.subsample_fraction >= 0.0 && c.subsample_fraction <= 1.0))
    p.emplace_back("subsample_fraction: must lie in [0, 1]");
  if (c.checkpoint_every < 1) p.emplace_back("checkpoint_every: must be >= 1");
  if (c.force_phi && !(*c.force_phi >= 0.0 && *c.force_phi <= 1.0))
    p.emplace_back("force_phi: must lie in [0, 1]");
  if (c.evaluator == EvaluatorKind::remote) {
    if (c.remote.endpoint.empty()) p.emplace_back("remote.endpoint: required for the remote evaluator");
    if (c.remote.model.empty()) p.emplace_back("remote.model: required for the remote evaluator");
  }
  if (c.remote.max_attempts < 1) p.emplace_back("remote.max_attempts: must be >= 1");
  if (c.remote.max_in_flight < 1) p.emplace_back("remote.max_in_flight: must be >= 1");
  if (c.remote.timeout.count() <= 0) p.emplace_back("remote.timeout_ms: must be > 0");
  const auto& n = c.game_config.negotiation;
  if (n.turn_cap < 1) p.emplace_back("negotiation.turn_cap: must be >= 1");
  if (n.max_offer_qty < 1) p.emplace_back("negotiation.max_offer_qty: must be >= 1");
  if (n.initial_holdings[0] < 0 || n.initial_holdings[1] < 0)
    p.emplace_back("negotiation.initial_holdings: must be >= 0");
  if (c.game_config.pig.target < 1) p.emplace_back("pig.target: must be >= 1");
  if (c.game_config.pig.die_sides < 2) p.emplace_back("pig.die_sides: must be >= 2");
  if (c.game_config.pig_turn_cap < 1) p.emplace_back("pig.turn_cap: must be >= 1");
  return p;
}

inline std::string_view evaluator_kind_name(EvaluatorKind k) noexcept {
  return k == EvaluatorKind::heuristic ? "heuristic" : "remote";
}

inline std::string_view baseline_mode_name(BaselineMode m) noexcept {
  return m == BaselineMode::per_trajectory ? "per_trajectory" : "per_batch";
}

inline nlohmann::json to_json(const TrainConfig& c) {
  using nlohmann::json;
  json games = json::object();
  for (const auto& g : c.games) games[std::string(game_name(g.game))] = g.weight;
  const auto& n = c.game_config.negotiation;
  json j = {
      {"games", games},
      {"steps", c.steps},
      {"batch_size", c.batch_size},
      {"learning_rate", c.learning_rate},
      {"decay", c.decay},
      {"beta", c.weights.beta},
      {"weights",
       {{"w_alpha", c.weights.w_alpha}, {"w_sigma", c.weights.w_sigma},
        {"w_rho", c.weights.w_rho}, {"w_d", c.weights.w_d},
        {"w_a", c.weights.w_a}, {"w_c", c.weights.w_c}}},
      {"temperature", c.temperature},
      {"gamma", c.gamma},
      {"subsample_fraction", c.subsample_fraction},
      {"evaluator", std::string(evaluator_kind_name(c.evaluator))},
      {"remote",
       {{"endpoint", c.remote.endpoint},
        {"model", c.remote.model},
        {"api_key_env", c.remote.api_key_env},
        {"timeout_ms", c.remote.timeout.count()},
        {"max_attempts", c.remote.max_attempts},
        {"backoff_ms", c.remote.backoff_base.count()},
        {"max_in_flight", c.remote.max_in_flight}}},
      {"lexicon", to_json(c.lexicon)},
      {"seed", c.seed},
      {"out", c.out_dir},
      {"checkpoint_every", c.checkpoint_every},
      {"export_trajectories", c.export_trajectories},
      {"both_seats_learn", c.both_seats_learn},
      {"baseline_mode", std::string(baseline_mode_name(c.baseline_mode))},
      {"fill_per_game", c.fill_per_game},
      {"reasoning_style", std::string(style_name(c.reasoning_style))},
      {"force_phi", c.force_phi ? json(*c.force_phi) : json(nullptr)},
      {"negotiation",
       {{"valuations", n.valuations},
        {"initial_holdings", n.initial_holdings},
        {"turn_cap", n.turn_cap},
        {"max_offer_qty", n.max_offer_qty}}},
      {"pig",
       {{"target", c.game_config.pig.target},
        {"die_sides", c.game_config.pig.die_sides},
        {"turn_cap", c.game_config.pig_turn_cap}}},
  };
  return j;
}

namespace detail {

/// Reads `key` from `j` into `dst`, recording type errors instead of throwing.
template <class T>
void read_field(const nlohmann::json& j, const char* key, T& dst, const std::string& prefix,
                std::vector<std::string>& problems) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    problems.push_back(prefix + key + ": wrong type (" + j.at(key).dump() + ")");
  }
}

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& prefix, std::vector<std::string>& problems) {
  if (!j.is_object()) {
    problems.push_back((prefix.empty() ? std::string("config") : prefix) + ": expected an object");
    return;
  }
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) problems.push_back(prefix + k + ": unknown key");
  }
}

}  // namespace detail

/// Overlays the keys present in `j` onto `base`. Throws ConfigError listing
/// every problem (unknown keys, wrong types, failed validation).
inline TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base = {}) {
  using detail::read_field;
  std::vector<std::string> p;
  detail::check_keys(j,
                     {"games", "steps", "batch_size", "learning_rate", "decay", "beta", "weights",
                      "temperature", "gamma", "subsample_fraction", "evaluator", "remote",
                      "lexicon", "seed", "out", "checkpoint_every", "export_trajectories",
                      "both_seats_learn", "baseline_mode", "fill_per_game", "reasoning_style",
                      "force_phi", "negotiation", "pig"},
                     "", p);
  if (!p.empty() && !j.is_object()) throw ConfigError(p);
  auto& c = base;

  if (j.contains("games")) {
    const auto& g = j["games"];
    c.games.clear();
    if (g.is_object()) {
      for (const auto& [name, w] : g.items()) {
        try {
          c.games.push_back({parse_game_id(name), w.get<double>()});
        } catch (const UnknownGameError& e) {
          p.push_back(std::string("games.") + name + ": unknown game");
        } catch (const nlohmann::json::exception&) {
          p.push_back(std::string("games.") + name + ": weight must be a number");
        }
      }
    } else if (g.is_array()) {
      for (const auto& name : g) {
        try {
          c.games.push_back({parse_game_id(name.get<std::string>()), 1.0});
        } catch (const std::exception&) {
          p.push_back("games: unknown game " + name.dump());
        }
      }
    } else {
      p.emplace_back("games: expected an object of weights or a list of names");
    }
  }
  read_field(j, "steps", c.steps, "", p);
  read_field(j, "batch_size", c.batch_size, "", p);
  read_field(j, "learning_rate", c.learning_rate, "", p);
  read_field(j, "decay", c.decay, "", p);
  read_field(j, "beta", c.weights.beta, "", p);
  if (j.contains("weights")) {
    const auto& w = j["weights"];
    detail::check_keys(w, {"w_alpha", "w_sigma", "w_rho", "w_d", "w_a", "w_c"}, "weights.", p);
    if (w.is_object()) {
      read_field(w, "w_alpha", c.weights.w_alpha, "weights.", p);
      read_field(w, "w_sigma", c.weights.w_sigma, "weights.", p);
      read_field(w, "w_rho", c.weights.w_rho, "weights.", p);
      read_field(w, "w_d", c.weights.w_d, "weights.", p);
      read_field(w, "w_a", c.weights.w_a, "weights.", p);
      read_field(w, "w_c", c.weights.w_c, "weights.", p);
    }
  }
  read_field(j, "temperature", c.temperature, "", p);
  read_field(j, "gamma", c.gamma, "", p);
  read_field(j, "subsample_fraction", c.subsample_fraction, "", p);
  if (j.contains("evaluator")) {
    const auto v = j["evaluator"].is_string() ? j["evaluator"].get<std::string>() : "";
    if (v == "heuristic") c.evaluator = EvaluatorKind::heuristic;
    else if (v == "remote") c.evaluator = EvaluatorKind::remote;
    else p.push_back("evaluator: expected \"heuristic\" or \"remote\"");
  }
  if (j.contains("remote")) {
    const auto& r = j["remote"];
    detail::check_keys(r, {"endpoint", "model", "api_key_env", "timeout_ms", "max_attempts",
                           "backoff_ms", "max_in_flight"},
                       "remote.", p);
    if (r.is_object()) {
      read_field(r, "endpoint", c.remote.endpoint, "remote.", p);
      read_field(r, "model", c.remote.model, "remote.", p);
      read_field(r, "api_key_env", c.remote.api_key_env, "remote.", p);
      std::int64_t timeout = c.remote.timeout.count(), backoff = c.remote.backoff_base.count();
      read_field(r, "timeout_ms", timeout, "remote.", p);
      read_field(r, "backoff_ms", backoff, "remote.", p);
      c.remote.timeout = std::chrono::milliseconds(timeout);
      c.remote.backoff_base = std::chrono::milliseconds(backoff);
      read_field(r, "max_attempts", c.remote.max_attempts, "remote.", p);
      read_field(r, "max_in_flight", c.remote.max_in_flight, "remote.", p);
    }
  }
  if (j.contains("lexicon")) {
    try {
      c.lexicon = lexicon_from_json(j["lexicon"]);
    } catch (const std::exception& e) {
      p.push_back(std::string("lexicon: ") + e.what());
    }
  }
  read_field(j, "seed", c.seed, "", p);
  read_field(j, "out", c.out_dir, "", p);
  read_field(j, "checkpoint_every", c.checkpoint_every, "", p);
  read_field(j, "export_trajectories", c.export_trajectories, "", p);
  read_field(j, "both_seats_learn", c.both_seats_learn, "", p);
  if (j.contains("baseline_mode")) {
    const auto v = j["baseline_mode"].is_string() ? j["baseline_mode"].get<std::string>() : "";
    if (v == "per_trajectory") c.baseline_mode = BaselineMode::per_trajectory;
    else if (v == "per_batch") c.baseline_mode = BaselineMode::per_batch;
    else p.push_back("baseline_mode: expected \"per_trajectory\" or \"per_batch\"");
  }
  read_field(j, "fill_per_game", c.fill_per_game, "", p);
  if (j.contains("reasoning_style")) {
    try {
      c.reasoning_style = parse_reasoning_style(j["reasoning_style"].get<std::string>());
    } catch (const std::exception&) {
      p.push_back("reasoning_style: expected \"abstract\", \"concrete\" or \"mixed\"");
    }
  }
  if (j.contains("force_phi")) {
    if (j["force_phi"].is_null()) c.force_phi.reset();
    else if (j["force_phi"].is_number()) c.force_phi = j["force_phi"].get<double>();
    else p.emplace_back("force_phi: expected a number or null");
  }
  if (j.contains("negotiation")) {
    const auto& n = j["negotiation"];
    detail::check_keys(n, {"valuations", "initial_holdings", "turn_cap", "max_offer_qty"},
                       "negotiation.", p);
    if (n.is_object()) {
      auto& nc = c.game_config.negotiation;
      read_field(n, "valuations", nc.valuations, "negotiation.", p);
      read_field(n, "initial_holdings", nc.initial_holdings, "negotiation.", p);
      read_field(n, "turn_cap", nc.turn_cap, "negotiation.", p);
      read_field(n, "max_offer_qty", nc.max_offer_qty, "negotiation.", p);
    }
  }
  if (j.contains("pig")) {
    const auto& g = j["pig"];
    detail::check_keys(g, {"target", "die_sides", "turn_cap"}, "pig.", p);
    if (g.is_object()) {
      read_field(g, "target", c.game_config.pig.target, "pig.", p);
      read_field(g, "die_sides", c.game_config.pig.die_sides, "pig.", p);
      read_field(g, "turn_cap", c.game_config.pig_turn_cap, "pig.", p);
    }
  }
  for (auto& problem : validate(c)) p.push_back(std::move(problem));
  if (!p.empty()) throw ConfigError(std::move(p));
  return c;
}

inline TrainConfig load_config_file(const std::string& path, TrainConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({path + ": " + e.what()});
  }
  return config_from_json(j, std::move(base));
}

/// Identifies a run for checkpoint compatibility. The step budget and the
/// output directory may change between resumptions, so they are excluded.
inline std::string config_hash(const TrainConfig& c) {
  auto j = to_json(c);
  j.erase("steps");
  j.erase("out");
  const auto h = detail::fnv1a(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace selfplay
