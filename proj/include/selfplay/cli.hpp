#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "selfplay/analysis.hpp"
#include "selfplay/config.hpp"
#include "selfplay/trainer.hpp"

namespace selfplay::cli {

enum ExitCode { kOk = 0, kRuntimeError = 1, kConfigError = 2 };

/// Raised for bad flag combinations that CLI11 cannot catch on its own.
class UsageError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  bool json = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

/// Training flags that overlay the config file.
struct Overrides {
  double beta = 0, lr = 0, decay = 0, temperature = 0, subsample = 0;
  int steps = 0, batch = 0, checkpoint_every = 0;
  std::string evaluator, endpoint, model, style, baseline_mode;
  std::vector<std::string> games;
  bool no_export = false;
  std::map<std::string, CLI::Option*> opts;
};

inline void add_common(CLI::App& app, Common& c) {
  app.add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  c.seed_opt = app.add_option("--seed", c.seed, "64-bit seed");
  c.out_opt = app.add_option("--out", c.out, "output directory");
  app.add_flag("--json", c.json, "machine-readable output");
}

inline void add_overrides(CLI::App& app, Overrides& o) {
  o.opts["beta"] = app.add_option("--beta", o.beta, "evolution reward scale");
  o.opts["learning_rate"] = app.add_option("--lr", o.lr, "learning rate");
  o.opts["decay"] = app.add_option("--decay", o.decay, "baseline EMA decay");
  o.opts["temperature"] = app.add_option("--temperature", o.temperature, "softmax temperature");
  o.opts["subsample_fraction"] =
      app.add_option("--subsample", o.subsample, "fraction of each batch sent to the evaluator");
  o.opts["steps"] = app.add_option("--steps", o.steps, "training steps");
  o.opts["batch_size"] = app.add_option("--batch-size", o.batch, "episodes per step");
  o.opts["checkpoint_every"] =
      app.add_option("--checkpoint-every", o.checkpoint_every, "checkpoint interval in steps");
  o.opts["evaluator"] = app.add_option("--evaluator", o.evaluator, "heuristic or remote");
  o.opts["endpoint"] = app.add_option("--endpoint", o.endpoint, "chat-completions URL");
  o.opts["model"] = app.add_option("--model", o.model, "judge model name");
  o.opts["reasoning_style"] = app.add_option("--style", o.style, "abstract, concrete or mixed");
  o.opts["baseline_mode"] =
      app.add_option("--baseline-mode", o.baseline_mode, "per_trajectory or per_batch");
  o.opts["games"] = app.add_option("--games", o.games, "games to train on (equal weights)");
  app.add_flag("--no-export", o.no_export, "do not write trajectories.jsonl");
}

inline bool given(const Overrides& o, const std::string& k) {
  const auto it = o.opts.find(k);
  return it != o.opts.end() && it->second && it->second->count() > 0;
}

/// Defaults, then the config file, then flags. Everything is validated in
/// one pass so all problems are reported together.
inline TrainConfig resolve_config(const Common& c, const Overrides* o = nullptr) {
  nlohmann::json j = nlohmann::json::object();
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    if (!in) throw ConfigError({"cannot open config file '" + c.config + "'"});
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError({c.config + ": " + e.what()});
    }
    if (!j.is_object()) throw ConfigError({c.config + ": top level must be an object"});
  }
  nlohmann::json patch = nlohmann::json::object();
  if (c.seed_opt && c.seed_opt->count()) patch["seed"] = c.seed;
  if (c.out_opt && c.out_opt->count()) patch["out"] = c.out;
  if (o) {
    if (given(*o, "beta")) patch["beta"] = o->beta;
    if (given(*o, "learning_rate")) patch["learning_rate"] = o->lr;
    if (given(*o, "decay")) patch["decay"] = o->decay;
    if (given(*o, "temperature")) patch["temperature"] = o->temperature;
    if (given(*o, "subsample_fraction")) patch["subsample_fraction"] = o->subsample;
    if (given(*o, "steps")) patch["steps"] = o->steps;
    if (given(*o, "batch_size")) patch["batch_size"] = o->batch;
    if (given(*o, "checkpoint_every")) patch["checkpoint_every"] = o->checkpoint_every;
    if (given(*o, "evaluator")) patch["evaluator"] = o->evaluator;
    if (given(*o, "endpoint")) patch["remote"]["endpoint"] = o->endpoint;
    if (given(*o, "model")) patch["remote"]["model"] = o->model;
    if (given(*o, "reasoning_style")) patch["reasoning_style"] = o->style;
    if (given(*o, "baseline_mode")) patch["baseline_mode"] = o->baseline_mode;
    if (given(*o, "games")) patch["games"] = o->games;
    if (o->no_export) patch["export_trajectories"] = false;
  }
  j.merge_patch(patch);
  return config_from_json(j);
}

inline PolicyParameters load_policy(const std::string& checkpoint) {
  if (checkpoint.empty()) return {};
  return load_checkpoint(checkpoint).state.params;
}

inline std::string fixed(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

inline std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

// train ----------------------------------------------------------------------

inline int cmd_train(const Common& c, const Overrides& o, std::ostream& out) {
  auto cfg = resolve_config(c, &o);
  if (cfg.out_dir.empty()) cfg.out_dir = "runs/seed-" + std::to_string(cfg.seed);
  TrainOptions opt;
  opt.on_step = [&](const StepReport& r) {
    if (c.json) {
      out << to_json(r).dump() << '\n';
      return;
    }
    out << "step " << r.step << "/" << cfg.steps << "  a_mod " << fixed(r.a_mod.mean) << " ± "
        << fixed(r.a_mod.std) << "  phi " << fixed(r.phi.mean) << "  psi " << fixed(r.psi.mean)
        << "  evaluated " << r.evaluated << "  failures " << r.evaluator_failures << "  ("
        << fixed(r.wall_ms, 0) << " ms)";
    if (r.aborted) out << "  ABORTED: " << r.diagnostic;
    out << '\n';
  };
  const auto res = train(cfg, opt);
  if (!c.json) {
    if (res.resumed_from > 0) out << "resumed from step " << res.resumed_from << '\n';
    out << "run directory: " << cfg.out_dir << '\n';
  }
  return kOk;
}

// score ----------------------------------------------------------------------

inline nlohmann::json offline_scores_block(const Trajectory& tr, const EvaluatorVerdict& v,
                                           double beta, const ModulationWeights& w) {
  std::optional<double> a_game;
  if (!tr.scores.empty() && tr.scores.back().contains("a_game") &&
      tr.scores.back()["a_game"].is_number())
    a_game = tr.scores.back()["a_game"].get<double>();
  ScoredAdvantage s;
  s.a_game = a_game.value_or(0.0);
  if (v.status == VerdictStatus::scored) {
    s.phi = phi(*v.transferability, w);
    s.psi = psi(*v.evolution, w);
  }
  s.a_mod = modulate(s.a_game, s.phi, s.psi, beta);
  auto j = scores_block(s, v);
  if (!a_game) {
    j["a_game"] = nullptr;
    j["a_mod"] = nullptr;
  }
  if (v.status != VerdictStatus::scored) {
    j["phi"]["value"] = nullptr;
    j["psi"]["value"] = nullptr;
    j["a_mod"] = nullptr;
    j["fill_source"] = "none";
  }
  return j;
}

inline int cmd_score(const Common& c, const Overrides& o, const std::string& in_path,
                     const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve_config(c, &o);
  std::ifstream in(in_path);
  if (!in) throw std::runtime_error("cannot open '" + in_path + "'");
  auto read = read_trajectories(in);
  for (const auto& d : read.diagnostics) err << in_path << ": " << d << " (skipped)\n";

  auto ev = make_evaluator(cfg);
  std::vector<const Trajectory*> ptrs;
  for (const auto& tr : read.records) ptrs.push_back(&tr);
  const auto verdicts = ev->evaluate_batch(ptrs);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  }
  std::ostream& dst = out_path.empty() ? out : file;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < read.records.size(); ++i) {
    auto tr = read.records[i];
    const auto& v = verdicts[i];
    if (v.status != VerdictStatus::scored) {
      ++failed;
      err << in_path << ": line " << read.line_numbers[i] << ": evaluator " << v.evaluator_id
          << " failed: " << v.error << '\n';
    }
    tr.scores.push_back(offline_scores_block(tr, v, cfg.weights.beta, cfg.weights));
    dst << to_jsonl_line(tr) << '\n';
  }
  if (!dst.flush()) throw std::runtime_error("write failed for scored output");
  err << "scored " << read.records.size() - failed << " of " << read.records.size()
      << " records with " << ev->id() << '\n';
  return kOk;
}

// agree ----------------------------------------------------------------------

/// The newest evaluated scores block, optionally restricted to one evaluator.
inline const nlohmann::json* pick_block(const Trajectory& tr, const std::string& evaluator_id) {
  for (auto it = tr.scores.rbegin(); it != tr.scores.rend(); ++it) {
    if (!evaluator_id.empty() && it->value("evaluator_id", "") != evaluator_id) continue;
    if (!it->contains("phi") || (*it)["phi"].value("a", nlohmann::json()).is_null()) continue;
    return &*it;
  }
  return nullptr;
}

inline int cmd_agree(const Common& c, const std::string& a_path, std::string b_path,
                     const std::string& id_a, const std::string& id_b, const std::string& mode_s,
                     std::ostream& out, std::ostream& err) {
  KappaMode mode;
  if (mode_s == "dimensions") mode = KappaMode::dimensions;
  else if (mode_s == "binned") mode = KappaMode::binned;
  else throw UsageError("--kappa-mode must be dimensions or binned");
  if (b_path.empty()) b_path = a_path;

  auto load = [&](const std::string& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open '" + p + "'");
    auto r = read_trajectories(in);
    for (const auto& d : r.diagnostics) err << p << ": " << d << " (skipped)\n";
    return r.records;
  };
  const auto ra = load(a_path), rb = load(b_path);
  std::map<std::string, const nlohmann::json*> index_b;
  for (const auto& tr : rb)
    if (const auto* blk = pick_block(tr, id_b)) index_b.emplace(trajectory_hash(tr), blk);
  std::vector<nlohmann::json> ja, jb;
  std::set<std::string> seen;
  for (const auto& tr : ra) {
    const auto h = trajectory_hash(tr);
    if (!seen.insert(h).second) continue;
    const auto* blk = pick_block(tr, id_a);
    const auto it = index_b.find(h);
    if (!blk || it == index_b.end()) continue;
    ja.push_back(*blk);
    jb.push_back(*it->second);
  }
  if (ja.size() < 2)
    throw std::runtime_error("join produced " + std::to_string(ja.size()) +
                             " scored trajectory pairs; at least 2 are required");
  const auto phi_r = agreement(ja, jb, true, mode);
  const auto psi_r = agreement(ja, jb, false, mode);
  const nlohmann::json j = {{"phi", to_json(phi_r)}, {"psi", to_json(psi_r)}};
  if (!c.json) {
    auto opt = [](const std::optional<double>& v) { return v ? fixed(*v) : std::string("undefined"); };
    out << pad("signal", 8) << pad("n", 7) << pad("kappa", 11) << pad("spearman", 11) << "kappa_mode\n";
    for (const auto* r : {&phi_r, &psi_r})
      out << pad(r->signal, 8) << pad(std::to_string(r->n), 7) << pad(opt(r->kappa), 11)
          << pad(opt(r->spearman), 11) << kappa_mode_name(r->mode) << '\n';
  }
  out << j.dump() << '\n';
  return kOk;
}

// eval -----------------------------------------------------------------------

inline int cmd_eval(const Common& c, const std::string& checkpoint, const std::string& game_s,
                    std::vector<std::string> opponents, int n, bool greedy, std::ostream& out) {
  const auto cfg = resolve_config(c);
  const GameId game = parse_game_id(game_s);
  if (opponents.empty())
    for (auto k : default_opponents(game)) opponents.emplace_back(opponent_name(k));
  std::vector<OpponentKind> kinds;
  for (const auto& o : opponents) {
    const auto k = parse_opponent(o);
    if (!opponent_supports(k, game)) throw UnsupportedOpponentError(k, game);
    kinds.push_back(k);
  }
  if (n < 1) throw UsageError("--n must be >= 1");
  const auto params = load_policy(checkpoint);
  std::unique_ptr<Agent> agent;
  if (greedy) agent = std::make_unique<GreedyPolicyAgent>(params, cfg.reasoning_style);
  else agent = std::make_unique<PolicyAgent>(params, cfg.temperature, cfg.reasoning_style);

  nlohmann::json rows = nlohmann::json::array();
  if (!c.json)
    out << pad("opponent", 20) << pad("n", 7) << pad("win", 8) << pad("draw", 8) << pad("loss", 8)
        << "win 95% CI\n";
  for (auto k : kinds) {
    auto opp = scripted_opponent(k, game, &params, cfg.temperature);
    const auto m = win_rate(*agent, *opp, game, n, cfg.seed, cfg.game_config);
    auto row = to_json(m);
    row["opponent"] = std::string(opponent_name(k));
    rows.push_back(row);
    if (!c.json)
      out << pad(std::string(opponent_name(k)), 20) << pad(std::to_string(n), 7)
          << pad(fixed(m.win_rate()), 8) << pad(fixed(m.draw_rate()), 8)
          << pad(fixed(m.loss_rate()), 8) << "[" << fixed(m.win_ci().lo) << ", "
          << fixed(m.win_ci().hi) << "]\n";
  }
  nlohmann::json j = {{"game", std::string(game_name(game))},
                      {"decoding", greedy ? "greedy" : "sample"},
                      {"seed", cfg.seed},
                      {"rows", rows}};
  if (game == GameId::kuhn_poker) {
    const auto ex = kuhn_oracle::policy_exploitability(params, cfg.temperature);
    j["exploitability"] = ex.exploitability;
    if (!c.json) out << "exploitability " << fixed(ex.exploitability, 4) << '\n';
  }
  if (c.json) out << j.dump() << '\n';
  return kOk;
}

// play -----------------------------------------------------------------------

struct Abandoned {};

inline int cmd_play(const Common& c, const std::string& checkpoint, const std::string& game_s,
                    int human_seat, const std::string& record, bool greedy, std::istream& in,
                    std::ostream& out) {
  const auto cfg = resolve_config(c);
  const GameId game = parse_game_id(game_s);
  if (human_seat != 0 && human_seat != 1) throw UsageError("--seat must be 0 or 1");
  const auto params = load_policy(checkpoint);
  const Role human = role_from_index(human_seat);

  FunctionAgent person([&](const GameState& s, const std::vector<std::string>& legal,
                           RandomStream&) -> Response {
    out << '\n' << render_observation(s, human) << '\n';
    while (true) {
      out << "Your move [" << join_tokens(legal, ", ") << "]: " << std::flush;
      std::string line;
      if (!std::getline(in, line)) throw Abandoned{};
      const auto b = line.find_first_not_of(" \t\r");
      const auto e = line.find_last_not_of(" \t\r");
      const auto tok = b == std::string::npos ? std::string() : line.substr(b, e - b + 1);
      if (std::find(legal.begin(), legal.end(), tok) != legal.end()) return {"(human move)", tok};
      out << "'" << tok << "' is not legal here. Legal actions: " << join_tokens(legal, ", ") << '\n';
    }
  });
  std::unique_ptr<Agent> policy;
  if (greedy) policy = std::make_unique<GreedyPolicyAgent>(params, cfg.reasoning_style);
  else policy = std::make_unique<PolicyAgent>(params, cfg.temperature, cfg.reasoning_style);
  FunctionAgent machine([&](const GameState& s, const std::vector<std::string>& legal,
                            RandomStream& rng) {
    auto r = policy->respond(s, legal, rng);
    out << "\nAgent reasoning: " << r.reasoning << "\nAgent plays: " << r.action << '\n';
    return r;
  });

  EpisodeRecord rec;
  try {
    rec = human == Role::p0 ? run_episode(game, cfg.seed, person, machine, cfg.game_config)
                            : run_episode(game, cfg.seed, machine, person, cfg.game_config);
  } catch (const Abandoned&) {
    out << "\nInput closed; match abandoned, nothing recorded.\n";
    return kOk;
  }
  const auto& tr = rec.trajectory;
  if (game == GameId::kuhn_poker) {
    const auto replay = reset(game, cfg.seed, cfg.game_config);
    const auto& h = std::get<kuhn::Hand>(replay.detail);
    const bool folded = !tr.turns.empty() && tr.turns.back().action == "fold";
    if (!folded && !tr.forfeit)
      out << "\nShowdown: the agent held " << kuhn::card_char(h.cards[index(other(human))]) << '\n';
  }
  const double r = tr.outcome.reward(human);
  out << "\nResult: " << (r > 0 ? "you win" : r < 0 ? "you lose" : "draw") << " ("
      << detail::format_reward(tr.outcome.r0) << " / " << detail::format_reward(tr.outcome.r1)
      << ")\n";
  if (!record.empty()) {
    std::ofstream f(record, std::ios::app);
    if (!f || !(f << to_jsonl_line(tr) << '\n'))
      throw std::runtime_error("cannot append to '" + record + "'");
  }
  return kOk;
}

// sweep-beta -----------------------------------------------------------------

inline int cmd_sweep(const Common& c, const Overrides& o, std::vector<double> betas, int matches,
                     std::ostream& out) {
  const auto cfg = resolve_config(c, &o);
  SweepOptions opt;
  if (!betas.empty()) opt.betas = std::move(betas);
  opt.matches = matches;
  if (!c.json) {
    opt.on_row = [&](const SweepRow& r) {
      out << "beta " << r.beta;
      for (const auto& e : r.results)
        out << "  " << game_name(e.game) << "/" << opponent_name(e.opponent) << " win "
            << fixed(e.stats.win_rate()) << " draw " << fixed(e.stats.draw_rate());
      if (r.exploitability) out << "  exploitability " << fixed(r.exploitability->exploitability, 4);
      out << '\n';
    };
  }
  const auto rows = sweep_beta(cfg, opt);
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows) table.push_back(to_json(r));
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto p = std::filesystem::path(cfg.out_dir) / "sweep.json";
    std::ofstream f(p);
    if (!f || !(f << table.dump(2) << '\n')) throw std::runtime_error("cannot write '" + p.string() + "'");
    if (!c.json) out << "table written to " << p.string() << '\n';
  }
  if (c.json) out << table.dump() << '\n';
  return kOk;
}

// export ---------------------------------------------------------------------

inline int cmd_export(const Common& c, const std::string& checkpoint, const std::string& trajectories,
                      const std::string& out_path, std::ostream& out, std::ostream& err) {
  if (checkpoint.empty() == trajectories.empty())
    throw UsageError("export needs exactly one of --checkpoint or --trajectories");
  const auto cfg = resolve_config(c);
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  }
  std::ostream& dst = out_path.empty() ? out : file;
  if (!checkpoint.empty()) {
    const auto ck = load_checkpoint(checkpoint);
    nlohmann::json policy = nlohmann::json::object();
    for (const auto& [key, row] : ck.state.params.rows()) {
      std::vector<std::string> actions;
      for (const auto& [a, v] : row) actions.push_back(a);
      const auto probs = action_probabilities(ck.state.params, key, actions, cfg.temperature);
      for (std::size_t i = 0; i < actions.size(); ++i) policy[key][actions[i]] = probs[i];
    }
    dst << nlohmann::json{{"step", ck.state.step}, {"temperature", cfg.temperature},
                          {"policy", policy}}
               .dump(c.json ? -1 : 2)
        << '\n';
  } else {
    std::ifstream in(trajectories);
    if (!in) throw std::runtime_error("cannot open '" + trajectories + "'");
    const auto r = read_trajectories(in);
    for (const auto& d : r.diagnostics) err << trajectories << ": " << d << " (skipped)\n";
    for (const auto& tr : r.records)
      dst << nlohmann::json{{"hash", trajectory_hash(tr)},
                            {"game", std::string(game_name(tr.game))},
                            {"text", render_trajectory_text(tr)}}
                 .dump()
          << '\n';
  }
  return kOk;
}

// entry point ----------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::istream& in = std::cin,
               std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Self-play training with reasoning-aware advantage modulation"};
  app.require_subcommand(1);

  Common c_train, c_score, c_agree, c_eval, c_play, c_sweep, c_export;
  Overrides o_train, o_score, o_sweep;

  auto* train_cmd = app.add_subcommand("train", "run self-play training");
  add_common(*train_cmd, c_train);
  add_overrides(*train_cmd, o_train);

  std::string score_in, score_out;
  auto* score_cmd = app.add_subcommand("score", "attach evaluator scores to trajectory JSONL");
  add_common(*score_cmd, c_score);
  add_overrides(*score_cmd, o_score);
  score_cmd->add_option("--in", score_in, "trajectory JSONL")->required();
  score_cmd->add_option("--output", score_out, "augmented JSONL (default: stdout)");

  std::string agree_a, agree_b, agree_id_a, agree_id_b, kappa_mode = "dimensions";
  auto* agree_cmd = app.add_subcommand("agree", "agreement between two sets of scores");
  add_common(*agree_cmd, c_agree);
  agree_cmd->add_option("--a", agree_a, "first scored JSONL")->required();
  agree_cmd->add_option("--b", agree_b, "second scored JSONL (default: same as --a)");
  agree_cmd->add_option("--id-a", agree_id_a, "evaluator_id to read from --a");
  agree_cmd->add_option("--id-b", agree_id_b, "evaluator_id to read from --b");
  agree_cmd->add_option("--kappa-mode", kappa_mode, "dimensions or binned");

  std::string eval_ck, eval_game;
  std::vector<std::string> eval_opps;
  int eval_n = 1000;
  bool eval_greedy = false;
  auto* eval_cmd = app.add_subcommand("eval", "win/draw/loss against scripted opponents");
  add_common(*eval_cmd, c_eval);
  eval_cmd->add_option("--checkpoint", eval_ck, "checkpoint file (default: uniform policy)");
  eval_cmd->add_option("--game", eval_game, "game id")->required();
  eval_cmd->add_option("--opponent", eval_opps, "uniform_random, ttt_minimax, kuhn_best_response");
  eval_cmd->add_option("--n", eval_n, "matches per opponent");
  eval_cmd->add_flag("--greedy", eval_greedy, "play the most probable action");

  std::string play_ck, play_game, play_record;
  int play_seat = 0;
  bool play_greedy = false;
  auto* play_cmd = app.add_subcommand("play", "play against a checkpoint in the terminal");
  add_common(*play_cmd, c_play);
  play_cmd->add_option("--checkpoint", play_ck, "checkpoint file (default: uniform policy)");
  play_cmd->add_option("--game", play_game, "game id")->required();
  play_cmd->add_option("--seat", play_seat, "your seat, 0 or 1");
  play_cmd->add_option("--record", play_record, "append the finished match to this JSONL");
  play_cmd->add_flag("--greedy", play_greedy, "agent plays its most probable action");

  std::vector<double> sweep_betas;
  int sweep_matches = 200;
  auto* sweep_cmd = app.add_subcommand("sweep-beta", "train once per beta and compare");
  add_common(*sweep_cmd, c_sweep);
  add_overrides(*sweep_cmd, o_sweep);
  sweep_cmd->add_option("--betas", sweep_betas, "beta values (default 0.01 0.05 0.1 0.2 0.3)");
  sweep_cmd->add_option("--matches", sweep_matches, "evaluation matches per opponent");

  std::string export_ck, export_tr, export_out;
  auto* export_cmd = app.add_subcommand("export", "dump a policy or judge-ready trajectory text");
  add_common(*export_cmd, c_export);
  export_cmd->add_option("--checkpoint", export_ck, "checkpoint to export as probabilities");
  export_cmd->add_option("--trajectories", export_tr, "trajectory JSONL to render as text");
  export_cmd->add_option("--output", export_out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*train_cmd) return cmd_train(c_train, o_train, out);
    if (*score_cmd) return cmd_score(c_score, o_score, score_in, score_out, out, err);
    if (*agree_cmd)
      return cmd_agree(c_agree, agree_a, agree_b, agree_id_a, agree_id_b, kappa_mode, out, err);
    if (*eval_cmd) return cmd_eval(c_eval, eval_ck, eval_game, eval_opps, eval_n, eval_greedy, out);
    if (*play_cmd)
      return cmd_play(c_play, play_ck, play_game, play_seat, play_record, play_greedy, in, out);
    if (*sweep_cmd) return cmd_sweep(c_sweep, o_sweep, sweep_betas, sweep_matches, out);
    if (*export_cmd) return cmd_export(c_export, export_ck, export_tr, export_out, out, err);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kConfigError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnsupportedOpponentError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnknownGameError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kRuntimeError;
}

}  // namespace selfplay::cli
