#pragma once

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfplay/advantage.hpp"
#include "selfplay/agents.hpp"
#include "selfplay/config.hpp"
#include "selfplay/evaluator/heuristic.hpp"
#include "selfplay/evaluator/remote.hpp"
#include "selfplay/policy.hpp"

namespace selfplay {

inline constexpr std::uint64_t kTrainerDomain = 4;
inline constexpr int kCheckpointSchemaVersion = 1;

struct TrainerState {
  PolicyParameters params;
  BaselineTable baselines;
  int step = 0;  // completed steps

  friend bool operator==(const TrainerState&, const TrainerState&) = default;
};

inline TrainerState initial_state(const TrainConfig& cfg) {
  return {PolicyParameters{}, BaselineTable(cfg.decay), 0};
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

inline MeanStd mean_std(const std::vector<double>& v) {
  if (v.empty()) return {};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

struct StepReport {
  int step = 0;  // 1-based index of the step this report describes
  std::map<GameId, int> episodes;
  MeanStd a_game, phi, psi, a_mod;
  BaselineTable baselines;
  std::size_t evaluated = 0;
  std::size_t evaluator_failures = 0;
  double wall_ms = 0.0;
  bool aborted = false;
  std::string diagnostic;
};

inline nlohmann::json to_json(const StepReport& r) {
  using nlohmann::json;
  json counts = json::object();
  for (const auto& [g, n] : r.episodes) counts[std::string(game_name(g))] = n;
  auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; };
  json j = {{"step", r.step},
            {"episodes", counts},
            {"a_game", ms(r.a_game)},
            {"phi", ms(r.phi)},
            {"psi", ms(r.psi)},
            {"a_mod", ms(r.a_mod)},
            {"baselines", to_json(r.baselines)},
            {"evaluated", r.evaluated},
            {"evaluator_failures", r.evaluator_failures},
            {"wall_ms", r.wall_ms},
            {"aborted", r.aborted}};
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j;
}

struct PlannedEpisode {
  GameId game = GameId::tictactoe;
  Role role = Role::p0;  // the sampled seat
  std::uint64_t seed = 0;
};

/// Game, role and episode seed for every slot of step `step` (0-based).
/// Draws come from a stream owned by the step, so the plan depends only on
/// (config, step).
inline std::vector<PlannedEpisode> plan_batch(const TrainConfig& cfg, int step,
                                              RandomStream& rng) {
  double total = 0.0;
  for (const auto& g : cfg.games) total += g.weight;
  std::vector<PlannedEpisode> plan;
  plan.reserve(static_cast<std::size_t>(cfg.batch_size));
  for (int i = 0; i < cfg.batch_size; ++i) {
    double u = rng.uniform01() * total;
    GameId game = cfg.games.back().game;
    for (const auto& g : cfg.games) {
      if (g.weight <= 0.0) continue;
      if (u < g.weight) {
        game = g.game;
        break;
      }
      u -= g.weight;
    }
    const Role role = role_from_index(static_cast<int>(rng.below(2)));
    plan.push_back({game, role, derive_seed(cfg.seed, static_cast<std::uint64_t>(step),
                                            static_cast<std::uint64_t>(i) + 1)});
  }
  return plan;
}

inline RandomStream step_stream(const TrainConfig& cfg, int step) {
  return RandomStream(derive_seed(cfg.seed, static_cast<std::uint64_t>(step)), kTrainerDomain);
}

inline std::vector<Role> learning_roles(const TrainConfig& cfg, Role sampled) {
  if (cfg.both_seats_learn) return {Role::p0, Role::p1};
  return {sampled};
}

namespace detail {

struct Rollouts {
  std::vector<PlannedEpisode> plan;
  std::vector<EpisodeRecord> episodes;
  std::vector<std::array<double, 2>> advantage;  // per role, against the pre-step baseline
};

inline Rollouts roll_out(const TrainerState& state, const TrainConfig& cfg, RandomStream& rng) {
  Rollouts r;
  r.plan = plan_batch(cfg, state.step, rng);
  r.episodes.reserve(r.plan.size());
  for (const auto& p : r.plan) {
    r.episodes.push_back(run_self_play_episode(state.params, p.game, p.seed, cfg.temperature,
                                               cfg.reasoning_style, cfg.game_config));
    const auto& out = r.episodes.back().trajectory.outcome;
    r.advantage.push_back({game_advantage(out.r0, state.baselines.value(p.game, Role::p0)),
                           game_advantage(out.r1, state.baselines.value(p.game, Role::p1))});
  }
  return r;
}

/// Adds scale(i, role) * grad log pi for every learning-role turn, in batch
/// and turn order. The turn that forfeited carries no legal action and is
/// skipped.
template <class Scale>
void accumulate_batch_gradient(SparseGradient& grad, const PolicyParameters& params,
                               const TrainConfig& cfg, const Rollouts& r, Scale&& scale) {
  for (std::size_t i = 0; i < r.episodes.size(); ++i) {
    const auto& ep = r.episodes[i];
    const auto roles = learning_roles(cfg, r.plan[i].role);
    for (std::size_t t = 0; t < ep.trajectory.turns.size(); ++t) {
      const auto& turn = ep.trajectory.turns[t];
      if (std::find(roles.begin(), roles.end(), turn.role) == roles.end()) continue;
      const auto& legal = turn.legal_actions;
      if (std::find(legal.begin(), legal.end(), turn.action) == legal.end()) continue;
      accumulate_log_prob_gradient(grad, scale(i, turn.role), params, ep.keys[t], legal,
                                   turn.action, cfg.temperature);
    }
  }
}

inline void update_baselines(BaselineTable& b, const TrainConfig& cfg, const Rollouts& r) {
  if (cfg.baseline_mode == BaselineMode::per_trajectory) {
    for (std::size_t i = 0; i < r.episodes.size(); ++i)
      for (Role role : learning_roles(cfg, r.plan[i].role))
        b.update(r.plan[i].game, role, r.episodes[i].trajectory.outcome.reward(role));
    return;
  }
  std::map<std::pair<GameId, Role>, std::pair<double, int>> sums;
  for (std::size_t i = 0; i < r.episodes.size(); ++i)
    for (Role role : learning_roles(cfg, r.plan[i].role)) {
      auto& s = sums[{r.plan[i].game, role}];
      s.first += r.episodes[i].trajectory.outcome.reward(role);
      ++s.second;
    }
  for (const auto& [k, s] : sums) b.update(k.first, k.second, s.first / s.second);
}

inline bool all_finite(const SparseGradient& g) {
  bool ok = true;
  g.for_each([&](const std::string&, const std::string&, double v) { ok = ok && std::isfinite(v); });
  return ok;
}

}  // namespace detail

struct StepOutput {
  TrainerState state;
  StepReport report;
  std::vector<Trajectory> trajectories;  // with scores blocks attached
  SparseGradient gradient;
};

/// One iteration: sample games and roles, roll out with the current snapshot,
/// compute role-conditioned advantages against the pre-step baselines, then
/// update the baselines, score a subsample, fill the rest and apply one
/// REINFORCE update with the modulated advantages. A non-finite gradient
/// aborts the step: parameters and baselines are returned unchanged and the
/// report carries the diagnostic.
inline StepOutput train_step(const TrainerState& state, const TrainConfig& cfg,
                             Evaluator* evaluator) {
  const auto t0 = std::chrono::steady_clock::now();
  auto rng = step_stream(cfg, state.step);
  const auto r = detail::roll_out(state, cfg, rng);
  const std::size_t n = r.episodes.size();

  StepOutput out;
  out.state = state;
  detail::update_baselines(out.state.baselines, cfg, r);

  const std::string ev_id = evaluator ? evaluator->id() : "none";
  std::vector<EvaluatorVerdict> verdicts(n);
  for (std::size_t i = 0; i < n; ++i)
    verdicts[i] = EvaluatorVerdict::skipped(trajectory_hash(r.episodes[i].trajectory), ev_id);
  if (evaluator) {
    const auto chosen = select_subsample(n, cfg.subsample_fraction, rng);
    std::vector<const Trajectory*> ptrs;
    for (auto i : chosen) ptrs.push_back(&r.episodes[i].trajectory);
    std::vector<EvaluatorVerdict> got;
    try {
      got = evaluator->evaluate_batch(ptrs);
    } catch (const std::exception& e) {
      for (auto i : chosen) got.push_back(EvaluatorVerdict::failed(verdicts[i].trajectory_id, ev_id, e.what()));
    }
    for (std::size_t k = 0; k < chosen.size(); ++k) verdicts[chosen[k]] = std::move(got[k]);
  }

  std::vector<ScoredAdvantage> scored(n);
  std::vector<VerdictStatus> statuses(n);
  std::vector<int> groups;
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = scored[i];
    s.a_game = r.advantage[i][index(r.plan[i].role)];
    statuses[i] = verdicts[i].status;
    if (verdicts[i].status == VerdictStatus::scored) {
      s.phi = phi(*verdicts[i].transferability, cfg.weights);
      s.psi = psi(*verdicts[i].evolution, cfg.weights);
      ++out.report.evaluated;
    } else if (verdicts[i].status == VerdictStatus::failed) {
      ++out.report.evaluator_failures;
    }
    if (cfg.fill_per_game) groups.push_back(static_cast<int>(r.plan[i].game));
  }
  fill_unscored(scored, statuses, cfg.weights.beta, groups);
  if (cfg.force_phi)
    for (auto& s : scored) {
      s.phi = *cfg.force_phi;
      s.a_mod = modulate(s.a_game, s.phi, s.psi, cfg.weights.beta);
    }

  std::vector<std::array<double, 2>> a_mod(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int p = 0; p < 2; ++p)
      a_mod[i][p] = modulate(r.advantage[i][p], scored[i].phi, scored[i].psi, cfg.weights.beta);

  detail::accumulate_batch_gradient(out.gradient, state.params, cfg, r,
                                    [&](std::size_t i, Role p) { return a_mod[i][index(p)]; });

  if (!detail::all_finite(out.gradient)) {
    out.state.params = state.params;
    out.state.baselines = state.baselines;
    out.report.aborted = true;
    out.report.diagnostic = "non-finite gradient; step skipped with parameters and baselines unchanged";
  } else {
    out.state.params = apply_update(state.params, out.gradient, cfg.learning_rate);
  }
  out.state.step = state.step + 1;

  std::vector<double> ag, ph, ps, am;
  out.trajectories.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = scored[i];
    ag.push_back(s.a_game);
    ph.push_back(s.phi);
    ps.push_back(s.psi);
    am.push_back(s.a_mod);
    ++out.report.episodes[r.plan[i].game];
    auto tr = r.episodes[i].trajectory;
    if (cfg.both_seats_learn)
      tr.scores.push_back(scores_block(s, verdicts[i],
                                       std::pair{r.advantage[i][0], r.advantage[i][1]},
                                       std::pair{a_mod[i][0], a_mod[i][1]}));
    else
      tr.scores.push_back(scores_block(s, verdicts[i]));
    out.trajectories.push_back(std::move(tr));
  }
  out.report.step = out.state.step;
  out.report.a_game = mean_std(ag);
  out.report.phi = mean_std(ph);
  out.report.psi = mean_std(ps);
  out.report.a_mod = mean_std(am);
  out.report.baselines = out.state.baselines;
  out.report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Plain role-conditioned REINFORCE gradient for the same step: identical
/// episodes, every learning-role turn scaled by R - b with no modulation.
inline SparseGradient plain_reinforce_gradient(const TrainerState& state, const TrainConfig& cfg) {
  auto rng = step_stream(cfg, state.step);
  const auto r = detail::roll_out(state, cfg, rng);
  SparseGradient grad;
  detail::accumulate_batch_gradient(grad, state.params, cfg, r, [&](std::size_t i, Role p) {
    return r.advantage[i][index(p)];
  });
  return grad;
}

// Checkpoints ---------------------------------------------------------------

inline nlohmann::json checkpoint_json(const TrainerState& s, const std::string& config_hash) {
  auto logits = nlohmann::json::array();
  s.params.for_each([&](const std::string& k, const std::string& a, double v) {
    logits.push_back({{"key", k}, {"action", a}, {"value", v}});
  });
  return {{"schema_version", kCheckpointSchemaVersion},
          {"step", s.step},
          {"logits", logits},
          {"baselines", to_json(s.baselines)},
          {"config_hash", config_hash}};
}

struct Checkpoint {
  TrainerState state;
  std::string config_hash;
};

inline Checkpoint checkpoint_from_json(const nlohmann::json& j, double decay = 0.95) {
  if (j.value("schema_version", 0) != kCheckpointSchemaVersion)
    throw std::invalid_argument("checkpoint: unsupported schema_version");
  Checkpoint c;
  c.state.step = j.at("step").get<int>();
  for (const auto& e : j.at("logits")) {
    const double v = e.at("value").get<double>();
    if (!std::isfinite(v)) throw std::invalid_argument("checkpoint: non-finite logit");
    c.state.params.set(e.at("key").get<std::string>(), e.at("action").get<std::string>(), v);
  }
  c.state.baselines = baselines_from_json(j.at("baselines"), decay);
  c.config_hash = j.value("config_hash", "");
  return c;
}

namespace detail {

inline std::string io_error(const std::filesystem::path& p, std::string_view what) {
  return std::string(what) + " '" + p.string() + "': " + std::strerror(errno);
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(io_error(tmp, "cannot open"));
    f << text;
    if (!f.flush()) throw std::runtime_error(io_error(tmp, "cannot write"));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) throw std::runtime_error("cannot rename '" + tmp + "' to '" + p.string() + "': " + ec.message());
}

/// Keeps the first `lines` lines of a JSONL file (missing file = empty).
inline void truncate_lines(const std::filesystem::path& p, std::size_t lines) {
  if (!std::filesystem::exists(p)) return;
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error(io_error(p, "cannot open"));
  std::string kept, line;
  std::size_t n = 0;
  while (n < lines && std::getline(in, line)) {
    kept += line + '\n';
    ++n;
  }
  in.close();
  write_file(p, kept);
}

inline std::optional<int> latest_checkpoint_step(const std::filesystem::path& dir) {
  std::optional<int> best;
  if (!std::filesystem::is_directory(dir)) return best;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (!name.starts_with("step-") || !name.ends_with(".json")) continue;
    try {
      const int n = std::stoi(name.substr(5, name.size() - 10));
      if (!best || n > *best) best = n;
    } catch (const std::exception&) {
    }
  }
  return best;
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const TrainerState& s,
                            const std::string& config_hash) {
  detail::write_file(path, checkpoint_json(s, config_hash).dump() + "\n");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path, double decay = 0.95) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error(detail::io_error(path, "cannot open checkpoint"));
  try {
    return checkpoint_from_json(nlohmann::json::parse(f), decay);
  } catch (const std::exception& e) {
    throw std::runtime_error("bad checkpoint '" + path.string() + "': " + e.what());
  }
}

inline std::unique_ptr<Evaluator> make_evaluator(const TrainConfig& cfg) {
  if (cfg.evaluator == EvaluatorKind::remote) return std::make_unique<RemoteEvaluator>(cfg.remote);
  return std::make_unique<HeuristicEvaluator>(cfg.lexicon);
}

struct TrainOptions {
  Evaluator* evaluator = nullptr;  // null: built from the config
  bool resume = true;
  std::function<void(const StepReport&)> on_step;
};

struct TrainResult {
  TrainerState state;
  std::vector<StepReport> reports;  // steps executed by this call
  int resumed_from = 0;
};

/// Runs cfg.steps steps. With an output directory the run writes
/// config.json, checkpoints/step-N.json, reports.jsonl and (optionally)
/// trajectories.jsonl, and picks up from the newest checkpoint if one exists.
inline TrainResult train(const TrainConfig& cfg, const TrainOptions& opt = {}) {
  if (auto problems = validate(cfg); !problems.empty()) throw ConfigError(std::move(problems));
  std::unique_ptr<Evaluator> owned;
  Evaluator* ev = opt.evaluator;
  if (!ev) {
    owned = make_evaluator(cfg);
    ev = owned.get();
  }
  const auto hash = config_hash(cfg);
  TrainResult res;
  res.state = initial_state(cfg);

  namespace fs = std::filesystem;
  const bool persist = !cfg.out_dir.empty();
  const fs::path dir(cfg.out_dir);
  const fs::path ckdir = dir / "checkpoints";
  const fs::path traj_path = dir / "trajectories.jsonl";
  const fs::path report_path = dir / "reports.jsonl";
  std::ofstream traj_out, report_out;

  if (persist) {
    std::error_code ec;
    fs::create_directories(ckdir, ec);
    if (ec) throw std::runtime_error("cannot create '" + ckdir.string() + "': " + ec.message());
    if (opt.resume) {
      if (const auto last = detail::latest_checkpoint_step(ckdir)) {
        auto ck = load_checkpoint(ckdir / ("step-" + std::to_string(*last) + ".json"), cfg.decay);
        if (ck.config_hash != hash)
          throw std::runtime_error("checkpoint in '" + ckdir.string() +
                                   "' belongs to a different configuration");
        res.state = std::move(ck.state);
        res.resumed_from = res.state.step;
      }
    }
    const auto done = static_cast<std::size_t>(res.state.step);
    if (res.resumed_from > 0) {
      detail::truncate_lines(traj_path, done * static_cast<std::size_t>(cfg.batch_size));
      detail::truncate_lines(report_path, done);
    } else {
      for (const auto& p : {traj_path, report_path}) fs::remove(p, ec);
    }
    detail::write_file(dir / "config.json", to_json(cfg).dump(2) + "\n");
    if (cfg.export_trajectories) {
      traj_out.open(traj_path, std::ios::app | std::ios::binary);
      if (!traj_out) throw std::runtime_error(detail::io_error(traj_path, "cannot open"));
    }
    report_out.open(report_path, std::ios::app | std::ios::binary);
    if (!report_out) throw std::runtime_error(detail::io_error(report_path, "cannot open"));
  }

  while (res.state.step < cfg.steps) {
    auto step = train_step(res.state, cfg, ev);
    res.state = std::move(step.state);
    if (persist) {
      if (traj_out.is_open()) {
        for (const auto& tr : step.trajectories) traj_out << to_jsonl_line(tr) << '\n';
        if (!traj_out.flush()) throw std::runtime_error(detail::io_error(traj_path, "cannot write"));
      }
      report_out << to_json(step.report).dump() << '\n';
      if (!report_out.flush()) throw std::runtime_error(detail::io_error(report_path, "cannot write"));
      if (res.state.step % cfg.checkpoint_every == 0 || res.state.step == cfg.steps)
        save_checkpoint(ckdir / ("step-" + std::to_string(res.state.step) + ".json"), res.state,
                        hash);
    }
    if (opt.on_step) opt.on_step(step.report);
    res.reports.push_back(std::move(step.report));
  }
  return res;
}

}  // namespace selfplay
