// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "selfplay/analysis.hpp"
#include "selfplay/evaluator/heuristic.hpp"
#include "selfplay/trainer.hpp"

using namespace selfplay;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 -------------------------------------------------------------------------

Result zero_sum_fuzz() {
  const auto t0 = Clock::now();
  long bad = 0, total = 0;
  for (GameId g : kAllGames) {
    for (std::uint64_t seed = 0; seed < 10'000; ++seed) {
      auto s = reset(g, seed);
      RandomStream chance(seed, kChanceDomain);
      RandomStream pick(seed, 77);
      int n = 0;
      while (!s.terminal && n < turn_cap(g)) {
        const auto legal = legal_actions(s);
        s = apply_action(s, legal[pick.below(legal.size())], chance).state;
        ++n;
      }
      if (!s.terminal) s = truncate(s);
      ++total;
      if (!s.outcome || s.outcome->r0 + s.outcome->r1 != 0.0) ++bad;
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 30.0,
          fmt("%ld playouts over %zu games, %ld violations, %.2f s", total, kAllGames.size(), bad,
              secs)};
}

// 2 -------------------------------------------------------------------------

Result formula_grid() {
  const auto t0 = Clock::now();
  const double levels_phi[] = {0.0, 0.5, 1.0};
  const double levels_psi[] = {-1.0, 0.0, 1.0};
  const double a_games[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const double betas[] = {0.0, 0.2};
  double worst = 0.0;
  long cases = 0;
  for (double a : levels_phi)
    for (double s : levels_phi)
      for (double r : levels_phi)
        for (double d : levels_psi)
          for (double ad : levels_psi)
            for (double c : levels_psi)
              for (double ag : a_games)
                for (double beta : betas) {
                  const double phi_ref = 0.35 * a + 0.35 * s + 0.30 * r;
                  const double psi_ref = 0.35 * d + 0.25 * ad + 0.40 * c;
                  const double mod_ref = ag * phi_ref + beta * psi_ref;
                  const double p = phi(TransferabilityDims{a, s, r, {}, {}});
                  const double q = psi(EvolutionDims{d, ad, c, {}});
                  const double m = modulate(ag, p, q, beta);
                  worst = std::max({worst, std::abs(p - phi_ref), std::abs(q - psi_ref),
                                    std::abs(m - mod_ref)});
                  ++cases;
                }
  const double secs = seconds_since(t0);
  return {cases == 27 * 27 * 5 * 2 && worst <= 1e-12 && secs < 1.0,
          fmt("%ld cases, max abs error %.3g, %.4f s", cases, worst, secs)};
}

// 3 -------------------------------------------------------------------------

// Plain role-conditioned REINFORCE with its own baselines, softmax and
// parameter update, fed the same episodes.
struct PlainRae {
  PolicyParameters params;
  std::map<std::pair<GameId, int>, double> baseline;

  SparseGradient step(const TrainConfig& cfg, int step) {
    auto rng = step_stream(cfg, step);
    const auto plan = plan_batch(cfg, step, rng);
    std::vector<EpisodeRecord> eps;
    for (const auto& p : plan)
      eps.push_back(run_self_play_episode(params, p.game, p.seed, cfg.temperature,
                                          cfg.reasoning_style, cfg.game_config));
    std::vector<std::array<double, 2>> adv;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const auto& o = eps[i].trajectory.outcome;
      adv.push_back({o.r0 - baseline[{plan[i].game, 0}], o.r1 - baseline[{plan[i].game, 1}]});
    }
    for (std::size_t i = 0; i < eps.size(); ++i)
      for (int role : {0, 1}) {
        auto& b = baseline[{plan[i].game, role}];
        b = cfg.decay * b + (1.0 - cfg.decay) * eps[i].trajectory.outcome.reward(role_from_index(role));
      }
    SparseGradient grad;
    const double temp = cfg.temperature;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const auto& tr = eps[i].trajectory;
      for (std::size_t t = 0; t < tr.turns.size(); ++t) {
        const auto& turn = tr.turns[t];
        const auto& legal = turn.legal_actions;
        const auto chosen = std::find(legal.begin(), legal.end(), turn.action);
        if (chosen == legal.end()) continue;
        const auto& key = eps[i].keys[t];
        std::vector<double> z(legal.size());
        double zmax = -INFINITY;
        for (std::size_t k = 0; k < legal.size(); ++k) {
          z[k] = params.get(key, legal[k]) / temp;
          zmax = std::max(zmax, z[k]);
        }
        double total = 0.0;
        for (double& v : z) {
          v = std::exp(v - zmax);
          total += v;
        }
        const double scale = adv[i][index(turn.role)];
        for (std::size_t k = 0; k < legal.size(); ++k) {
          const double ind = legal.begin() + k == chosen ? 1.0 : 0.0;
          grad.add(key, legal[k], scale * ((ind - z[k] / total) / temp));
        }
      }
    }
    grad.for_each([&](const std::string& k, const std::string& a, double v) {
      if (const double d = cfg.learning_rate * v; d != 0.0) params.add(k, a, d);
    });
    return grad;
  }
};

bool same_bits(const SparseTable& a, const SparseTable& b) {
  if (a.entry_count() != b.entry_count()) return false;
  bool same = true;
  a.for_each([&](const std::string& k, const std::string& act, double v) {
    const double w = b.get(k, act);
    same = same && std::memcmp(&v, &w, sizeof v) == 0;
  });
  return same;
}

Result plain_reinforce_reduction() {
  TrainConfig cfg;
  cfg.weights.beta = 0.0;
  cfg.force_phi = 1.0;
  cfg.batch_size = 64;
  HeuristicEvaluator ev;
  auto state = initial_state(cfg);
  PlainRae ref;
  int equal_steps = 0;
  std::size_t entries = 0;
  for (int k = 0; k < 10; ++k) {
    const auto g_ref = ref.step(cfg, k);
    auto out = train_step(state, cfg, &ev);
    if (!same_bits(g_ref, out.gradient) || !same_bits(ref.params, out.state.params)) break;
    entries += g_ref.entry_count();
    state = std::move(out.state);
    ++equal_steps;
  }
  return {equal_steps == 10,
          fmt("%d/10 consecutive steps bitwise equal (%zu gradient entries compared)", equal_steps,
              entries)};
}

// 4 -------------------------------------------------------------------------

Result ema_law() {
  BaselineTable b(0.95);
  double worst = 0.0;
  for (int n = 1; n <= 1000; ++n) {
    b.update(GameId::kuhn_poker, Role::p0, 1.0);
    worst = std::max(worst, std::abs(b.value(GameId::kuhn_poker, Role::p0) - (1.0 - std::pow(0.95, n))));
  }
  return {worst <= 1e-12, fmt("n = 1..1000, max abs error %.3g", worst)};
}

// 5 -------------------------------------------------------------------------

Result gradient_check() {
  RandomStream rng(20240601, 123);
  double worst = 0.0;
  long entries = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(8);
    std::vector<std::string> legal;
    for (std::size_t i = 0; i < n; ++i) legal.push_back("a" + std::to_string(i));
    PolicyParameters p;
    for (const auto& a : legal) p.set("k", a, (rng.uniform01() - 0.5) * 4);
    const double temp = 0.5 + rng.uniform01() * 1.5;
    const auto& chosen = legal[rng.below(n)];
    const auto g = log_prob_gradient(p, "k", legal, chosen, temp);
    for (const auto& a : legal) {
      const double h = 1e-5;
      auto plus = p, minus = p;
      plus.add("k", a, h);
      minus.add("k", a, -h);
      const double fd = (action_log_prob(plus, "k", legal, chosen, temp) -
                         action_log_prob(minus, "k", legal, chosen, temp)) /
                        (2 * h);
      const double an = g.get("k", a);
      worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), std::abs(fd)));
      ++entries;
    }
  }
  return {worst < 1e-5,
          fmt("1000 instances (%ld partials), max relative error %.3g", entries, worst)};
}

// 6 -------------------------------------------------------------------------

Result kuhn_oracle_check() {
  const double lp = kuhn_oracle::game_value();
  double worst_family = 0.0, worst_expl = 0.0;
  for (double alpha : {0.0, 1.0 / 6, 1.0 / 3}) {
    const auto eq = kuhn_oracle::equilibrium(alpha);
    worst_family = std::max(worst_family, std::abs(kuhn_oracle::expected_value(eq.s0, eq.s1) + 1.0 / 18));
    worst_expl = std::max(worst_expl, kuhn_oracle::exploitability(eq).exploitability);
  }
  const auto uni = kuhn_oracle::exploitability(kuhn_oracle::Profile{});
  const bool ok = std::abs(lp + 1.0 / 18) <= 1e-9 && worst_family <= 1e-9 && worst_expl <= 1e-9 &&
                  uni.exploitability > 0.0;
  return {ok, fmt("LP value %.12f (target %.12f); equilibrium family |v+1/18| %.2g, "
                  "exploitability %.2g; uniform exploitability %.6f",
                  lp, -1.0 / 18, worst_family, worst_expl, uni.exploitability)};
}

// 7 -------------------------------------------------------------------------

TrainConfig single_game(GameId g, int steps, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.games = {{g, 1.0}};
  cfg.steps = steps;
  cfg.seed = seed;
  return cfg;
}

Result learning_progress() {
  const TrainConfig defaults;
  std::ostringstream detail;

  // Kuhn: the smallest whole number of default-size batches covering 5000 episodes.
  const int kuhn_steps = (5000 + defaults.batch_size - 1) / defaults.batch_size;
  const double uniform = kuhn_oracle::exploitability(kuhn_oracle::Profile{}).exploitability;
  double sum = 0.0;
  auto t0 = Clock::now();
  detail << "Kuhn " << kuhn_steps << "x" << defaults.batch_size << " episodes, exploitability per seed [";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto res = train(single_game(GameId::kuhn_poker, kuhn_steps, seed));
    const double e = kuhn_oracle::policy_exploitability(res.state.params, defaults.temperature).exploitability;
    sum += e;
    detail << (seed > 1 ? " " : "") << fmt("%.4f", e);
  }
  const double kuhn_secs = seconds_since(t0);
  const double reduction = 1.0 - (sum / 5) / uniform;
  const bool kuhn_ok = reduction >= 0.5 && kuhn_secs < 600;
  detail << fmt("], mean %.4f vs uniform %.4f, reduction %.2f%% (%.1f s)", sum / 5, uniform,
                100 * reduction, kuhn_secs);

  // Tic-Tac-Toe: default step count, scored with greedy decoding.
  int passing = 0;
  t0 = Clock::now();
  detail << "; TTT " << defaults.steps << "x" << defaults.batch_size << ", win+draw greedy/sampled [";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto res = train(single_game(GameId::tictactoe, defaults.steps, seed));
    GreedyPolicyAgent greedy(res.state.params);
    PolicyAgent sampled(res.state.params, defaults.temperature);
    UniformRandomAgent rnd;
    const auto mg = win_rate(greedy, rnd, GameId::tictactoe, 1000, seed);
    const auto ms = win_rate(sampled, rnd, GameId::tictactoe, 1000, seed);
    const double wd = mg.win_rate() + mg.draw_rate();
    passing += wd >= 0.9;
    detail << (seed > 1 ? " " : "") << fmt("%.3f/%.3f", wd, ms.win_rate() + ms.draw_rate());
  }
  const double ttt_secs = seconds_since(t0);
  const bool ttt_ok = passing >= 4 && ttt_secs < 600;
  detail << fmt("], %d/5 seeds >= 0.90 (%.1f s)", passing, ttt_secs);
  return {kuhn_ok && ttt_ok, detail.str()};
}

// 8 -------------------------------------------------------------------------

Trajectory fixture(const std::vector<std::string>& reasoning) {
  Trajectory tr;
  tr.game = GameId::tictactoe;
  tr.seed = 1;
  for (std::size_t i = 0; i < reasoning.size(); ++i)
    tr.turns.push_back({static_cast<int>(i), role_from_index(int(i % 2)), "obs", reasoning[i], "4",
                        {"4", "5"}});
  tr.outcome = Outcome::draw();
  return tr;
}

EvolutionDims rer(const Trajectory& tr) {
  return heuristic_score_rer(render_trajectory_text(tr), tr.turns.size(), reasoning_lengths(tr));
}

Result evaluator_special_cases() {
  const std::string long_text =
      "Building on the earlier analysis, the opponent adjusts, so I adapt my plan in response "
      "and keep the line that follows from every step so far.";
  const auto two = rer(fixture({long_text, long_text + " " + long_text}));
  const auto empty = rer(fixture({long_text, "", long_text, long_text}));
  const bool short_ok = two.deepening == 0 && two.adaptation == 0 && two.coherence == 0;
  const bool empty_ok = empty.deepening == -1 && empty.adaptation == -1 && empty.coherence == -1;
  const double s08 = snap(0.8, kPhiLevels), s03 = snap(0.3, kPhiLevels), s025 = snap(0.25, kPhiLevels);
  const bool snap_ok = s08 == 1.0 && s03 == 0.5 && s025 == 0.0;
  return {short_ok && empty_ok && snap_ok,
          fmt("2 turns -> (%g,%g,%g); empty block -> (%g,%g,%g); snap 0.8->%g, 0.3->%g, 0.25->%g",
              two.deepening, two.adaptation, two.coherence, empty.deepening, empty.adaptation,
              empty.coherence, s08, s03, s025)};
}

// 9 -------------------------------------------------------------------------

Result fill_semantics() {
  const auto picked = subsample_count(4, 0.5);
  std::vector<ScoredAdvantage> b(4);
  b[0].phi = 1.0;
  b[1].phi = 0.5;
  fill_unscored(b, {VerdictStatus::scored, VerdictStatus::scored, VerdictStatus::skipped,
                    VerdictStatus::skipped},
                0.2);
  const bool mean_ok = b[2].phi == 0.75 && b[3].phi == 0.75 &&
                       b[2].fill_source == FillSource::batch_mean;

  std::vector<ScoredAdvantage> f(4);
  for (auto& e : f) {
    e.phi = 0.0;
    e.psi = -1.0;
  }
  fill_unscored(f, std::vector<VerdictStatus>(4, VerdictStatus::failed), 0.2);
  bool neutral_ok = true;
  for (const auto& e : f) neutral_ok = neutral_ok && e.phi == 1.0 && e.psi == 0.0;
  return {picked == 2 && mean_ok && neutral_ok,
          fmt("subsample %zu of 4; filled phi %.17g, %.17g; all-failed -> phi %g, psi %g", picked,
              b[2].phi, b[3].phi, f[0].phi, f[0].psi)};
}

// 10 ------------------------------------------------------------------------

Result agreement_stats() {
  using V = std::vector<std::string>;
  const std::vector<std::string> dom{"x", "y"};
  const double k0 = *cohen_kappa(V{"x", "x", "y", "y"}, V{"x", "y", "x", "y"}, dom);
  const double k5 = *cohen_kappa(V{"x", "x", "y", "y"}, V{"x", "x", "y", "x"}, dom);
  const double r8 = *spearman_rho({1, 2, 3, 4}, {1, 3, 2, 4});
  const double rt = *spearman_rho({1, 2, 2, 3}, {1, 2, 3, 4});  // mid-ranks: (1, 2.5, 2.5, 4)
  const double rt_ref = 4.5 / std::sqrt(4.5 * 5.0);
  bool ok = std::abs(k0) <= 1e-12 && std::abs(k5 - 0.5) <= 1e-12 && std::abs(r8 - 0.8) <= 1e-12 &&
            std::abs(rt - rt_ref) <= 1e-12;

  RandomStream rng(5, 6);
  const std::vector<double> levels{0.0, 0.5, 1.0};
  int self_checks = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(2 + rng.below(30));
    for (auto& v : a) v = levels[rng.below(3)];
    const bool constant = std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; });
    const auto k = cohen_kappa(a, a, levels);
    if (constant) ok = ok && !k;
    else ok = ok && k && std::abs(*k - 1.0) <= 1e-12;
    ++self_checks;
  }
  return {ok, fmt("kappa %.3g and %.3g (hand 0, 0.5); rho %.15g (hand 0.8), tied rho %.15g "
                  "(hand %.15g); %d self-agreement draws",
                  k0, k5, r8, rt, rt_ref, self_checks)};
}

// 11 ------------------------------------------------------------------------

Result exemplar_discrimination() {
  const std::string abstract_text =
      "Enumerate cases: Case 1 yields \xE2\x88\x92" "2\xC3\x97" "0.5=\xE2\x88\x92" "1; Case 2 yields "
      "+2\xC3\x97" "0.5=+1. Select the option maximizing expected utility.";
  const std::string specific_text =
      "I have the lowest card and the opponent bet, which usually indicates strength. I should "
      "fold.";
  const double phi_abs = phi(heuristic_score_rtc(abstract_text, GameId::kuhn_poker));
  const double phi_spec = phi(heuristic_score_rtc(specific_text, GameId::kuhn_poker));

  const std::string base =
      "I start by listing the open options and the value each one carries for me right now";
  const auto evolving = rer(fixture({
      base + ".",
      base + ", and the opponent just moved so I adjust my plan in response to that threat.",
      base + ". Building on my earlier analysis, the opponent's reply confirms the pattern, so I "
             "adapt and extend the same plan one step deeper.",
      base + ". As established earlier, the opponent keeps answering the same way, so next I "
             "adjust toward the line that exploits it, which follows from every step so far.",
  }));
  const auto degrading = rer(fixture({
      "I list every open cell, weigh the two diagonals against the middle row, count the "
      "threats each move creates and pick the square that keeps the most lines alive for me.",
      "The middle row was a mistake and contrary to what I wanted; take a corner now and hope "
      "it works out somehow.",
      "Just take any square, the plan should have been different and it does not matter.",
  }));
  const double psi_ev = psi(evolving), psi_deg = psi(degrading);
  return {phi_abs == 1.0 && phi_spec == 0.0 && psi_ev > 0.0 && psi_deg < 0.0,
          fmt("phi abstract %g, game-specific %g; psi evolving %g, degrading %g", phi_abs,
              phi_spec, psi_ev, psi_deg)};
}

// 12 ------------------------------------------------------------------------

Result beta_sweep() {
  TrainConfig cfg;
  cfg.steps = 10;
  cfg.seed = 7;
  cfg.out_dir = (fs::temp_directory_path() / "selfplay_acceptance_sweep").string();
  fs::remove_all(cfg.out_dir);
  SweepOptions opt;
  opt.matches = 200;
  const auto t0 = Clock::now();
  const auto rows = sweep_beta(cfg, opt);
  const double secs = seconds_since(t0);

  bool ok = rows.size() == default_beta_grid().size();
  std::ostringstream betas;
  for (std::size_t i = 0; ok && i < rows.size(); ++i) {
    const auto& r = rows[i];
    ok = r.beta == default_beta_grid()[i] && r.seed == cfg.seed && r.exploitability &&
         r.results.size() == rows[0].results.size() &&
         fs::exists(fs::path(r.out_dir) / "checkpoints" / ("step-" + std::to_string(cfg.steps) + ".json"));
    for (std::size_t k = 0; ok && k < r.results.size(); ++k)
      ok = r.results[k].game == rows[0].results[k].game &&
           r.results[k].opponent == rows[0].results[k].opponent && r.results[k].stats.n == opt.matches;
    betas << (i ? " " : "") << r.beta << fmt("(expl %.3f)", r.exploitability ? r.exploitability->exploitability : -1.0);
  }
  return {ok, fmt("%zu rows, seed %llu, %zu results per row, %d steps each; betas %s; %.1f s",
                  rows.size(), static_cast<unsigned long long>(cfg.seed),
                  rows.empty() ? std::size_t{0} : rows[0].results.size(), cfg.steps,
                  betas.str().c_str(), secs)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Result()>>> criteria{
      {"zero-sum fuzz", zero_sum_fuzz},
      {"formula conformance", formula_grid},
      {"plain REINFORCE reduction", plain_reinforce_reduction},
      {"EMA law", ema_law},
      {"gradient check", gradient_check},
      {"Kuhn oracle", kuhn_oracle_check},
      {"learning progress", learning_progress},
      {"evaluator special cases", evaluator_special_cases},
      {"fill semantics", fill_semantics},
      {"agreement statistics", agreement_stats},
      {"exemplar discrimination", exemplar_discrimination},
      {"beta sweep", beta_sweep},
  };
  int failed = 0, n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.pass;
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << n << " " << name << ": " << r.detail
              << std::endl;
  }
  std::cout << (n - failed) << "/" << n << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
