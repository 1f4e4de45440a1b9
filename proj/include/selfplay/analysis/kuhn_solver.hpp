#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "selfplay/analysis/lp.hpp"
#include "selfplay/policy.hpp"

// Exact Kuhn poker oracle over a hand-written game tree (ante 1, bet 1,
// cards J < Q < K). Strategies are behavioural: one probability of the
// aggressive action per information set.
namespace selfplay::kuhn_oracle {

inline constexpr std::array<char, 3> kCardChars{'J', 'Q', 'K'};

struct Seat0Strategy {
  std::array<double, 3> open_bet{0.5, 0.5, 0.5};        // P(bet) at the first decision
  std::array<double, 3> call_check_bet{0.5, 0.5, 0.5};  // P(call) after check, bet
};

struct Seat1Strategy {
  std::array<double, 3> call_bet{0.5, 0.5, 0.5};         // P(call) facing a bet
  std::array<double, 3> bet_after_check{0.5, 0.5, 0.5};  // P(bet) after a check
};

struct Profile {
  Seat0Strategy s0;
  Seat1Strategy s1;
};

/// One member of the seat-0 equilibrium family (alpha in [0, 1/3]) with the
/// matching seat-1 equilibrium.
inline Profile equilibrium(double alpha = 0.0) {
  Profile p;
  p.s0.open_bet = {alpha, 0.0, 3 * alpha};
  p.s0.call_check_bet = {0.0, alpha + 1.0 / 3.0, 1.0};
  p.s1.call_bet = {0.0, 1.0 / 3.0, 1.0};
  p.s1.bet_after_check = {1.0 / 3.0, 0.0, 1.0};
  return p;
}

/// Expected payoff to seat 0, averaged over the six deals.
inline double expected_value(const Seat0Strategy& a, const Seat1Strategy& b) {
  double total = 0.0;
  for (int c0 = 0; c0 < 3; ++c0)
    for (int c1 = 0; c1 < 3; ++c1) {
      if (c0 == c1) continue;
      const double sg = c0 > c1 ? 1.0 : -1.0;
      const double pb = a.open_bet[c0], pc = b.call_bet[c1];
      const double pbc = b.bet_after_check[c1], pcall = a.call_check_bet[c0];
      const double after_bet = pc * 2 * sg + (1 - pc) * 1.0;
      const double after_check = (1 - pbc) * sg + pbc * (pcall * 2 * sg + (1 - pcall) * -1.0);
      total += pb * after_bet + (1 - pb) * after_check;
    }
  return total / 6.0;
}

inline Seat0Strategy pure_seat0(unsigned bits) {
  Seat0Strategy s;
  for (int c = 0; c < 3; ++c) {
    s.open_bet[c] = (bits >> c) & 1u;
    s.call_check_bet[c] = (bits >> (c + 3)) & 1u;
  }
  return s;
}

inline Seat1Strategy pure_seat1(unsigned bits) {
  Seat1Strategy s;
  for (int c = 0; c < 3; ++c) {
    s.call_bet[c] = (bits >> c) & 1u;
    s.bet_after_check[c] = (bits >> (c + 3)) & 1u;
  }
  return s;
}

/// Best payoff seat 0 can earn against `b` (enumerates all 64 pure strategies).
inline double best_response_seat0(const Seat1Strategy& b) {
  double best = -1e300;
  for (unsigned bits = 0; bits < 64; ++bits) best = std::max(best, expected_value(pure_seat0(bits), b));
  return best;
}

inline double best_response_seat1(const Seat0Strategy& a) {
  double best = -1e300;
  for (unsigned bits = 0; bits < 64; ++bits) best = std::max(best, -expected_value(a, pure_seat1(bits)));
  return best;
}

inline Seat0Strategy best_response_strategy_seat0(const Seat1Strategy& b) {
  unsigned arg = 0;
  double best = -1e300;
  for (unsigned bits = 0; bits < 64; ++bits)
    if (const double v = expected_value(pure_seat0(bits), b); v > best + 1e-12) {
      best = v;
      arg = bits;
    }
  return pure_seat0(arg);
}

inline Seat1Strategy best_response_strategy_seat1(const Seat0Strategy& a) {
  unsigned arg = 0;
  double best = -1e300;
  for (unsigned bits = 0; bits < 64; ++bits)
    if (const double v = -expected_value(a, pure_seat1(bits)); v > best + 1e-12) {
      best = v;
      arg = bits;
    }
  return pure_seat1(arg);
}

struct ExploitabilityReport {
  double br_value_seat0 = 0.0;  // best response in seat 0 against the profile's seat 1
  double br_value_seat1 = 0.0;
  double exploitability = 0.0;  // mean of the two, >= 0
};

inline ExploitabilityReport exploitability(const Profile& p) {
  ExploitabilityReport r;
  r.br_value_seat0 = best_response_seat0(p.s1);
  r.br_value_seat1 = best_response_seat1(p.s0);
  r.exploitability = std::max(0.0, 0.5 * (r.br_value_seat0 + r.br_value_seat1));
  return r;
}

/// Reads the tabular policy's Kuhn information states; unseen keys are uniform.
inline Profile profile_from_policy(const PolicyParameters& params, double temperature = 1.0) {
  const std::vector<std::string> bet_check{"bet", "check"}, call_fold{"call", "fold"};
  auto p_first = [&](Role r, char card, const char* hist, const std::vector<std::string>& legal) {
    const InfoStateKey key{GameId::kuhn_poker, r, std::string(1, card) + "|" + hist};
    return action_probabilities(params, key.str(), legal, temperature)[0];
  };
  Profile p;
  for (int c = 0; c < 3; ++c) {
    const char card = kCardChars[c];
    p.s0.open_bet[c] = p_first(Role::p0, card, "", bet_check);
    p.s0.call_check_bet[c] = p_first(Role::p0, card, "check,bet", call_fold);
    p.s1.call_bet[c] = p_first(Role::p1, card, "bet", call_fold);
    p.s1.bet_after_check[c] = p_first(Role::p1, card, "check", bet_check);
  }
  return p;
}

inline ExploitabilityReport policy_exploitability(const PolicyParameters& params,
                                                  double temperature = 1.0) {
  return exploitability(profile_from_policy(params, temperature));
}

/// Seat-0 value of the game from the sequence-form linear program.
inline double game_value() {
  // Seat-0 sequences: 0 = root, then per card c: 1+4c bet, 2+4c check,
  // 3+4c check-call, 4+4c check-fold.
  constexpr int nx = 13;
  auto x_bet = [](int c) { return 1 + 4 * c; };
  auto x_check = [](int c) { return 2 + 4 * c; };
  auto x_call = [](int c) { return 3 + 4 * c; };
  auto x_fold = [](int c) { return 4 + 4 * c; };
  // Seat-1 sequences: per card c: 4c call, 4c+1 fold (facing bet),
  // 4c+2 bet, 4c+3 check (after check). Info sets: 2c facing bet, 2c+1 after check.
  constexpr int ny = 12;
  std::vector<std::vector<double>> A(nx, std::vector<double>(ny, 0.0));
  for (int c0 = 0; c0 < 3; ++c0)
    for (int c1 = 0; c1 < 3; ++c1) {
      if (c0 == c1) continue;
      const double sg = c0 > c1 ? 1.0 : -1.0, w = 1.0 / 6.0;
      A[x_bet(c0)][4 * c1] += w * 2 * sg;
      A[x_bet(c0)][4 * c1 + 1] += w * 1.0;
      A[x_check(c0)][4 * c1 + 3] += w * sg;
      A[x_call(c0)][4 * c1 + 2] += w * 2 * sg;
      A[x_fold(c0)][4 * c1 + 2] += w * -1.0;
    }

  // Variables: x[0..12], then q0+ q0-, then q_I+ q_I- for the 6 seat-1 info sets.
  constexpr int q0 = nx, qI = nx + 2, nvar = nx + 2 + 12;
  lp::Problem p;
  p.c.assign(nvar, 0.0);
  p.c[q0] = 1.0;
  p.c[q0 + 1] = -1.0;
  {
    std::vector<double> row(nvar, 0.0);
    row[0] = 1.0;
    p.add_row(row, lp::Sense::eq, 1.0);
  }
  for (int c = 0; c < 3; ++c) {
    std::vector<double> r1(nvar, 0.0), r2(nvar, 0.0);
    r1[x_bet(c)] = r1[x_check(c)] = 1.0;
    r1[0] = -1.0;
    r2[x_call(c)] = r2[x_fold(c)] = 1.0;
    r2[x_check(c)] = -1.0;
    p.add_row(r1, lp::Sense::eq, 0.0);
    p.add_row(r2, lp::Sense::eq, 0.0);
  }
  // Root seat-1 sequence: q0 - sum_I q_I <= 0.
  {
    std::vector<double> row(nvar, 0.0);
    row[q0] = 1.0;
    row[q0 + 1] = -1.0;
    for (int i = 0; i < 6; ++i) {
      row[qI + 2 * i] = -1.0;
      row[qI + 2 * i + 1] = 1.0;
    }
    p.add_row(row, lp::Sense::le, 0.0);
  }
  // Each seat-1 sequence (I, a): q_I - (A^T x)_(I,a) <= 0.
  for (int y = 0; y < ny; ++y) {
    const int info = y / 2;
    std::vector<double> row(nvar, 0.0);
    row[qI + 2 * info] = 1.0;
    row[qI + 2 * info + 1] = -1.0;
    for (int x = 0; x < nx; ++x) row[x] = -A[x][y];
    p.add_row(row, lp::Sense::le, 0.0);
  }
  const auto sol = lp::solve(p);
  if (sol.status != lp::Status::optimal) throw std::runtime_error("Kuhn LP did not solve");
  return sol.value;
}

}  // namespace selfplay::kuhn_oracle
