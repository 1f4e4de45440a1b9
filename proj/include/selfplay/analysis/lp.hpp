#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Dense two-phase simplex, small problems only.
namespace selfplay::lp {

enum class Sense { le, eq, ge };

/// maximize c.x subject to rows (a_i . x  sense_i  b_i) and x >= 0
struct Problem {
  std::vector<double> c;
  std::vector<std::vector<double>> a;
  std::vector<Sense> sense;
  std::vector<double> b;

  std::size_t add_row(std::vector<double> coeffs, Sense s, double rhs) {
    coeffs.resize(c.size(), 0.0);
    a.push_back(std::move(coeffs));
    sense.push_back(s);
    b.push_back(rhs);
    return a.size() - 1;
  }
};

enum class Status { optimal, infeasible, unbounded };

struct Solution {
  Status status = Status::infeasible;
  double value = 0.0;
  std::vector<double> x;
};

namespace detail {

inline constexpr double kEps = 1e-11;

struct Tableau {
  std::vector<std::vector<double>> t;  // rows: constraints, last column rhs
  std::vector<std::size_t> basis;
  std::size_t cols = 0;

  void pivot(std::size_t r, std::size_t c) {
    const double p = t[r][c];
    for (auto& v : t[r]) v /= p;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i == r || t[i][c] == 0.0) continue;
      const double f = t[i][c];
      for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[r][j];
    }
    basis[r] = c;
  }

  /// Bland's rule. Returns false when unbounded.
  bool maximize(const std::vector<double>& cost, const std::vector<bool>& may_enter) {
    for (std::size_t iter = 0; iter < 100000; ++iter) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols && enter == cols; ++j) {
        if (!may_enter[j]) continue;
        double r = cost[j];
        for (std::size_t i = 0; i < t.size(); ++i) r -= cost[basis[i]] * t[i][j];
        if (r > kEps) enter = j;
      }
      if (enter == cols) return true;
      std::size_t leave = t.size();
      double best = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i][enter] <= kEps) continue;
        const double ratio = t[i][cols] / t[i][enter];
        if (leave == t.size() || ratio < best - kEps ||
            (std::abs(ratio - best) <= kEps && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == t.size()) return false;
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex: iteration limit reached");
  }

  double objective(const std::vector<double>& cost) const {
    double v = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) v += cost[basis[i]] * t[i][cols];
    return v;
  }
};

}  // namespace detail

inline Solution solve(const Problem& p) {
  const std::size_t n = p.c.size(), m = p.a.size();
  if (p.sense.size() != m || p.b.size() != m) throw std::invalid_argument("lp: ragged problem");
  std::size_t slacks = 0, arts = 0;
  std::vector<Sense> sense = p.sense;
  std::vector<double> b = p.b;
  std::vector<std::vector<double>> a = p.a;
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i].size() != n) throw std::invalid_argument("lp: row width differs from objective");
    if (b[i] < 0) {
      b[i] = -b[i];
      for (auto& v : a[i]) v = -v;
      if (sense[i] == Sense::le) sense[i] = Sense::ge;
      else if (sense[i] == Sense::ge) sense[i] = Sense::le;
    }
    if (sense[i] != Sense::eq) ++slacks;
    if (sense[i] != Sense::le) ++arts;
  }

  detail::Tableau tab;
  tab.cols = n + slacks + arts;
  tab.t.assign(m, std::vector<double>(tab.cols + 1, 0.0));
  tab.basis.assign(m, 0);
  std::size_t s = n, art = n + slacks;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) tab.t[i][j] = a[i][j];
    tab.t[i][tab.cols] = b[i];
    if (sense[i] == Sense::le) {
      tab.t[i][s] = 1.0;
      tab.basis[i] = s++;
    } else {
      if (sense[i] == Sense::ge) tab.t[i][s++] = -1.0;
      tab.t[i][art] = 1.0;
      tab.basis[i] = art++;
    }
  }

  std::vector<bool> may_enter(tab.cols, true);
  if (arts > 0) {
    std::vector<double> phase1(tab.cols, 0.0);
    for (std::size_t j = n + slacks; j < tab.cols; ++j) phase1[j] = -1.0;
    tab.maximize(phase1, may_enter);
    if (tab.objective(phase1) < -1e-9) return {Status::infeasible, 0.0, {}};
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis[i] < n + slacks) continue;
      for (std::size_t j = 0; j < n + slacks; ++j)
        if (std::abs(tab.t[i][j]) > detail::kEps) {
          tab.pivot(i, j);
          break;
        }
    }
    for (std::size_t j = n + slacks; j < tab.cols; ++j) may_enter[j] = false;
  }

  std::vector<double> cost(tab.cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = p.c[j];
  if (!tab.maximize(cost, may_enter)) return {Status::unbounded, 0.0, {}};

  Solution sol;
  sol.status = Status::optimal;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (tab.basis[i] < n) sol.x[tab.basis[i]] = tab.t[i][tab.cols];
  for (std::size_t j = 0; j < n; ++j) sol.value += p.c[j] * sol.x[j];
  return sol;
}

}  // namespace selfplay::lp
