#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

// Exact Tic-Tac-Toe backward induction on 9-character boards ('X', 'O',
// '.'), X moving first. Written independently of the game engine.
namespace selfplay::ttt_oracle {

enum class Value { loss = -1, draw = 0, win = 1 };

struct Solution {
  Value value = Value::draw;  // for the side to move
  int move = -1;              // lowest-index optimal cell, -1 when terminal
};

inline constexpr std::array<std::array<int, 3>, 8> kLines{{{0, 1, 2},
                                                           {3, 4, 5},
                                                           {6, 7, 8},
                                                           {0, 3, 6},
                                                           {1, 4, 7},
                                                           {2, 5, 8},
                                                           {0, 4, 8},
                                                           {2, 4, 6}}};

inline char winner(std::string_view b) {
  for (const auto& l : kLines)
    if (b[l[0]] != '.' && b[l[0]] == b[l[1]] && b[l[1]] == b[l[2]]) return b[l[0]];
  return 0;
}

inline char to_move(std::string_view b) {
  int x = 0, o = 0;
  for (char c : b) {
    x += c == 'X';
    o += c == 'O';
  }
  if (b.size() != 9 || x + o + static_cast<int>(std::count(b.begin(), b.end(), '.')) != 9 ||
      (x != o && x != o + 1))
    throw std::invalid_argument("not a reachable tic-tac-toe board: " + std::string(b));
  return x == o ? 'X' : 'O';
}

class Solver {
 public:
  Solution solve(std::string_view board) {
    const char me = to_move(board);
    if (const char w = winner(board)) {
      // The previous mover completed a line.
      return {w == me ? Value::win : Value::loss, -1};
    }
    return search(std::string(board), me);
  }

 private:
  Solution search(const std::string& b, char me) {
    if (const auto it = memo_.find(b); it != memo_.end()) return it->second;
    Solution best{Value::loss, -1};
    bool any = false;
    std::string next = b;
    for (int i = 0; i < 9; ++i) {
      if (b[i] != '.') continue;
      next[i] = me;
      Value v;
      if (winner(next) == me) {
        v = Value::win;
      } else if (next.find('.') == std::string::npos) {
        v = Value::draw;
      } else {
        v = static_cast<Value>(-static_cast<int>(search(next, me == 'X' ? 'O' : 'X').value));
      }
      next[i] = '.';
      if (!any || static_cast<int>(v) > static_cast<int>(best.value)) {
        best = {v, i};
        any = true;
      }
    }
    if (!any) best = {Value::draw, -1};
    memo_.emplace(b, best);
    return best;
  }

  std::unordered_map<std::string, Solution> memo_;
};

inline Solution solve(std::string_view board) {
  static thread_local Solver solver;
  return solver.solve(board);
}

}  // namespace selfplay::ttt_oracle
