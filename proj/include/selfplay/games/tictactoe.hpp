#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace selfplay::ttt {

enum class Mark : std::uint8_t { empty, x, o };
enum class Winner { x, o, draw, ongoing };

struct Board {
  std::array<Mark, 9> cells{};

  int count(Mark m) const noexcept {
    int n = 0;
    for (Mark c : cells) n += (c == m);
    return n;
  }
  bool full() const noexcept { return count(Mark::empty) == 0; }

  friend bool operator==(const Board&, const Board&) = default;
};

inline constexpr std::array<std::array<int, 3>, 8> kLines{{
    {0, 1, 2}, {3, 4, 5}, {6, 7, 8},  // rows
    {0, 3, 6}, {1, 4, 7}, {2, 5, 8},  // columns
    {0, 4, 8}, {2, 4, 6},             // diagonals
}};

class InvalidBoardError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline char mark_char(Mark m) noexcept {
  switch (m) {
    case Mark::x: return 'X';
    case Mark::o: return 'O';
    default: return '.';
  }
}

/// Nine characters, row-major, 'X' / 'O' / '.'.
inline std::string board_string(const Board& b) {
  std::string s(9, '.');
  for (int i = 0; i < 9; ++i) s[i] = mark_char(b.cells[i]);
  return s;
}

inline Board board_from_string(std::string_view s) {
  if (s.size() != 9) throw InvalidBoardError("board string must have 9 cells");
  Board b;
  for (int i = 0; i < 9; ++i) {
    switch (s[i]) {
      case 'X': case 'x': b.cells[i] = Mark::x; break;
      case 'O': case 'o': b.cells[i] = Mark::o; break;
      case '.': case '-': case ' ': b.cells[i] = Mark::empty; break;
      default: throw InvalidBoardError("bad cell character");
    }
  }
  return b;
}

inline bool has_line(const Board& b, Mark m) noexcept {
  for (const auto& line : kLines)
    if (b.cells[line[0]] == m && b.cells[line[1]] == m && b.cells[line[2]] == m)
      return true;
  return false;
}

/// Whose mark goes next on a valid board (X moves first).
inline Mark to_move(const Board& b) noexcept {
  return b.count(Mark::x) == b.count(Mark::o) ? Mark::x : Mark::o;
}

inline Winner winner(const Board& b) {
  const int nx = b.count(Mark::x);
  const int no = b.count(Mark::o);
  if (nx < no || nx - no > 1)
    throw InvalidBoardError("mark counts violate alternation (X=" +
                            std::to_string(nx) + ", O=" + std::to_string(no) +
                            ")");
  const bool xl = has_line(b, Mark::x);
  const bool ol = has_line(b, Mark::o);
  if (xl && ol) throw InvalidBoardError("both players have a line");
  // A line for the player who did not move last is unreachable.
  if (xl && nx == no) throw InvalidBoardError("X line but O moved last");
  if (ol && nx != no) throw InvalidBoardError("O line but X moved last");
  if (xl) return Winner::x;
  if (ol) return Winner::o;
  return b.full() ? Winner::draw : Winner::ongoing;
}

inline std::vector<int> empty_cells(const Board& b) {
  std::vector<int> out;
  for (int i = 0; i < 9; ++i)
    if (b.cells[i] == Mark::empty) out.push_back(i);
  return out;
}

/// Three-row picture used in observations.
inline std::string render_board(const Board& b) {
  std::string out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const int i = 3 * r + c;
      out += b.cells[i] == Mark::empty ? static_cast<char>('0' + i)
                                       : mark_char(b.cells[i]);
      if (c < 2) out += " | ";
    }
    out += '\n';
    if (r < 2) out += "--+---+--\n";
  }
  return out;
}

}  // namespace selfplay::ttt
