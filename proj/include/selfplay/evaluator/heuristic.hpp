#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "selfplay/evaluator/types.hpp"

namespace selfplay {

/// Phrase lists driving the heuristic scorer. Matching is case-insensitive
/// and anchored at word starts, so "case" also hits "cases" but not "showcase".
struct HeuristicLexicon {
  std::vector<std::string> abstract_terms{"expected value", "probability", "enumerate", "case",
                                          "distribution", "utility"};
  std::map<GameId, std::vector<std::string>> game_terms{
      {GameId::kuhn_poker, {"king", "queen", "jack"}},
      {GameId::tictactoe, {"center", "corner"}},
      {GameId::negotiation, {"wood", "gold"}},
      {GameId::pig_dice, {"bank", "bust"}},
  };
  std::vector<std::string> explicit_principles{"bayes",
                                               "maximize expected",
                                               "maximizes expected",
                                               "maximizing expected",
                                               "theorem",
                                               "in general"};
  std::vector<std::string> hedged_principles{"balance", "risk", "trade-off", "tradeoff"};
  std::vector<std::string> adaptation{"opponent", "in response", "adjust", "adapt",
                                      "update my", "change my plan", "counter"};
  std::vector<std::string> back_references{"earlier", "previously", "as established",
                                            "building on", "so next", "as before",
                                            "confirms"};
  std::vector<std::string> contradictions{"should have", "contrary to", "contradict",
                                          "mistake"};
  std::size_t short_reasoning_tokens = 20;
};

inline nlohmann::json to_json(const HeuristicLexicon& lx) {
  nlohmann::json games = nlohmann::json::object();
  for (const auto& [g, terms] : lx.game_terms) games[std::string(game_name(g))] = terms;
  return {{"abstract_terms", lx.abstract_terms},
          {"game_terms", games},
          {"explicit_principles", lx.explicit_principles},
          {"hedged_principles", lx.hedged_principles},
          {"adaptation", lx.adaptation},
          {"back_references", lx.back_references},
          {"contradictions", lx.contradictions},
          {"short_reasoning_tokens", lx.short_reasoning_tokens}};
}

/// Missing keys keep their defaults.
inline HeuristicLexicon lexicon_from_json(const nlohmann::json& j) {
  HeuristicLexicon lx;
  auto read = [&](const char* key, std::vector<std::string>& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::vector<std::string>>();
  };
  read("abstract_terms", lx.abstract_terms);
  read("explicit_principles", lx.explicit_principles);
  read("hedged_principles", lx.hedged_principles);
  read("adaptation", lx.adaptation);
  read("back_references", lx.back_references);
  read("contradictions", lx.contradictions);
  if (j.contains("game_terms"))
    for (const auto& [name, terms] : j.at("game_terms").items())
      lx.game_terms[parse_game_id(name)] = terms.get<std::vector<std::string>>();
  if (j.contains("short_reasoning_tokens"))
    lx.short_reasoning_tokens = j.at("short_reasoning_tokens").get<std::size_t>();
  return lx;
}

namespace detail {

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool word_char(char c) noexcept {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

/// Occurrences of `phrase` in lowercase `text` that start a word.
inline std::size_t count_word_starts(std::string_view text, std::string_view phrase) {
  if (phrase.empty()) return 0;
  std::size_t n = 0;
  for (auto pos = text.find(phrase); pos != std::string_view::npos;
       pos = text.find(phrase, pos + 1)) {
    if (pos == 0 || !word_char(text[pos - 1])) ++n;
  }
  return n;
}

inline std::size_t count_any(std::string_view text, const std::vector<std::string>& phrases) {
  std::size_t n = 0;
  for (const auto& p : phrases) n += count_word_starts(text, lowercase(p));
  return n;
}

inline bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

// "case 2", "step 1", or a line opening with "1." / "2)" / "(3)".
inline bool has_numbered_cases(std::string_view t) {
  for (std::string_view word : {std::string_view("case"), std::string_view("step"),
                                std::string_view("option")}) {
    for (auto pos = t.find(word); pos != std::string_view::npos; pos = t.find(word, pos + 1)) {
      if (pos > 0 && word_char(t[pos - 1])) continue;
      std::size_t i = pos + word.size();
      while (i < t.size() && t[i] == ' ') ++i;
      if (i < t.size() && is_digit(t[i])) return true;
    }
  }
  std::size_t line_start = 0;
  while (line_start <= t.size()) {
    std::size_t i = line_start;
    while (i < t.size() && t[i] == ' ') ++i;
    if (i < t.size() && t[i] == '(') ++i;
    const std::size_t digits = i;
    while (i < t.size() && is_digit(t[i])) ++i;
    if (i > digits && i < t.size() && (t[i] == '.' || t[i] == ')')) return true;
    const auto nl = t.find('\n', line_start);
    if (nl == std::string_view::npos) break;
    line_start = nl + 1;
  }
  return false;
}

inline bool has_if_then(std::string_view t) {
  return count_word_starts(t, "if ") > 0 && count_word_starts(t, "then") > 0;
}

inline bool has_arrow(std::string_view t) {
  return t.find("\xE2\x86\x92") != std::string_view::npos ||  // →
         t.find("\xE2\x87\x92") != std::string_view::npos ||  // ⇒
         t.find("->") != std::string_view::npos || t.find("=>") != std::string_view::npos;
}

// An '=' with a numeric operand on either side: "0.5=-1", "x = 2".
inline bool has_calculation(std::string_view t) {
  for (std::size_t pos = t.find('='); pos != std::string_view::npos; pos = t.find('=', pos + 1)) {
    std::size_t r = pos + 1;
    while (r < t.size() && t[r] == ' ') ++r;
    const bool right = r < t.size() &&
                       (is_digit(t[r]) || t[r] == '-' || t[r] == '+' ||
                        t.substr(r, 3) == "\xE2\x88\x92");  // U+2212 minus
    std::size_t l = pos;
    while (l > 0 && t[l - 1] == ' ') --l;
    const bool left = l > 0 && (is_digit(t[l - 1]) || t[l - 1] == ')');
    if (right && (left || t[r] != '>')) return true;
  }
  return false;
}

/// Splits rendered trajectory text into per-turn reasoning, dropping the
/// "Turn t [Role p]:" prefixes, the trailing action arrow and footer lines.
/// Text without turn headers is treated as a single turn.
inline std::vector<std::string> reasoning_blocks(std::string_view text) {
  constexpr std::string_view arrow = " \xE2\x86\x92 action: ";
  std::vector<std::string> blocks;
  bool saw_header = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line =
        text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    bool header = false;
    if (line.starts_with("Turn ")) {
      const auto close = line.find("]: ");
      if (close != std::string_view::npos && line.substr(0, close).find(" [Role ") !=
                                                 std::string_view::npos) {
        header = true;
        saw_header = true;
        blocks.emplace_back();
        line = line.substr(close + 3);
      }
    }
    const bool footer = saw_header && (line.starts_with("Outcome: ") ||
                                       line.starts_with("Forfeit: ") ||
                                       line == "Turn cap reached.");
    if (!footer) {
      if (const auto a = line.rfind(arrow); a != std::string_view::npos) line = line.substr(0, a);
      if (blocks.empty()) blocks.emplace_back();
      auto& b = blocks.back();
      if (!header && !b.empty()) b += '\n';
      b += line;
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return blocks;
}

inline std::size_t whitespace_tokens(std::string_view s) {
  std::size_t n = 0;
  bool in = false;
  for (char c : s) {
    const bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!ws && !in) ++n;
    in = !ws;
  }
  return n;
}

inline double sign(double v) noexcept { return v > 0 ? 1.0 : v < 0 ? -1.0 : 0.0; }

}  // namespace detail

inline TransferabilityDims heuristic_score_rtc(std::string_view trajectory_text, GameId game,
                                               const HeuristicLexicon& lx = {}) {
  std::string body;
  for (const auto& b : detail::reasoning_blocks(trajectory_text)) {
    body += b;
    body += '\n';
  }
  const std::string t = detail::lowercase(body);
  TransferabilityDims d;

  const auto abstract_hits = detail::count_any(t, lx.abstract_terms);
  std::size_t game_hits = 0;
  if (const auto it = lx.game_terms.find(game); it != lx.game_terms.end())
    game_hits = detail::count_any(t, it->second);
  d.abstraction = abstract_hits > 0 && game_hits == 0 ? 1.0 : abstract_hits > 0 ? 0.5 : 0.0;

  const int kinds = int(detail::has_numbered_cases(t)) + int(detail::has_if_then(t)) +
                    int(detail::has_arrow(t)) + int(detail::has_calculation(t));
  d.structure = kinds >= 2 ? 1.0 : kinds == 1 ? 0.5 : 0.0;

  d.principle = detail::count_any(t, lx.explicit_principles) > 0  ? 1.0
                : detail::count_any(t, lx.hedged_principles) > 0 ? 0.5
                                                                 : 0.0;
  d.explanation = "heuristic: abstract hits " + std::to_string(abstract_hits) +
                  ", game hits " + std::to_string(game_hits) + ", structure kinds " +
                  std::to_string(kinds);
  return d;
}

/// `reasoning_lengths` holds whitespace-token counts per turn; per-turn text
/// for phrase detection comes from `trajectory_text`.
inline EvolutionDims heuristic_score_rer(std::string_view trajectory_text, std::size_t turn_count,
                                         const std::vector<std::size_t>& reasoning_lengths,
                                         const HeuristicLexicon& lx = {}) {
  EvolutionDims d;
  if (std::any_of(reasoning_lengths.begin(), reasoning_lengths.end(),
                  [](std::size_t n) { return n == 0; })) {
    d.deepening = d.adaptation = d.coherence = -1.0;
    d.explanation = "empty reasoning";
    return d;
  }
  if (turn_count <= 2) {
    d.explanation = "too few turns";
    return d;
  }

  const auto& len = reasoning_lengths;
  if (len.size() >= 2) {
    int trend = 0;
    for (std::size_t i = 0; i + 1 < len.size(); ++i)
      trend += len[i + 1] > len[i] ? 1 : len[i + 1] < len[i] ? -1 : 0;
    if (trend > 0 && len.back() > len.front()) d.deepening = 1.0;
    else if (trend < 0 && len.back() < len.front()) d.deepening = -1.0;
  }

  const auto blocks = detail::reasoning_blocks(trajectory_text);
  std::size_t adapt = 0, back = 0, contra = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto t = detail::lowercase(blocks[i]);
    contra += detail::count_any(t, lx.contradictions);
    if (i == 0) continue;
    adapt += detail::count_any(t, lx.adaptation);
    back += detail::count_any(t, lx.back_references);
  }
  d.adaptation = adapt > 0 ? 1.0 : 0.0;
  d.coherence = detail::sign(static_cast<double>(back) - static_cast<double>(contra));

  std::size_t total = 0;
  for (auto n : len) total += n;
  if (!len.empty() && total < lx.short_reasoning_tokens * len.size()) {
    d.deepening = std::min(d.deepening, 0.0);
    d.adaptation = std::min(d.adaptation, 0.0);
    d.coherence = std::min(d.coherence, 0.0);
    d.explanation = "short reasoning";
  } else {
    d.explanation = "heuristic: adapt " + std::to_string(adapt) + ", back-refs " +
                    std::to_string(back) + ", contradictions " + std::to_string(contra);
  }
  return d;
}

inline std::vector<std::size_t> reasoning_lengths(const Trajectory& tr) {
  std::vector<std::size_t> out;
  out.reserve(tr.turns.size());
  for (const auto& t : tr.turns) out.push_back(detail::whitespace_tokens(t.reasoning));
  return out;
}

class HeuristicEvaluator : public Evaluator {
 public:
  explicit HeuristicEvaluator(HeuristicLexicon lexicon = {}) : lexicon_(std::move(lexicon)) {}

  std::string id() const override { return "heuristic-v1"; }

  EvaluatorVerdict evaluate(const Trajectory& tr) override {
    const auto text = render_trajectory_text(tr);
    return EvaluatorVerdict::scored(
        trajectory_hash(tr), id(), heuristic_score_rtc(text, tr.game, lexicon_),
        heuristic_score_rer(text, tr.turns.size(), reasoning_lengths(tr), lexicon_));
  }

  const HeuristicLexicon& lexicon() const noexcept { return lexicon_; }

 private:
  HeuristicLexicon lexicon_;
};

}  // namespace selfplay
