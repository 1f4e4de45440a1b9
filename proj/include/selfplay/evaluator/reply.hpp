#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "selfplay/evaluator/types.hpp"

namespace selfplay {

enum class Rubric { rtc, rer };

inline std::string_view rubric_name(Rubric r) noexcept { return r == Rubric::rtc ? "rtc" : "rer"; }

class ReplyParseError : public std::runtime_error {
 public:
  enum class Kind { no_json_object, missing_field, non_numeric_field };

  ReplyParseError(Kind kind, std::string field, const std::string& msg)
      : std::runtime_error(msg), kind_(kind), field_(std::move(field)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

inline constexpr std::array<double, 3> kPhiLevels{0.0, 0.5, 1.0};
inline constexpr std::array<double, 3> kPsiLevels{-1.0, 0.0, 1.0};

/// Nearest allowed level; on a tie the level closer to 0 wins.
inline double snap(double v, std::span<const double> levels) {
  double best = levels.front();
  double best_dist = std::abs(v - best);
  for (double l : levels.subspan(1)) {
    const double dist = std::abs(v - l);
    if (dist < best_dist || (dist == best_dist && std::abs(l) < std::abs(best))) {
      best = l;
      best_dist = dist;
    }
  }
  return best;
}

namespace detail {

/// First balanced {...} span that parses as a JSON object. Braces inside
/// string literals are respected.
inline std::optional<nlohmann::json> first_json_object(std::string_view text) {
  for (auto open = text.find('{'); open != std::string_view::npos;
       open = text.find('{', open + 1)) {
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        auto j = nlohmann::json::parse(text.substr(open, i - open + 1), nullptr, false);
        if (!j.is_discarded() && j.is_object()) return j;
        break;
      }
    }
  }
  return std::nullopt;
}

inline double numeric_field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name))
    throw ReplyParseError(ReplyParseError::Kind::missing_field, name,
                          std::string("reply is missing field '") + name + "'");
  const auto& v = j.at(name);
  if (!v.is_number())
    throw ReplyParseError(ReplyParseError::Kind::non_numeric_field, name,
                          std::string("field '") + name + "' is not numeric");
  const double d = v.get<double>();
  if (!std::isfinite(d))
    throw ReplyParseError(ReplyParseError::Kind::non_numeric_field, name,
                          std::string("field '") + name + "' is not finite");
  return d;
}

inline nlohmann::json reply_object(std::string_view raw) {
  auto j = first_json_object(raw);
  if (!j)
    throw ReplyParseError(ReplyParseError::Kind::no_json_object, "",
                          "reply contains no JSON object");
  return *j;
}

}  // namespace detail

inline TransferabilityDims parse_rtc_reply(std::string_view raw) {
  const auto j = detail::reply_object(raw);
  TransferabilityDims d;
  d.abstraction = snap(detail::numeric_field(j, "abstraction_level"), kPhiLevels);
  d.structure = snap(detail::numeric_field(j, "structural_clarity"), kPhiLevels);
  d.principle = snap(detail::numeric_field(j, "principle_based"), kPhiLevels);
  if (j.contains("explanation") && j["explanation"].is_string())
    d.explanation = j["explanation"].get<std::string>();
  if (j.contains("key_transferable_patterns") && j["key_transferable_patterns"].is_array())
    for (const auto& p : j["key_transferable_patterns"])
      if (p.is_string()) d.patterns.push_back(p.get<std::string>());
  return d;
}

inline EvolutionDims parse_rer_reply(std::string_view raw) {
  const auto j = detail::reply_object(raw);
  EvolutionDims d;
  d.deepening = snap(detail::numeric_field(j, "reasoning_deepening"), kPsiLevels);
  d.adaptation = snap(detail::numeric_field(j, "strategy_adaptation"), kPsiLevels);
  d.coherence = snap(detail::numeric_field(j, "logical_coherence"), kPsiLevels);
  if (j.contains("explanation") && j["explanation"].is_string())
    d.explanation = j["explanation"].get<std::string>();
  return d;
}

using ParsedReply = std::variant<TransferabilityDims, EvolutionDims>;

inline ParsedReply parse_reply(std::string_view raw, Rubric rubric) {
  if (rubric == Rubric::rtc) return parse_rtc_reply(raw);
  return parse_rer_reply(raw);
}

inline std::string serialize_reply(const TransferabilityDims& d) {
  return nlohmann::json{{"abstraction_level", d.abstraction},
                        {"structural_clarity", d.structure},
                        {"principle_based", d.principle},
                        {"explanation", d.explanation},
                        {"key_transferable_patterns", d.patterns}}
      .dump();
}

inline std::string serialize_reply(const EvolutionDims& d) {
  return nlohmann::json{{"reasoning_deepening", d.deepening},
                        {"strategy_adaptation", d.adaptation},
                        {"logical_coherence", d.coherence},
                        {"explanation", d.explanation}}
      .dump();
}

}  // namespace selfplay
