#pragma once

#include <string>
#include <string_view>

#include "selfplay/evaluator/reply.hpp"
#include "selfplay/prompt_assets.hpp"  // generated from assets/prompts at configure time

namespace selfplay {

inline constexpr std::string_view kPromptVersion = "v1";

inline std::string_view prompt_template(Rubric r) noexcept {
  return r == Rubric::rtc ? prompt_assets::kRtcV1 : prompt_assets::kRerV1;
}

/// Fills the {game_name} and {trajectory_text} slots. Slots are substituted
/// once each, left to right, so braces inside the trajectory are inert.
inline std::string assemble_prompt(Rubric rubric, std::string_view game_name,
                                   std::string_view trajectory_text) {
  const std::string_view tpl = prompt_template(rubric);
  constexpr std::string_view game_slot = "{game_name}";
  constexpr std::string_view text_slot = "{trajectory_text}";
  const auto g = tpl.find(game_slot);
  const auto t = tpl.find(text_slot, g + game_slot.size());
  std::string out;
  out.reserve(tpl.size() + game_name.size() + trajectory_text.size());
  out += tpl.substr(0, g);
  out += game_name;
  out += tpl.substr(g + game_slot.size(), t - g - game_slot.size());
  out += trajectory_text;
  out += tpl.substr(t + text_slot.size());
  return out;
}

}  // namespace selfplay
