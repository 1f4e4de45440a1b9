#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "selfplay/evaluator/heuristic.hpp"
#include "selfplay/evaluator/prompts.hpp"
#include "selfplay/evaluator/reply.hpp"
#include "selfplay/advantage.hpp"
#include "selfplay/reasoning.hpp"

using namespace selfplay;

namespace {

Trajectory trajectory_with(GameId g, const std::vector<std::string>& reasoning) {
  Trajectory tr;
  tr.game = g;
  tr.seed = 1;
  for (std::size_t i = 0; i < reasoning.size(); ++i)
    tr.turns.push_back({static_cast<int>(i), role_from_index(int(i % 2)), "obs", reasoning[i],
                        "a", {"a", "b"}});
  tr.outcome = Outcome::draw();
  return tr;
}

EvolutionDims rer_of(const Trajectory& tr) {
  return heuristic_score_rer(render_trajectory_text(tr), tr.turns.size(), reasoning_lengths(tr));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(RenderTrajectory, SingleTurnWithOutcome) {
  auto tr = trajectory_with(GameId::kuhn_poker, {"think"});
  tr.outcome = Outcome::win_for(Role::p0, 2.0);
  EXPECT_EQ(render_trajectory_text(tr),
            "Turn 0 [Role 0]: think \xE2\x86\x92 action: a\nOutcome: r0=+2, r1=-2");
}

TEST(RenderTrajectory, NewlinesPreservedAndDeterministic) {
  const auto tr = trajectory_with(GameId::tictactoe, {"line 1\nline 2", "x"});
  const auto text = render_trajectory_text(tr);
  EXPECT_NE(text.find("line 1\nline 2 \xE2\x86\x92"), std::string::npos);
  EXPECT_EQ(text, render_trajectory_text(tr));
}

TEST(HeuristicRtc, AbstractExemplarScoresOne) {
  const std::string text =
      "Enumerate cases: Case 1 yields \xE2\x88\x92" "2\xC3\x97" "0.5=\xE2\x88\x92" "1; Case 2 yields "
      "+2\xC3\x97" "0.5=+1. Select the option maximizing expected utility.";
  const auto d = heuristic_score_rtc(text, GameId::kuhn_poker);
  EXPECT_EQ(d.abstraction, 1.0);
  EXPECT_EQ(d.structure, 1.0);
  EXPECT_EQ(d.principle, 1.0);
}

TEST(HeuristicRtc, GameSpecificExemplarScoresZero) {
  const auto d = heuristic_score_rtc(
      "I have the lowest card and the opponent bet, which usually indicates strength. I should "
      "fold.",
      GameId::kuhn_poker);
  EXPECT_EQ(d.abstraction, 0.0);
  EXPECT_EQ(d.structure, 0.0);
  EXPECT_EQ(d.principle, 0.0);
}

TEST(HeuristicRtc, EmptyScoresZero) {
  const auto d = heuristic_score_rtc("", GameId::tictactoe);
  EXPECT_EQ(d.abstraction + d.structure + d.principle, 0.0);
}

TEST(HeuristicRtc, MixedAndHedged) {
  const auto d = heuristic_score_rtc(
      "The King's probability is 1/2, so I need to balance risk and reward.", GameId::kuhn_poker);
  EXPECT_EQ(d.abstraction, 0.5);
  EXPECT_EQ(d.principle, 0.5);
  EXPECT_EQ(d.structure, 0.0);
}

TEST(HeuristicRtc, SingleStructureKindIsHalf) {
  const auto d = heuristic_score_rtc("If they bet then I fold.", GameId::kuhn_poker);
  EXPECT_EQ(d.structure, 0.5);
}

TEST(HeuristicRtc, IgnoresRenderScaffolding) {
  // The action arrow of the rendering must not count as a structural marker.
  const auto tr = trajectory_with(GameId::kuhn_poker, {"I like it.", "Fine."});
  const auto d = heuristic_score_rtc(render_trajectory_text(tr), GameId::kuhn_poker);
  EXPECT_EQ(d.structure, 0.0);
}

TEST(HeuristicRtc, WordStartMatching) {
  HeuristicLexicon lx;
  EXPECT_EQ(heuristic_score_rtc("a showcase of robust play", GameId::pig_dice, lx).abstraction,
            0.0);
  EXPECT_EQ(heuristic_score_rtc("both cases", GameId::pig_dice, lx).abstraction, 1.0);
}

TEST(HeuristicRtc, TemplateRegistersSeparate) {
  for (GameId g : kAllGames) {
    auto s = reset(g, 3);
    const auto legal = legal_actions(s);
    const auto key = info_state_key(s, Role::p0);
    auto abs = trajectory_with(g, {template_reasoning(key, legal.front(), ReasoningStyle::abstract)});
    auto con = trajectory_with(g, {template_reasoning(key, legal.front(), ReasoningStyle::concrete)});
    const auto da = heuristic_score_rtc(render_trajectory_text(abs), g);
    const auto dc = heuristic_score_rtc(render_trajectory_text(con), g);
    EXPECT_EQ(phi(da), 1.0) << game_name(g);
    EXPECT_LE(phi(dc), 0.35) << game_name(g);
  }
}

TEST(HeuristicRer, TwoTurnsIsNeutral) {
  const auto d = rer_of(trajectory_with(GameId::tictactoe, {"short", "shorter"}));
  EXPECT_EQ(d, (EvolutionDims{0, 0, 0, d.explanation}));
}

TEST(HeuristicRer, EmptyReasoningCollapses) {
  const auto d = rer_of(trajectory_with(GameId::tictactoe, {"something here", "", "more"}));
  EXPECT_EQ(d.deepening, -1.0);
  EXPECT_EQ(d.adaptation, -1.0);
  EXPECT_EQ(d.coherence, -1.0);
}

TEST(HeuristicRer, EmptyRuleBeatsShortTrajectoryRule) {
  const auto d = rer_of(trajectory_with(GameId::tictactoe, {"", "x"}));
  EXPECT_EQ(d.deepening, -1.0);
}

TEST(HeuristicRer, DeepeningAdaptiveCoherentFourTurns) {
  const std::string base =
      "I start by listing the open options and the value each one carries for me right now";
  const std::vector<std::string> turns{
      base + ".",
      base + ", and the opponent just moved so I adjust my plan in response to that threat.",
      base + ". Building on my earlier analysis, the opponent's reply confirms the pattern, so "
             "I adapt and extend the same plan one step deeper.",
      base + ". As established earlier, the opponent keeps answering the same way, so next I "
             "adjust toward the line that exploits it, which follows from every step so far.",
  };
  const auto d = rer_of(trajectory_with(GameId::tictactoe, turns));
  EXPECT_EQ(d.deepening, 1.0);
  EXPECT_EQ(d.adaptation, 1.0);
  EXPECT_EQ(d.coherence, 1.0);
}

TEST(HeuristicRer, ShortReasoningCapsAtZero) {
  const auto d = rer_of(trajectory_with(
      GameId::tictactoe, {"go", "opponent moved, building on earlier", "opponent again, as established earlier I adapt"}));
  EXPECT_LE(d.deepening, 0.0);
  EXPECT_LE(d.adaptation, 0.0);
  EXPECT_LE(d.coherence, 0.0);
}

TEST(HeuristicRer, Deterministic) {
  const auto tr = trajectory_with(GameId::pig_dice, {"a b c", "d e f g", "h i j k l"});
  EXPECT_EQ(rer_of(tr), rer_of(tr));
}

TEST(Lexicon, JsonRoundTripAndOverride) {
  HeuristicLexicon lx;
  const auto back = lexicon_from_json(to_json(lx));
  EXPECT_EQ(back.abstract_terms, lx.abstract_terms);
  EXPECT_EQ(back.game_terms, lx.game_terms);
  const auto custom = lexicon_from_json({{"abstract_terms", {"variable"}}});
  EXPECT_EQ(heuristic_score_rtc("one variable", GameId::tictactoe, custom).abstraction, 1.0);
  EXPECT_EQ(custom.contradictions, lx.contradictions);
}

TEST(Snap, NearestWithTiesTowardZero) {
  EXPECT_EQ(snap(0.8, kPhiLevels), 1.0);
  EXPECT_EQ(snap(0.3, kPhiLevels), 0.5);
  EXPECT_EQ(snap(0.25, kPhiLevels), 0.0);
  EXPECT_EQ(snap(0.75, kPhiLevels), 0.5);
  EXPECT_EQ(snap(-0.5, kPsiLevels), 0.0);
  EXPECT_EQ(snap(0.5, kPsiLevels), 0.0);
  EXPECT_EQ(snap(0.8, kPsiLevels), 1.0);
  EXPECT_EQ(snap(7.0, kPsiLevels), 1.0);
  EXPECT_EQ(snap(-3.0, kPhiLevels), 0.0);
}

TEST(ParseReply, DirectRead) {
  const auto d = parse_rtc_reply(R"({"abstraction_level":1,"structural_clarity":0.5,"principle_based":0})");
  EXPECT_EQ(d.abstraction, 1.0);
  EXPECT_EQ(d.structure, 0.5);
  EXPECT_EQ(d.principle, 0.0);
  EXPECT_TRUE(d.explanation.empty());
}

TEST(ParseReply, SnapsEvolution) {
  const auto d = parse_rer_reply(
      R"(Here you go: {"reasoning_deepening":0.8,"strategy_adaptation":-0.6,"logical_coherence":0.1,"explanation":"ok {fine}"} trailing)");
  EXPECT_EQ(d.deepening, 1.0);
  EXPECT_EQ(d.adaptation, -1.0);
  EXPECT_EQ(d.coherence, 0.0);
  EXPECT_EQ(d.explanation, "ok {fine}");
}

TEST(ParseReply, SkipsMalformedBraceSpans) {
  const auto d = parse_rtc_reply(
      "{not json} then ```json\n{\"abstraction_level\":0.5,\"structural_clarity\":1,"
      "\"principle_based\":0.5,\"key_transferable_patterns\":[\"ev\"]}\n```");
  EXPECT_EQ(d.abstraction, 0.5);
  EXPECT_EQ(d.patterns, std::vector<std::string>{"ev"});
}

TEST(ParseReply, DistinctErrors) {
  auto kind_of = [](const std::string& raw, Rubric r) {
    try {
      parse_reply(raw, r);
    } catch (const ReplyParseError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error for " << raw;
    return ReplyParseError::Kind::no_json_object;
  };
  EXPECT_EQ(kind_of("no braces at all", Rubric::rtc), ReplyParseError::Kind::no_json_object);
  EXPECT_EQ(kind_of(R"({"abstraction_level":1,"structural_clarity":1})", Rubric::rtc),
            ReplyParseError::Kind::missing_field);
  EXPECT_EQ(kind_of(R"({"reasoning_deepening":"high","strategy_adaptation":0,"logical_coherence":0})",
                    Rubric::rer),
            ReplyParseError::Kind::non_numeric_field);
}

TEST(ParseReply, SnappingIsIdempotent) {
  RandomStream rng(17);
  for (int i = 0; i < 500; ++i) {
    auto v = [&] { return rng.uniform01() * 4 - 2; };
    nlohmann::json rtc{{"abstraction_level", v()}, {"structural_clarity", v()}, {"principle_based", v()}};
    nlohmann::json rer{{"reasoning_deepening", v()}, {"strategy_adaptation", v()}, {"logical_coherence", v()}};
    const auto t1 = parse_rtc_reply(rtc.dump());
    EXPECT_EQ(parse_rtc_reply(serialize_reply(t1)), t1);
    EXPECT_TRUE(t1.valid());
    const auto e1 = parse_rer_reply(rer.dump());
    EXPECT_EQ(parse_rer_reply(serialize_reply(e1)), e1);
    EXPECT_TRUE(e1.valid());
  }
}

TEST(Prompts, EmbeddedTemplatesMatchAssets) {
  EXPECT_EQ(prompt_template(Rubric::rtc), read_file(SELFPLAY_PROMPT_DIR "/rtc.v1.txt"));
  EXPECT_EQ(prompt_template(Rubric::rer), read_file(SELFPLAY_PROMPT_DIR "/rer.v1.txt"));
}

TEST(Prompts, AssemblySubstitutesSlots) {
  const auto p = assemble_prompt(Rubric::rtc, "Kuhn Poker", "Turn 0 [Role 0]: {game_name}");
  EXPECT_NE(p.find("Game: Kuhn Poker\n\nTurn 0 [Role 0]: {game_name}\n"), std::string::npos);
  EXPECT_NE(p.find("Dimension 1: Abstraction Level."), std::string::npos);
  EXPECT_NE(p.find("\"key_transferable_patterns\""), std::string::npos);
  EXPECT_EQ(p.find("{trajectory_text}"), std::string::npos);
  const auto q = assemble_prompt(Rubric::rer, "Pig Dice", "T");
  EXPECT_NE(q.find("Trajectory with 1 to 2 turns: default score 0"), std::string::npos);
  EXPECT_NE(q.find("Game: Pig Dice\n\nT\n"), std::string::npos);
}
