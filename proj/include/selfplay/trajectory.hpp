#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfplay/core.hpp"

namespace selfplay {

inline constexpr int kTrajectorySchemaVersion = 1;

struct TurnRecord {
  int t = 0;
  Role role = Role::p0;
  std::string observation;
  std::string reasoning;
  std::string action;
  std::vector<std::string> legal_actions;

  friend bool operator==(const TurnRecord&, const TurnRecord&) = default;
};

/// Present when an episode ended because a role submitted an illegal or
/// unparseable response; that role loses.
struct Forfeit {
  Role role = Role::p0;
  std::string reason;

  friend bool operator==(const Forfeit&, const Forfeit&) = default;
};

struct Trajectory {
  GameId game = GameId::tictactoe;
  std::uint64_t seed = 0;
  std::vector<TurnRecord> turns;
  Outcome outcome;
  std::optional<Forfeit> forfeit;
  bool truncated = false;
  // Scores blocks in the order they were attached (one per evaluator run).
  std::vector<nlohmann::json> scores;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

class TrajectoryFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json to_json_without_scores(const Trajectory& tr) {
  using nlohmann::json;
  json turns = json::array();
  for (const auto& t : tr.turns) {
    turns.push_back({{"t", t.t},
                     {"role", index(t.role)},
                     {"observation", t.observation},
                     {"reasoning", t.reasoning},
                     {"action", t.action},
                     {"legal_actions", t.legal_actions}});
  }
  json j = {{"schema_version", kTrajectorySchemaVersion},
            {"game", std::string(game_name(tr.game))},
            {"seed", tr.seed},
            {"turns", std::move(turns)},
            {"outcome", {{"r0", tr.outcome.r0}, {"r1", tr.outcome.r1}}}};
  if (tr.forfeit)
    j["forfeit"] = {{"role", index(tr.forfeit->role)}, {"reason", tr.forfeit->reason}};
  if (tr.truncated) j["truncated"] = true;
  return j;
}

inline nlohmann::json to_json(const Trajectory& tr) {
  auto j = to_json_without_scores(tr);
  if (tr.scores.size() == 1) j["scores"] = tr.scores.front();
  else if (tr.scores.size() > 1) j["scores"] = tr.scores;
  return j;
}

inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kTrajectorySchemaVersion)
      throw TrajectoryFormatError("unsupported schema_version");
    Trajectory tr;
    tr.game = parse_game_id(j.at("game").get<std::string>());
    tr.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& t : j.at("turns")) {
      TurnRecord rec;
      rec.t = t.at("t").get<int>();
      const int role = t.at("role").get<int>();
      if (role != 0 && role != 1) throw TrajectoryFormatError("role must be 0 or 1");
      rec.role = role_from_index(role);
      rec.observation = t.value("observation", "");
      rec.reasoning = t.value("reasoning", "");
      rec.action = t.at("action").get<std::string>();
      rec.legal_actions = t.value("legal_actions", std::vector<std::string>{});
      tr.turns.push_back(std::move(rec));
    }
    tr.outcome = {j.at("outcome").at("r0").get<double>(), j.at("outcome").at("r1").get<double>()};
    if (j.contains("forfeit")) {
      tr.forfeit = Forfeit{role_from_index(j["forfeit"].at("role").get<int>()),
                           j["forfeit"].value("reason", "")};
    }
    tr.truncated = j.value("truncated", false);
    if (j.contains("scores") && !j["scores"].is_null()) {
      if (j["scores"].is_array()) {
        for (const auto& s : j["scores"]) tr.scores.push_back(s);
      } else {
        tr.scores.push_back(j["scores"]);
      }
    }
    return tr;
  } catch (const nlohmann::json::exception& e) {
    throw TrajectoryFormatError(e.what());
  } catch (const std::invalid_argument& e) {
    throw TrajectoryFormatError(e.what());
  }
}

inline Trajectory parse_trajectory_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw TrajectoryFormatError(e.what());
  }
  return trajectory_from_json(j);
}

inline std::string to_jsonl_line(const Trajectory& tr) { return to_json(tr).dump(); }

/// FNV-1a over the canonical record without scores; used as the join key
/// between score files and as the evaluator's trajectory id.
inline std::string trajectory_hash(const Trajectory& tr) {
  const std::string canon = to_json_without_scores(tr).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct JsonlReadResult {
  std::vector<Trajectory> records;
  std::vector<std::size_t> line_numbers;  // 1-based, parallel to records
  std::vector<std::string> diagnostics;   // one per skipped line
};

/// Reads trajectories, skipping (and reporting) malformed lines.
inline JsonlReadResult read_trajectories(std::istream& in) {
  JsonlReadResult out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.records.push_back(parse_trajectory_line(line));
      out.line_numbers.push_back(n);
    } catch (const TrajectoryFormatError& e) {
      out.diagnostics.push_back("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace selfplay
