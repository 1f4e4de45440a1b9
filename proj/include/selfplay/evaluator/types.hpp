#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "selfplay/trajectory.hpp"

namespace selfplay {

/// Transferability rubric: each dimension in {0, 0.5, 1}.
struct TransferabilityDims {
  double abstraction = 0.0;
  double structure = 0.0;
  double principle = 0.0;
  std::string explanation;
  std::vector<std::string> patterns;

  bool valid() const noexcept {
    auto ok = [](double v) { return v == 0.0 || v == 0.5 || v == 1.0; };
    return ok(abstraction) && ok(structure) && ok(principle);
  }
  friend bool operator==(const TransferabilityDims&, const TransferabilityDims&) = default;
};

/// Evolution rubric: each dimension in {-1, 0, +1}.
struct EvolutionDims {
  double deepening = 0.0;
  double adaptation = 0.0;
  double coherence = 0.0;
  std::string explanation;

  bool valid() const noexcept {
    auto ok = [](double v) { return v == -1.0 || v == 0.0 || v == 1.0; };
    return ok(deepening) && ok(adaptation) && ok(coherence);
  }
  friend bool operator==(const EvolutionDims&, const EvolutionDims&) = default;
};

enum class VerdictStatus { scored, skipped, failed };

inline std::string_view status_name(VerdictStatus s) noexcept {
  switch (s) {
    case VerdictStatus::scored: return "scored";
    case VerdictStatus::skipped: return "skipped";
    case VerdictStatus::failed: return "failed";
  }
  return "failed";
}

/// scored => both rubrics present; skipped / failed => neither.
struct EvaluatorVerdict {
  std::string trajectory_id;
  std::optional<TransferabilityDims> transferability;
  std::optional<EvolutionDims> evolution;
  std::string evaluator_id;
  VerdictStatus status = VerdictStatus::skipped;
  std::string error;

  static EvaluatorVerdict scored(std::string id, std::string evaluator, TransferabilityDims t,
                                 EvolutionDims e) {
    return {std::move(id), std::move(t), std::move(e), std::move(evaluator),
            VerdictStatus::scored, {}};
  }
  static EvaluatorVerdict skipped(std::string id, std::string evaluator) {
    return {std::move(id), std::nullopt, std::nullopt, std::move(evaluator),
            VerdictStatus::skipped, {}};
  }
  static EvaluatorVerdict failed(std::string id, std::string evaluator, std::string error) {
    return {std::move(id), std::nullopt, std::nullopt, std::move(evaluator),
            VerdictStatus::failed, std::move(error)};
  }
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual std::string id() const = 0;
  virtual EvaluatorVerdict evaluate(const Trajectory& tr) = 0;

  /// Scores several trajectories; implementations may run them concurrently.
  /// Output order matches input order.
  virtual std::vector<EvaluatorVerdict> evaluate_batch(
      const std::vector<const Trajectory*>& batch) {
    std::vector<EvaluatorVerdict> out;
    out.reserve(batch.size());
    for (const auto* tr : batch) out.push_back(evaluate(*tr));
    return out;
  }
};

namespace detail {

inline std::string format_reward(double r) {
  std::ostringstream os;
  if (r > 0) os << '+';
  os << r;
  return os.str();
}

}  // namespace detail

/// "Turn t [Role p]: <reasoning> → action: <token>" per turn, then the
/// outcome line. Reasoning newlines are kept verbatim.
inline std::string render_trajectory_text(const Trajectory& tr) {
  std::string out;
  for (const auto& t : tr.turns) {
    out += "Turn " + std::to_string(t.t) + " [Role " + std::to_string(index(t.role)) + "]: ";
    out += t.reasoning;
    out += " \xE2\x86\x92 action: ";
    out += t.action;
    out += '\n';
  }
  if (tr.forfeit)
    out += "Forfeit: Role " + std::to_string(index(tr.forfeit->role)) + " (" +
           tr.forfeit->reason + ")\n";
  if (tr.truncated) out += "Turn cap reached.\n";
  out += "Outcome: r0=" + detail::format_reward(tr.outcome.r0) +
         ", r1=" + detail::format_reward(tr.outcome.r1);
  return out;
}

}  // namespace selfplay
