#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace convaudit {

enum class Hypothesis { H1, H2 };
enum class HypothesisOutcome { Rejected, Inconclusive, Supported };

constexpr std::string_view to_string(Hypothesis h) { return h == Hypothesis::H1 ? "H1" : "H2"; }

constexpr std::string_view to_string(HypothesisOutcome o) {
  switch (o) {
    case HypothesisOutcome::Rejected: return "rejected";
    case HypothesisOutcome::Inconclusive: return "inconclusive";
    case HypothesisOutcome::Supported: return "supported";
  }
  return "?";
}

struct HypothesisVerdict {
  Hypothesis hypothesis;
  HypothesisOutcome outcome;
  std::string summary;
  nlohmann::ordered_json evidence;  // supporting counts and sets
};

inline nlohmann::ordered_json to_json(const HypothesisVerdict& v) {
  nlohmann::ordered_json j;
  j["hypothesis"] = to_string(v.hypothesis);
  j["outcome"] = to_string(v.outcome);
  j["summary"] = v.summary;
  j["evidence"] = v.evidence;
  return j;
}

}  // namespace convaudit
