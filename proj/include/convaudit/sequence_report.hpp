#pragma once

// The three-corpus sequence comparison: sequences shared among mismatched
// models (region 2), between mismatched and correct models (3), between
// mismatched and test-suite models (4), and those only mismatched models
// share (2 - 3), each raw and reduced.

#include <string>
#include <vector>

#include <json.hpp>

#include "convaudit/hypothesis.hpp"
#include "convaudit/model_ir.hpp"
#include "convaudit/report.hpp"
#include "convaudit/seq_analysis.hpp"

namespace convaudit {

struct SequenceConfig {
  std::size_t min_len = kDefaultMinSeqLen;
  PathBudget budget;
  H2Thresholds h2;

  void validate() const {
    if (min_len == 0) throw AuditError(ErrorKind::InvalidConfig, "min_seq_len", "must be positive");
    if (budget.max_paths_per_model == 0) throw AuditError(ErrorKind::InvalidConfig, "max_paths", "must be positive");
    h2.validate();
  }
};

struct RegionCounts {
  SeqSet raw;
  SeqSet reduced;
};

struct SequenceReport {
  RegionCounts shared_mismatched;      // 2
  RegionCounts shared_correct;         // 3
  RegionCounts shared_test_suite;      // 4
  RegionCounts only_mismatched;        // 2 - 3
  std::vector<std::string> excluded_mismatched, excluded_correct, excluded_test_suite;
  HypothesisVerdict h2;
};

inline SequenceReport sequence_report(const Corpus& mismatched, const Corpus& correct, const Corpus& test_suite,
                                      const SequenceConfig& cfg = {}) {
  cfg.validate();
  auto mm = mine_paths(mismatched, cfg.budget);
  auto mc = mine_paths(correct, cfg.budget);
  auto mt = mine_paths(test_suite, cfg.budget);

  auto regioned = [&](SeqSet raw) { return RegionCounts{raw, reduce_sequences(raw, cfg.min_len)}; };

  SequenceReport r{
      regioned(shared_within(mm, cfg.min_len)),
      regioned(shared_between(mm, mc, cfg.min_len)),
      regioned(shared_between(mm, mt, cfg.min_len)),
      {},
      mm.excluded,
      mc.excluded,
      mt.excluded,
      {},
  };
  r.only_mismatched = regioned(seq_difference(r.shared_mismatched.raw, r.shared_correct.raw));
  r.h2 = evaluate_h2(r.only_mismatched.reduced, mm, cfg.h2);
  return r;
}

inline std::string render_text(const SequenceReport& r) {
  TextTable t({"Set", "Unique sequences", "Reduced sequences"});
  auto row = [&](const char* label, const RegionCounts& c) {
    t.add_row({label, std::to_string(c.raw.size()), std::to_string(c.reduced.size())});
  };
  row("(2) shared by mismatched", r.shared_mismatched);
  row("(3) mismatched & correct", r.shared_correct);
  row("(4) mismatched & test suite", r.shared_test_suite);
  t.add_rule();
  row("(2) - (3)", r.only_mismatched);
  std::string out = t.render();

  auto excluded = [&](const char* label, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    out += std::string("excluded (path budget) ") + label + ":";
    for (const auto& id : ids) out += " " + id;
    out += "\n";
  };
  excluded("mismatched", r.excluded_mismatched);
  excluded("correct", r.excluded_correct);
  excluded("test suite", r.excluded_test_suite);

  out += "\nsupport histogram (models -> sequences):";
  for (const auto& [k, v] : r.h2.evidence["support_histogram"].items()) out += " " + k + ":" + v.dump();
  out += "\n";
  return out;
}

inline nlohmann::ordered_json to_json(const SequenceReport& r, bool include_sequences = true) {
  auto region = [&](const RegionCounts& c) {
    nlohmann::ordered_json j;
    j["unique"] = c.raw.size();
    j["reduced"] = c.reduced.size();
    if (include_sequences) {
      j["sequences"] = to_json(c.raw);
      j["reduced_sequences"] = to_json(c.reduced);
    }
    return j;
  };
  nlohmann::ordered_json j;
  j["shared_mismatched"] = region(r.shared_mismatched);
  j["shared_correct"] = region(r.shared_correct);
  j["shared_test_suite"] = region(r.shared_test_suite);
  j["only_mismatched"] = region(r.only_mismatched);
  j["excluded"] = {{"mismatched", r.excluded_mismatched},
                   {"correct", r.excluded_correct},
                   {"test_suite", r.excluded_test_suite}};
  return j;
}

}  // namespace convaudit
