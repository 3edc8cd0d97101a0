#pragma once

// Operator-type evidence: per-corpus operator sets, their pairwise
// differences, and the decision rule for the operator-type hypothesis.

#include <algorithm>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "convaudit/error.hpp"
#include "convaudit/hypothesis.hpp"
#include "convaudit/model_ir.hpp"
#include "convaudit/report.hpp"

namespace convaudit {

inline OperatorSet collect_ops(const Corpus& c) {
  OperatorSet ops;
  for (const auto& m : c.models()) ops.merge(operator_set(m));
  return ops;
}

inline OperatorSet set_minus(const OperatorSet& a, const OperatorSet& b) {
  OperatorSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

inline OperatorSet set_intersection(const OperatorSet& a, const OperatorSet& b) {
  OperatorSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

inline OperatorSet set_union(const OperatorSet& a, const OperatorSet& b) {
  OperatorSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

struct OpSetReport {
  OperatorSet set_a;  // mismatched
  OperatorSet set_b;  // correct
  OperatorSet set_c;  // test suite
  OperatorSet a_minus_b, b_minus_a, a_minus_c, c_minus_a;
  // Operator set of every mismatched model, keyed by model id.
  std::map<std::string, OperatorSet> mismatched_models;
};

inline OpSetReport op_set_report(const Corpus& mismatched, const Corpus& correct, const Corpus& test_suite) {
  OpSetReport r;
  r.set_a = collect_ops(mismatched);
  r.set_b = collect_ops(correct);
  r.set_c = collect_ops(test_suite);
  r.a_minus_b = set_minus(r.set_a, r.set_b);
  r.b_minus_a = set_minus(r.set_b, r.set_a);
  r.a_minus_c = set_minus(r.set_a, r.set_c);
  r.c_minus_a = set_minus(r.set_c, r.set_a);
  for (const auto& m : mismatched.models()) r.mismatched_models[m.model_id()] = operator_set(m);
  return r;
}

struct H1Thresholds {
  // Jaccard overlap of mismatched and correct operator sets at or above which
  // the hypothesis is rejected.
  double overlap_fraction = 0.9;

  void validate() const {
    if (!(overlap_fraction > 0 && overlap_fraction <= 1)) {
      throw AuditError(ErrorKind::InvalidConfig, "h1_overlap_fraction", "must lie in (0, 1]");
    }
  }
};

// |a ∩ b| / |a ∪ b|; two empty sets count as identical.
inline double jaccard(const OperatorSet& a, const OperatorSet& b) {
  auto uni = set_union(a, b).size();
  if (uni == 0) return 1.0;
  return static_cast<double>(set_intersection(a, b).size()) / static_cast<double>(uni);
}

inline HypothesisVerdict evaluate_h1(const OpSetReport& r, const H1Thresholds& t = {}) {
  t.validate();
  auto shared = set_intersection(r.set_a, r.set_b).size();
  auto uni = set_union(r.set_a, r.set_b).size();
  double overlap = jaccard(r.set_a, r.set_b);

  // Mismatched models that use at least one operator never seen in a correct model.
  std::size_t covered = 0;
  for (const auto& [id, ops] : r.mismatched_models) {
    if (!set_intersection(ops, r.a_minus_b).empty()) ++covered;
  }

  HypothesisVerdict v{Hypothesis::H1, HypothesisOutcome::Inconclusive, {}, {}};
  if (overlap >= t.overlap_fraction) {
    v.outcome = HypothesisOutcome::Rejected;
    v.summary = "mismatched and correct models share " + std::to_string(shared) + " of " +
                std::to_string(uni) + " operator types";
  } else if (!r.a_minus_b.empty() && covered == r.mismatched_models.size()) {
    v.outcome = HypothesisOutcome::Supported;
    v.summary = "every mismatched model uses an operator absent from correct models";
  } else {
    v.summary = std::to_string(covered) + " of " + std::to_string(r.mismatched_models.size()) +
                " mismatched models use an operator absent from correct models";
  }
  v.evidence["overlap"] = overlap;
  v.evidence["overlap_fraction_threshold"] = t.overlap_fraction;
  v.evidence["shared"] = shared;
  v.evidence["union"] = uni;
  v.evidence["a_minus_b"] = r.a_minus_b;
  v.evidence["mismatched_models_covered"] = covered;
  v.evidence["mismatched_models"] = r.mismatched_models.size();
  return v;
}

inline std::string render_text(const OpSetReport& r) {
  TextTable t({"Model type", "Operators"});
  t.add_row({"Mismatched (a)", std::to_string(r.set_a.size())});
  t.add_row({"Correct (b)", std::to_string(r.set_b.size())});
  t.add_row({"Test Suite (c)", std::to_string(r.set_c.size())});
  t.add_rule();
  t.add_row({"(a) - (b)", std::to_string(r.a_minus_b.size())});
  t.add_row({"(b) - (a)", std::to_string(r.b_minus_a.size())});
  t.add_row({"(a) - (c)", std::to_string(r.a_minus_c.size())});
  t.add_row({"(c) - (a)", std::to_string(r.c_minus_a.size())});

  std::string out = t.render();
  auto list = [&](const char* label, const OperatorSet& s) {
    out += std::string(label) + ":";
    for (const auto& op : s) out += " " + op;
    out += "\n";
  };
  out += "\n";
  list("(a) - (b)", r.a_minus_b);
  list("(b) - (a)", r.b_minus_a);
  list("(a) - (c)", r.a_minus_c);
  list("(c) - (a)", r.c_minus_a);
  return out;
}

inline nlohmann::ordered_json to_json(const OpSetReport& r) {
  nlohmann::ordered_json j;
  j["mismatched"] = r.set_a;
  j["correct"] = r.set_b;
  j["test_suite"] = r.set_c;
  j["a_minus_b"] = r.a_minus_b;
  j["b_minus_a"] = r.b_minus_a;
  j["a_minus_c"] = r.a_minus_c;
  j["c_minus_a"] = r.c_minus_a;
  return j;
}

}  // namespace convaudit
