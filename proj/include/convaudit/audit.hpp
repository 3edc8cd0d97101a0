#pragma once

// The audit workflows behind each CLI subcommand. Every command returns its
// payload as a string (byte-identical for identical inputs) plus a separate
// diagnostic log and exit code, so the CLI stays a thin shell.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

#include <json.hpp>

#include "convaudit/corpus_io.hpp"
#include "convaudit/diff_engine.hpp"
#include "convaudit/error.hpp"
#include "convaudit/op_analysis.hpp"
#include "convaudit/seq_analysis.hpp"
#include "convaudit/sequence_report.hpp"
#include "convaudit/taxonomy.hpp"

namespace convaudit {

enum class OutputFormat { Text, Json };

struct AuditConfig {
  double threshold = 1e-7;
  bool nan_positions_equal = true;
  std::size_t min_seq_len = kDefaultMinSeqLen;
  std::size_t max_paths_per_model = 10000;
  double h1_overlap_fraction = 0.9;
  std::size_t h2_reject_min_support = 2;
  double h2_support_fraction = 0.5;
  OutputFormat output_format = OutputFormat::Text;

  TolerancePolicy tolerance() const { return {threshold, nan_positions_equal}; }
  H1Thresholds h1() const { return {h1_overlap_fraction}; }
  SequenceConfig sequences() const {
    return {min_seq_len, PathBudget{max_paths_per_model}, H2Thresholds{h2_reject_min_support, h2_support_fraction}};
  }

  void validate() const {
    tolerance().validate();
    h1().validate();
    sequences().validate();
  }
};

// Exit codes: findings never fail a run unless asked to.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitError = 2;

struct CommandResult {
  int exit_code = kExitOk;
  std::string payload;
  std::string log;
};

namespace detail {

inline std::string dump_json(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

inline CommandResult failure(const std::string& message) { return {kExitError, {}, "error: " + message + "\n"}; }

inline std::string format_diff(const std::optional<double>& d) {
  if (!d) return "-";
  std::ostringstream out;
  out.precision(6);
  out << std::scientific << *d;
  return out.str();
}

}  // namespace detail

struct ClassifyOptions {
  bool fail_on_mismatch = false;
  std::optional<std::filesystem::path> verdicts_path;  // JSON Lines, one verdict per record
};

inline CommandResult cmd_classify(const std::filesystem::path& manifest, const AuditConfig& cfg,
                                  const ClassifyOptions& opts = {}) {
  try {
    cfg.validate();
    if (!std::filesystem::is_regular_file(manifest)) {
      throw AuditError(ErrorKind::MalformedInput, manifest.string(), "manifest not found");
    }
    auto records = parse_manifest(read_file_bytes(manifest));
    std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
      return std::tie(a.model_id, a.converter, a.corpus_kind) < std::tie(b.model_id, b.converter, b.corpus_kind);
    });

    const auto base = manifest.parent_path();
    std::vector<LabeledVerdict> verdicts;
    std::string jsonl;
    auto per_model = nlohmann::ordered_json::array();
    bool mismatch = false;
    for (const auto& r : records) {
      auto v = classify_record(r, cfg.tolerance(), base);
      mismatch |= v.category == Category::BehaviouralDifference;
      auto jv = verdict_to_json(r, v);
      jsonl += jv.dump() + "\n";
      per_model.push_back(std::move(jv));
      verdicts.push_back({v, r.converter, r.corpus_kind});
    }
    auto table = summarize(verdicts);

    if (opts.verdicts_path) {
      std::ofstream out(*opts.verdicts_path, std::ios::binary);
      out << jsonl;
      if (!out) throw AuditError(ErrorKind::MalformedInput, opts.verdicts_path->string(), "cannot write");
    }

    CommandResult res;
    if (cfg.output_format == OutputFormat::Json) {
      nlohmann::ordered_json j;
      j["threshold"] = cfg.threshold;
      j["summary"] = to_json(table);
      j["verdicts"] = std::move(per_model);
      res.payload = detail::dump_json(j);
    } else {
      res.payload = render_text(table) + "\n";
      TextTable t({"model_id", "converter", "category", "max_abs_diff", "reason"});
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& v = verdicts[i].verdict;
        t.add_row({records[i].model_id, records[i].converter, std::string(to_string(v.category)),
                   detail::format_diff(v.max_abs_diff), v.reason.value_or("")});
      }
      res.payload += t.render();
    }
    res.log = "classified " + std::to_string(records.size()) + " record(s)\n";
    if (opts.fail_on_mismatch && mismatch) res.exit_code = kExitFindings;
    return res;
  } catch (const AuditError& e) {
    return detail::failure(e.what());
  }
}

struct CorpusDirs {
  std::filesystem::path mismatched;
  std::filesystem::path correct;
  std::filesystem::path test_suite;
};

namespace detail {

struct LoadedCorpora {
  Corpus mismatched{CorpusRole::Mismatched};
  Corpus correct{CorpusRole::Correct};
  Corpus test_suite{CorpusRole::TestSuite};
  std::vector<LoadFailure> failures;
};

inline LoadedCorpora load_corpora(const CorpusDirs& dirs) {
  LoadedCorpora out;
  auto take = [&](const std::filesystem::path& dir, CorpusRole role, Corpus& into) {
    auto loaded = load_corpus_dir(dir, role);
    into = std::move(loaded.corpus);
    out.failures.insert(out.failures.end(), loaded.failures.begin(), loaded.failures.end());
  };
  take(dirs.mismatched, CorpusRole::Mismatched, out.mismatched);
  take(dirs.correct, CorpusRole::Correct, out.correct);
  take(dirs.test_suite, CorpusRole::TestSuite, out.test_suite);
  return out;
}

inline void report_failures(CommandResult& res, const std::vector<LoadFailure>& failures, bool lenient) {
  for (const auto& f : failures) res.log += "skipped " + f.path + ": " + f.message + "\n";
  if (!failures.empty() && !lenient) res.exit_code = kExitError;
}

inline nlohmann::ordered_json skipped_json(const std::vector<LoadFailure>& failures) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& f : failures) arr.push_back(f.path);
  return arr;
}

inline std::string render_verdict(const HypothesisVerdict& v) {
  return std::string(to_string(v.hypothesis)) + ": " + std::string(to_string(v.outcome)) + " (" + v.summary + ")\n";
}

}  // namespace detail

inline CommandResult cmd_ops(const CorpusDirs& dirs, const AuditConfig& cfg, bool lenient = false) {
  try {
    cfg.validate();
    auto corpora = detail::load_corpora(dirs);
    auto report = op_set_report(corpora.mismatched, corpora.correct, corpora.test_suite);
    auto h1 = evaluate_h1(report, cfg.h1());

    CommandResult res;
    if (cfg.output_format == OutputFormat::Json) {
      nlohmann::ordered_json j;
      j["models"] = {{"mismatched", corpora.mismatched.size()},
                     {"correct", corpora.correct.size()},
                     {"test_suite", corpora.test_suite.size()}};
      j["operators"] = to_json(report);
      j["h1"] = to_json(h1);
      j["skipped"] = detail::skipped_json(corpora.failures);
      res.payload = detail::dump_json(j);
    } else {
      res.payload = render_text(report) + "\n" + detail::render_verdict(h1);
    }
    detail::report_failures(res, corpora.failures, lenient);
    return res;
  } catch (const AuditError& e) {
    return detail::failure(e.what());
  }
}

inline CommandResult cmd_seqs(const CorpusDirs& dirs, const AuditConfig& cfg, bool lenient = false) {
  try {
    cfg.validate();
    auto corpora = detail::load_corpora(dirs);
    auto report = sequence_report(corpora.mismatched, corpora.correct, corpora.test_suite, cfg.sequences());

    CommandResult res;
    if (cfg.output_format == OutputFormat::Json) {
      nlohmann::ordered_json j;
      j["min_seq_len"] = cfg.min_seq_len;
      j["sequences"] = to_json(report);
      j["h2"] = to_json(report.h2);
      j["skipped"] = detail::skipped_json(corpora.failures);
      res.payload = detail::dump_json(j);
    } else {
      res.payload = render_text(report) + "\n" + detail::render_verdict(report.h2);
    }
    detail::report_failures(res, corpora.failures, lenient);
    return res;
  } catch (const AuditError& e) {
    return detail::failure(e.what());
  }
}

enum class TaxonomyMode { Symptom, Cause, Location, Joint };

inline CommandResult cmd_taxonomy(const std::filesystem::path& records_csv, TaxonomyMode mode, const AuditConfig& cfg) {
  try {
    auto records = parse_records(read_file_bytes(records_csv));
    DistributionTable table = [&] {
      switch (mode) {
        case TaxonomyMode::Symptom: return marginal(records, Dimension::Symptom);
        case TaxonomyMode::Cause: return marginal(records, Dimension::Cause);
        case TaxonomyMode::Location: return marginal(records, Dimension::Location);
        case TaxonomyMode::Joint: break;
      }
      return joint(records);
    }();
    CommandResult res;
    res.payload = cfg.output_format == OutputFormat::Json ? detail::dump_json(to_json(table)) : render_text(table);
    res.log = "aggregated " + std::to_string(records.size()) + " record(s)\n";
    return res;
  } catch (const AuditError& e) {
    return detail::failure(e.what());
  }
}

}  // namespace convaudit
