// convaudit: command-line front end for the converter audit workflows.
//
//   convaudit classify --manifest M [--threshold T] [--fail-on-mismatch] [--verdicts F]
//   convaudit ops      --mismatched D1 --correct D2 --testsuite D3 [--h1-overlap X] [--lenient]
//   convaudit seqs     --mismatched D1 --correct D2 --testsuite D3 [--min-seq-len N] [--max-paths N]
//   convaudit taxonomy --records F --mode symptom|cause|location|joint
//
// Global: --format text|json, --output PATH. Payloads go to stdout (or
// --output), diagnostics to stderr.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "convaudit/audit.hpp"

namespace {

void add_corpus_flags(CLI::App* cmd, convaudit::CorpusDirs& dirs, bool& lenient) {
  cmd->add_option("--mismatched", dirs.mismatched, "Directory of mismatched model graphs")->required();
  cmd->add_option("--correct", dirs.correct, "Directory of correctly converted model graphs")->required();
  cmd->add_option("--testsuite", dirs.test_suite, "Directory of converter test-suite model graphs")->required();
  cmd->add_flag("--lenient", lenient, "Exit 0 even when some graph files fail to parse");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace convaudit;

  CLI::App app{"Audit deep-learning model converters"};
  app.require_subcommand(1);

  AuditConfig cfg;
  std::string output_path;
  app.add_option("--format", cfg.output_format, "Payload format")
      ->transform(CLI::CheckedTransformer(std::map<std::string, OutputFormat>{{"text", OutputFormat::Text},
                                                                              {"json", OutputFormat::Json}}))
      ->capture_default_str();
  app.add_option("--output", output_path, "Write the payload to PATH instead of stdout");

  auto* classify = app.add_subcommand("classify", "Classify conversion records into outcome categories");
  std::filesystem::path manifest;
  ClassifyOptions classify_opts;
  std::string verdicts_path;
  bool nan_as_mismatch = false;
  classify->add_option("--manifest", manifest, "JSON Lines manifest of conversion records")->required();
  classify->add_option("--threshold", cfg.threshold, "Maximum absolute difference tolerance (strict)")
      ->capture_default_str();
  classify->add_flag("--fail-on-mismatch", classify_opts.fail_on_mismatch, "Exit 1 if any behavioural difference");
  classify->add_flag("--nan-as-mismatch", nan_as_mismatch, "Treat NaN anywhere as a mismatch");
  classify->add_option("--verdicts", verdicts_path, "Also write per-model verdicts as JSON Lines");

  CorpusDirs dirs;
  bool lenient = false;
  auto* ops = app.add_subcommand("ops", "Operator-type analysis and the operator hypothesis");
  add_corpus_flags(ops, dirs, lenient);
  ops->add_option("--h1-overlap", cfg.h1_overlap_fraction, "Jaccard overlap at which H1 is rejected")
      ->capture_default_str();

  auto* seqs = app.add_subcommand("seqs", "Operator-sequence analysis and the sequence hypothesis");
  add_corpus_flags(seqs, dirs, lenient);
  seqs->add_option("--min-seq-len", cfg.min_seq_len, "Shortest common sequence")->capture_default_str();
  seqs->add_option("--max-paths", cfg.max_paths_per_model, "Simple-path budget per model")->capture_default_str();
  seqs->add_option("--h2-reject-min-support", cfg.h2_reject_min_support, "Reject H2 below this max support")
      ->capture_default_str();
  seqs->add_option("--h2-support-fraction", cfg.h2_support_fraction, "Support H2 at this fraction of models")
      ->capture_default_str();

  auto* taxonomy = app.add_subcommand("taxonomy", "Aggregate labeled failure records");
  std::filesystem::path records;
  TaxonomyMode mode = TaxonomyMode::Symptom;
  taxonomy->add_option("--records", records, "CSV of labeled failure records")->required();
  taxonomy->add_option("--mode", mode, "Table to produce")
      ->required()
      ->transform(CLI::CheckedTransformer(std::map<std::string, TaxonomyMode>{{"symptom", TaxonomyMode::Symptom},
                                                                              {"cause", TaxonomyMode::Cause},
                                                                              {"location", TaxonomyMode::Location},
                                                                              {"joint", TaxonomyMode::Joint}}));

  CLI11_PARSE(app, argc, argv);

  CommandResult result;
  if (*classify) {
    cfg.nan_positions_equal = !nan_as_mismatch;
    if (!verdicts_path.empty()) classify_opts.verdicts_path = verdicts_path;
    result = cmd_classify(manifest, cfg, classify_opts);
  } else if (*ops) {
    result = cmd_ops(dirs, cfg, lenient);
  } else if (*seqs) {
    result = cmd_seqs(dirs, cfg, lenient);
  } else {
    result = cmd_taxonomy(records, mode, cfg);
  }

  std::cerr << result.log;
  if (!result.payload.empty()) {
    if (output_path.empty()) {
      std::cout << result.payload;
    } else {
      std::ofstream out(output_path, std::ios::binary);
      out << result.payload;
      if (!out) {
        std::cerr << "error: cannot write " << output_path << "\n";
        return kExitError;
      }
    }
  }
  return result.exit_code;
}
