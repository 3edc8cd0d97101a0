// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "convaudit/audit.hpp"
#include "support.hpp"

using namespace convaudit;
namespace oracle = testsupport::oracle;
using testsupport::fixture;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt_seconds(double s) {
  std::ostringstream o;
  o.precision(3);
  o << std::fixed << s << "s";
  return o.str();
}

const std::filesystem::path kCsv = testsupport::data_dir() / "taxonomy" / "failures.csv";

Outcome taxonomy_reproduction() {
  Outcome o;
  auto t0 = Clock::now();
  auto records = parse_records(read_file_bytes(kCsv));
  auto sym = marginal(records, Dimension::Symptom);
  auto jt = joint(records);
  double elapsed = seconds_since(t0);

  o.require(records.size() == 200, "record count");
  const std::vector<std::pair<std::string, std::uint64_t>> totals = {
      {"Crash", 112}, {"WrongModel", 65}, {"BuildFailure", 5}, {"BadPerformance", 3}, {"Hang", 0}, {"Unreported", 15}};
  for (const auto& [row, n] : totals) o.require(sym.row_total(row) == n, "symptom " + row);

  // tf2onnx / torch_onnx cells of the top-five cause rows.
  const std::vector<std::string> cols = {"Crash", "WrongModel", "BadPerformance", "BuildFailure", "Hang", "Unreported"};
  const std::map<std::string, std::array<std::array<std::uint64_t, 6>, 2>> cells = {
      {"Incompatibility", {{{19, 4, 0, 0, 0, 2}, {28, 3, 0, 0, 0, 1}}}},
      {"TypeProblem", {{{8, 17, 0, 0, 0, 0}, {14, 13, 1, 0, 0, 1}}}},
      {"AlgorithmicError", {{{4, 10, 2, 0, 0, 2}, {3, 3, 0, 0, 0, 0}}}},
      {"ShapeProblem", {{{5, 4, 0, 0, 0, 0}, {4, 7, 0, 0, 0, 1}}}},
      {"APIMisuse", {{{6, 0, 0, 0, 0, 0}, {5, 1, 0, 0, 0, 0}}}},
  };
  const std::array<std::array<std::uint64_t, 6>, 2> col_totals = {{{50, 35, 2, 3, 0, 10}, {62, 30, 1, 2, 0, 5}}};
  const std::array<std::string, 2> convs = {"tf2onnx", "torch_onnx"};
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::uint64_t known = 0;
      for (const auto& [row, v] : cells) {
        o.require(jt.cell(convs[k], row, cols[c]) == v[k][c], row + " x " + cols[c] + " " + convs[k]);
        known += v[k][c];
      }
      o.require(jt.cell(convs[k], "Others", cols[c]) == col_totals[k][c] - known,
                "Others x " + cols[c] + " " + convs[k]);
    }
  }
  o.require(elapsed < 1.0, "runtime " + fmt_seconds(elapsed));
  if (o.pass) o.detail = "Crash 112, WrongModel 65, joint cells exact, " + fmt_seconds(elapsed);
  return o;
}

Outcome cross_table() {
  Outcome o;
  auto t = marginal(parse_records(read_file_bytes(kCsv)), Dimension::Cause);
  const std::vector<std::pair<std::string, std::uint64_t>> expect = {{"Incompatibility/External", 55},
                                                                     {"TypeProblem/Node", 46},
                                                                     {"AlgorithmicError", 24},
                                                                     {"ShapeProblem", 21},
                                                                     {"APIMisuse", 12}};
  for (const auto& [row, n] : expect)
    o.require(t.row_total(row) == n, row + " = " + std::to_string(t.row_total(row)));
  if (o.pass) o.detail = "External 55, Node 46, AlgorithmicError 24, ShapeProblem 21, APIMisuse 12";
  return o;
}

Outcome difference_criterion() {
  Outcome o;
  auto one = [](double a, double b) {
    std::vector<TensorPair> p{{Tensor({1}, std::vector<double>{a}), Tensor({1}, std::vector<double>{b})}};
    return compare_outputs(p, TolerancePolicy{});
  };
  auto below = one(0.0, 9.99e-8);
  o.require(below.category == Category::Success, "9.99e-8 not Success");
  auto at = one(0.0, 1.0e-7);
  o.require(at.category == Category::BehaviouralDifference, "1.0e-7 not BehaviouralDifference");
  std::vector<TensorPair> shape{{Tensor({2, 3}, std::vector<float>(6)), Tensor({3, 2}, std::vector<float>(6))}};
  auto s = compare_outputs(shape, TolerancePolicy{});
  o.require(s.category == Category::BehaviouralDifference && s.reason == "shape mismatch", "shape mismatch");
  std::vector<TensorPair> same{{Tensor({2}, std::vector<float>{1.5f, -2.f}), Tensor({2}, std::vector<float>{1.5f, -2.f})}};
  auto id = compare_outputs(same, TolerancePolicy{});
  o.require(id.category == Category::Success && id.max_abs_diff == 0.0, "identical tensors");
  if (o.pass) o.detail = "strict threshold 1e-7 boundary, shape mismatch, identity";
  return o;
}

Outcome simple_path_oracle() {
  Outcome o;
  auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::size_t total_paths = 0;
  for (int i = 0; i < 100; ++i) {
    auto g = testsupport::random_dag(rng, 12, 5, "dag" + std::to_string(i));
    auto got = simple_paths(g, PathBudget{1u << 20});
    total_paths += got.size();
    o.require(testsupport::as_multiset(got) == testsupport::as_multiset(oracle::all_paths(g)), g.model_id());
  }
  double elapsed = seconds_since(t0);
  o.require(elapsed < 10.0, "runtime " + fmt_seconds(elapsed));
  if (o.pass) o.detail = "100 DAGs, " + std::to_string(total_paths) + " paths, " + fmt_seconds(elapsed);
  return o;
}

Outcome common_sequence_oracle() {
  Outcome o;
  auto t0 = Clock::now();
  std::mt19937_64 rng(2025);
  std::uniform_int_distribution<int> alphabet(1, 5);
  std::size_t found = 0;
  for (int i = 0; i < 100; ++i) {
    int a = alphabet(rng);
    std::vector<OpSequence> x{testsupport::random_seq(rng, 12, a)}, y{testsupport::random_seq(rng, 12, a)};
    auto got = common_sequences(x, y, 3);
    found += got.size();
    o.require(got.sequences() == oracle::common(x, y, 3), "pair " + std::to_string(i));
  }
  double elapsed = seconds_since(t0);
  o.require(elapsed < 10.0, "runtime " + fmt_seconds(elapsed));
  if (o.pass) o.detail = "100 pairs, " + std::to_string(found) + " common runs, " + fmt_seconds(elapsed);
  return o;
}

Outcome reduction_properties() {
  Outcome o;
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<int> count(1, 20);
  for (int i = 0; i < 100; ++i) {
    SeqSet s("random");
    for (int k = count(rng); k > 0; --k) s.insert(testsupport::random_seq(rng, 10, 4, 3));
    auto r = reduce_sequences(s, 3);
    for (const auto& a : r)
      for (const auto& b : r)
        if (a != b) o.require(!oracle::contains(a, b), "antichain, set " + std::to_string(i));
    for (const auto& in : s) {
      bool covered = std::any_of(r.begin(), r.end(), [&](const auto& out) { return oracle::contains(in, out); });
      o.require(covered, "coverage, set " + std::to_string(i));
    }
    o.require(reduce_sequences(r, 3) == r, "idempotence, set " + std::to_string(i));
  }
  auto chars = [](std::string_view s) {
    OpSequence out;
    for (char c : s) out.emplace_back(1, c);
    return out;
  };
  auto ex = reduce_sequences(SeqSet("ex", {chars("aaaabd"), chars("aaaabc")}), 3);
  o.require(ex.sequences() == std::set<OpSequence>{chars("aaaab")}, "aaaabd/aaaabc example");
  if (o.pass) o.detail = "100 random sets: antichain, coverage, idempotent; {aaaabd, aaaabc} -> {aaaab}";
  return o;
}

Corpus load(const std::filesystem::path& dir, CorpusRole role) {
  auto l = load_corpus_dir(dir, role);
  if (!l.failures.empty()) throw AuditError(ErrorKind::MalformedInput, l.failures[0].path, l.failures[0].message);
  return std::move(l.corpus);
}

Outcome region_counts() {
  Outcome o;
  auto r = sequence_report(load(fixture("seqs/mismatched"), CorpusRole::Mismatched),
                           load(fixture("seqs/correct"), CorpusRole::Correct),
                           load(fixture("seqs/testsuite"), CorpusRole::TestSuite));
  auto expect = nlohmann::json::parse(read_file_bytes(fixture("seqs/expected_counts.json")));
  std::ostringstream summary;
  const std::vector<std::pair<const char*, const RegionCounts*>> regions = {
      {"shared_mismatched", &r.shared_mismatched},
      {"shared_correct", &r.shared_correct},
      {"shared_test_suite", &r.shared_test_suite},
      {"only_mismatched", &r.only_mismatched}};
  for (const auto& [key, c] : regions) {
    auto raw = expect[key]["raw"].get<std::size_t>();
    auto red = expect[key]["reduced"].get<std::size_t>();
    o.require(c->raw.size() == raw && c->reduced.size() == red, key);
    summary << key << " " << c->raw.size() << "/" << c->reduced.size() << " ";
  }
  if (o.pass) o.detail = summary.str() + "(raw/reduced, equal to oracle script)";
  return o;
}

Outcome hypothesis_rules() {
  Outcome o;
  auto ops = op_set_report(load(fixture("ops_h1/mismatched"), CorpusRole::Mismatched),
                           load(fixture("ops_h1/correct"), CorpusRole::Correct),
                           load(fixture("ops_h1/testsuite"), CorpusRole::TestSuite));
  o.require(jaccard(ops.set_a, ops.set_b) == 0.95, "H1 fixture overlap is not 0.95");
  o.require(evaluate_h1(ops).outcome == HypothesisOutcome::Rejected, "H1 at 95% overlap not rejected");

  auto mined = mine_paths(load(fixture("h2/rejected/mismatched"), CorpusRole::Mismatched));
  SeqSet candidates("candidates");
  for (const auto& s : nlohmann::json::parse(read_file_bytes(fixture("h2/rejected/candidates.json"))))
    candidates.insert(s.get<OpSequence>());
  auto rej = evaluate_h2(candidates, mined);
  o.require(rej.evidence["max_support"] == 1, "H2 rejection fixture max support != 1");
  o.require(rej.outcome == HypothesisOutcome::Rejected, "H2 with max support 1 not rejected");

  auto sup = sequence_report(load(fixture("h2/supported/mismatched"), CorpusRole::Mismatched),
                             load(fixture("h2/supported/correct"), CorpusRole::Correct),
                             load(fixture("h2/supported/testsuite"), CorpusRole::TestSuite));
  o.require(sup.h2.evidence["max_support"] == sup.h2.evidence["models"], "H2 support fixture max support != n");
  o.require(sup.h2.outcome == HypothesisOutcome::Supported, "H2 with support n not supported");
  if (o.pass) o.detail = "H1 rejected at 0.95 overlap; H2 rejected at max support 1; H2 supported at n/n";
  return o;
}

std::string run_cli(const std::string& args, int& exit_code) {
  std::string cmd = std::string(CONVAUDIT_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (auto n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  int status = pclose(p);
  exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

Outcome determinism() {
  Outcome o;
  auto trio = [](const std::string& base) {
    return " --mismatched " + fixture(base + "/mismatched").string() + " --correct " +
           fixture(base + "/correct").string() + " --testsuite " + fixture(base + "/testsuite").string();
  };
  std::vector<std::string> commands = {
      "classify --manifest " + fixture("classify/six.jsonl").string(),
      "classify --manifest " + fixture("classify/twenty.jsonl").string(),
      "ops" + trio("seqs"),
      "ops" + trio("ops_h1"),
      "seqs" + trio("seqs"),
      "seqs" + trio("h2/supported"),
  };
  for (const char* mode : {"symptom", "cause", "location", "joint"})
    commands.push_back(std::string("taxonomy --mode ") + mode + " --records " + kCsv.string());
  int runs = 0;
  for (const auto& c : commands) {
    for (const char* fmt : {"text", "json"}) {
      auto args = std::string("--format ") + fmt + " " + c;
      int e1 = 0, e2 = 0;
      auto a = run_cli(args, e1);
      auto b = run_cli(args, e2);
      runs += 2;
      o.require(e1 == 0 && e2 == 0, "nonzero exit: " + args);
      o.require(!a.empty() && a == b, "payload differs: " + args);
    }
  }
  if (o.pass) o.detail = std::to_string(runs) + " CLI runs, payloads byte-identical in pairs";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 taxonomy reproduction", taxonomy_reproduction},
      {"2 cross-table consistency", cross_table},
      {"3 difference criterion", difference_criterion},
      {"4 simple-path oracle", simple_path_oracle},
      {"5 common-sequence oracle", common_sequence_oracle},
      {"6 reduction properties", reduction_properties},
      {"7 region counts vs oracle script", region_counts},
      {"8 hypothesis rules", hypothesis_rules},
      {"9 CLI determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << "\n";
    failed += !o.pass;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criterion(s) failed" : "acceptance: all passed")
            << "\n";
  return failed ? 1 : 0;
}
