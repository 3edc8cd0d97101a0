#pragma once

// Differential-test verdicts: compare original and converted inference
// outputs under the maximum-absolute-difference criterion and classify each
// conversion attempt into one outcome row.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "convaudit/error.hpp"
#include "convaudit/report.hpp"
#include "convaudit/tensor.hpp"

namespace convaudit {

struct TolerancePolicy {
  double threshold = 1e-7;
  // NaN at the same position in both tensors counts as equal. When false,
  // any NaN makes the pair incomparable.
  bool nan_positions_equal = true;

  void validate() const {
    if (!(threshold > 0) || !std::isfinite(threshold)) {
      throw AuditError(ErrorKind::InvalidConfig, "threshold", "must be a positive finite number");
    }
  }
};

// Result of comparing one tensor pair: a distance, or the reason no distance
// exists.
class Difference {
 public:
  static Difference of(double d) { return Difference(d, {}); }
  static Difference incomparable(std::string reason) { return Difference(std::nullopt, std::move(reason)); }

  bool comparable() const noexcept { return value_.has_value(); }
  double value() const { return value_.value(); }
  const std::string& reason() const noexcept { return reason_; }

 private:
  Difference(std::optional<double> v, std::string r) : value_(v), reason_(std::move(r)) {}
  std::optional<double> value_;
  std::string reason_;
};

inline Difference max_abs_diff(const Tensor& a, const Tensor& b, bool nan_positions_equal = true) {
  if (a.shape() != b.shape()) return Difference::incomparable("shape mismatch");
  if (a.dtype() != b.dtype()) return Difference::incomparable("dtype mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double x = a.at(i), y = b.at(i);
    bool nx = std::isnan(x), ny = std::isnan(y);
    if (nx || ny) {
      if (nx && ny && nan_positions_equal) continue;
      return Difference::incomparable("nan in output");
    }
    if (x == y) continue;  // also covers matching infinities
    worst = std::max(worst, std::fabs(x - y));
  }
  return Difference::of(worst);
}

enum class Category { WrapperError, UnsuccessfulConversion, UnsuccessfulLoad, BehaviouralDifference, Success };

inline constexpr std::array<Category, 5> kCategories = {
    Category::WrapperError, Category::UnsuccessfulConversion, Category::UnsuccessfulLoad,
    Category::BehaviouralDifference, Category::Success};

constexpr std::string_view to_string(Category c) {
  switch (c) {
    case Category::WrapperError: return "WrapperError";
    case Category::UnsuccessfulConversion: return "UnsuccessfulConversion";
    case Category::UnsuccessfulLoad: return "UnsuccessfulLoad";
    case Category::BehaviouralDifference: return "BehaviouralDifference";
    case Category::Success: return "Success";
  }
  return "?";
}

constexpr std::string_view row_label(Category c) {
  switch (c) {
    case Category::WrapperError: return "Unsuccessful Conversion (wrapper error)";
    case Category::UnsuccessfulConversion: return "Unsuccessful Conversion";
    case Category::UnsuccessfulLoad: return "Unsuccessful runtime loading";
    case Category::BehaviouralDifference: return "Behavioural Difference";
    case Category::Success: return "Successful";
  }
  return "?";
}

struct Verdict {
  Category category = Category::Success;
  std::optional<double> max_abs_diff;
  std::optional<std::string> reason;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

using TensorPair = std::pair<Tensor, Tensor>;

// Success iff every pair is comparable and the largest difference is
// strictly below the threshold.
inline Verdict compare_outputs(std::span<const TensorPair> pairs, const TolerancePolicy& policy) {
  policy.validate();
  if (pairs.empty()) throw AuditError(ErrorKind::EmptyInput, "output pairs");
  double worst = 0.0;
  for (const auto& [original, converted] : pairs) {
    auto d = max_abs_diff(original, converted, policy.nan_positions_equal);
    if (!d.comparable()) return {Category::BehaviouralDifference, std::nullopt, d.reason()};
    worst = std::max(worst, d.value());
  }
  return {worst < policy.threshold ? Category::Success : Category::BehaviouralDifference, worst,
          std::nullopt};
}

// ---------------------------------------------------------------------------
// Conversion records and manifests

enum class Stage { WrapperError, ConversionError, LoadError, ExecutionError, InferenceDone };

constexpr std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::WrapperError: return "wrapper_error";
    case Stage::ConversionError: return "conversion_error";
    case Stage::LoadError: return "load_error";
    case Stage::ExecutionError: return "execution_error";
    case Stage::InferenceDone: return "inference_done";
  }
  return "?";
}

inline std::optional<Stage> parse_stage(std::string_view s) {
  for (auto st : {Stage::WrapperError, Stage::ConversionError, Stage::LoadError, Stage::ExecutionError,
                  Stage::InferenceDone}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

struct OutputPair {
  std::string original;
  std::string converted;
  friend bool operator==(const OutputPair&, const OutputPair&) = default;
};

struct ConversionRecord {
  std::string model_id;
  std::string converter;  // "tf2onnx", "torch_onnx" or any other converter name
  std::string corpus_kind = "synthetic";
  Stage stage = Stage::InferenceDone;
  std::optional<std::string> error_text;
  std::vector<OutputPair> output_pairs;

  void validate() const {
    if (model_id.empty()) throw AuditError(ErrorKind::MalformedInput, "model_id", "empty");
    if (converter.empty()) throw AuditError(ErrorKind::MalformedInput, model_id, "empty converter");
    if (stage == Stage::InferenceDone) {
      if (output_pairs.empty()) {
        throw AuditError(ErrorKind::MalformedInput, model_id, "inference_done needs at least one output pair");
      }
      if (error_text) throw AuditError(ErrorKind::MalformedInput, model_id, "error_text on a successful run");
    } else {
      if (!error_text) throw AuditError(ErrorKind::MalformedInput, model_id, "error stage without error_text");
      if (!output_pairs.empty()) {
        throw AuditError(ErrorKind::MalformedInput, model_id, "output pairs on a failed run");
      }
    }
  }
};

inline ConversionRecord record_from_json(const nlohmann::json& j) {
  auto bad = [](const std::string& key, const std::string& what) {
    return AuditError(ErrorKind::MalformedInput, key, what);
  };
  if (!j.is_object()) throw bad("<record>", "expected object");
  static const std::array<std::string_view, 6> known = {"model_id", "converter", "corpus_kind",
                                                        "stage_reached", "error_text", "output_pairs"};
  for (const auto& [k, _] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw bad(k, "unknown key");
  }
  auto str = [&](const char* key, bool required) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) throw bad(key, "missing");
      return std::nullopt;
    }
    if (!it->is_string()) throw bad(key, "expected string");
    return it->get<std::string>();
  };

  ConversionRecord r;
  r.model_id = *str("model_id", true);
  r.converter = *str("converter", true);
  if (auto kind = str("corpus_kind", false)) r.corpus_kind = *kind;
  auto stage_text = *str("stage_reached", true);
  auto stage = parse_stage(stage_text);
  if (!stage) throw AuditError(ErrorKind::UnknownEnumValue, "stage_reached", stage_text);
  r.stage = *stage;
  r.error_text = str("error_text", false);
  if (auto it = j.find("output_pairs"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw bad("output_pairs", "expected array");
    for (const auto& p : *it) {
      if (!p.is_object() || !p.contains("original") || !p.contains("converted") || p.size() != 2 ||
          !p["original"].is_string() || !p["converted"].is_string()) {
        throw bad("output_pairs", "expected {\"original\": path, \"converted\": path}");
      }
      r.output_pairs.push_back({p["original"].get<std::string>(), p["converted"].get<std::string>()});
    }
  }
  r.validate();
  return r;
}

inline nlohmann::ordered_json record_to_json(const ConversionRecord& r) {
  nlohmann::ordered_json j;
  j["model_id"] = r.model_id;
  j["converter"] = r.converter;
  j["corpus_kind"] = r.corpus_kind;
  j["stage_reached"] = to_string(r.stage);
  if (r.error_text) j["error_text"] = *r.error_text;
  if (!r.output_pairs.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : r.output_pairs) arr.push_back({{"original", p.original}, {"converted", p.converted}});
    j["output_pairs"] = std::move(arr);
  }
  return j;
}

// JSON Lines; blank lines are ignored. Errors carry the 1-based line number.
inline std::vector<ConversionRecord> parse_manifest(std::string_view text) {
  std::vector<ConversionRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line.begin(), line.end())));
    } catch (const nlohmann::json::exception& e) {
      throw AuditError(ErrorKind::MalformedInput, "manifest line " + std::to_string(line_no), e.what());
    } catch (const AuditError& e) {
      throw AuditError(e.kind(), "manifest line " + std::to_string(line_no), e.what());
    }
  }
  return out;
}

// Tensor dump paths are resolved against `base_dir` (the manifest's
// directory).
inline Verdict classify_record(const ConversionRecord& r, const TolerancePolicy& policy,
                               const std::filesystem::path& base_dir = {}) {
  r.validate();
  auto error_reason = [&] { return std::string(to_string(r.stage)) + ": " + r.error_text.value_or(""); };
  switch (r.stage) {
    case Stage::WrapperError: return {Category::WrapperError, std::nullopt, error_reason()};
    case Stage::ConversionError: return {Category::UnsuccessfulConversion, std::nullopt, error_reason()};
    // Inference-time crashes are runtime failures; the raw stage survives in
    // the reason.
    case Stage::LoadError:
    case Stage::ExecutionError: return {Category::UnsuccessfulLoad, std::nullopt, error_reason()};
    case Stage::InferenceDone: break;
  }
  std::vector<TensorPair> pairs;
  pairs.reserve(r.output_pairs.size());
  for (const auto& p : r.output_pairs) {
    pairs.emplace_back(load_tensor_dump(base_dir / p.original), load_tensor_dump(base_dir / p.converted));
  }
  return compare_outputs(pairs, policy);
}

inline nlohmann::ordered_json verdict_to_json(const ConversionRecord& r, const Verdict& v) {
  nlohmann::ordered_json j;
  j["model_id"] = r.model_id;
  j["converter"] = r.converter;
  j["corpus_kind"] = r.corpus_kind;
  j["stage_reached"] = to_string(r.stage);
  j["category"] = to_string(v.category);
  j["max_abs_diff"] = v.max_abs_diff ? nlohmann::ordered_json(*v.max_abs_diff) : nlohmann::ordered_json();
  j["reason"] = v.reason ? nlohmann::ordered_json(*v.reason) : nlohmann::ordered_json();
  return j;
}

// ---------------------------------------------------------------------------
// Outcome table

struct LabeledVerdict {
  Verdict verdict;
  std::string converter;
  std::string corpus_kind;
};

struct OutcomeColumn {
  std::string converter;
  std::string corpus_kind;
  std::array<std::uint64_t, 5> counts{};  // indexed like kCategories

  std::uint64_t start() const {
    std::uint64_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }
  std::uint64_t count(Category c) const { return counts[static_cast<std::size_t>(c)]; }
};

struct OutcomeTable {
  std::vector<OutcomeColumn> columns;

  const OutcomeColumn* column(std::string_view converter, std::string_view kind) const {
    for (const auto& c : columns)
      if (c.converter == converter && c.corpus_kind == kind) return &c;
    return nullptr;
  }
};

namespace detail {
inline int converter_rank(std::string_view c) {
  if (c == "tf2onnx") return 0;
  if (c == "torch_onnx") return 1;
  return 2;
}
inline int kind_rank(std::string_view k) {
  if (k == "real") return 0;
  if (k == "synthetic") return 1;
  return 2;
}
}  // namespace detail

// The four standard columns (tf2onnx/torch_onnx x real/synthetic) always
// appear; other converters and corpus kinds add columns after them.
inline OutcomeTable summarize(std::span<const LabeledVerdict> verdicts) {
  using Key = std::tuple<int, std::string, int, std::string>;
  std::map<Key, OutcomeColumn> cols;
  auto slot = [&](const std::string& conv, const std::string& kind) -> OutcomeColumn& {
    Key key{detail::converter_rank(conv), conv, detail::kind_rank(kind), kind};
    auto [it, inserted] = cols.try_emplace(key);
    if (inserted) {
      it->second.converter = conv;
      it->second.corpus_kind = kind;
    }
    return it->second;
  };
  for (const char* conv : {"tf2onnx", "torch_onnx"})
    for (const char* kind : {"real", "synthetic"}) slot(conv, kind);
  for (const auto& lv : verdicts) ++slot(lv.converter, lv.corpus_kind).counts[static_cast<std::size_t>(lv.verdict.category)];

  OutcomeTable t;
  for (auto& [_, c] : cols) t.columns.push_back(std::move(c));
  return t;
}

inline std::string render_text(const OutcomeTable& t) {
  std::vector<std::string> header{"Outcome"};
  for (const auto& c : t.columns) header.push_back(c.converter + "/" + c.corpus_kind);
  TextTable table(std::move(header));
  std::vector<std::string> start{"Start: number of models"};
  for (const auto& c : t.columns) start.push_back(std::to_string(c.start()));
  table.add_row(std::move(start));
  table.add_rule();
  for (auto cat : kCategories) {
    std::vector<std::string> row{std::string(row_label(cat))};
    for (const auto& c : t.columns) row.push_back(count_with_percent(c.count(cat), c.start()));
    table.add_row(std::move(row));
  }
  return table.render();
}

inline nlohmann::ordered_json to_json(const OutcomeTable& t) {
  auto cols = nlohmann::ordered_json::array();
  for (const auto& c : t.columns) {
    nlohmann::ordered_json jc;
    jc["converter"] = c.converter;
    jc["corpus_kind"] = c.corpus_kind;
    jc["start"] = c.start();
    nlohmann::ordered_json rows;
    for (auto cat : kCategories) {
      rows[std::string(to_string(cat))] = {{"count", c.count(cat)}, {"percent", percent_half_up(c.count(cat), c.start())}};
    }
    jc["outcomes"] = std::move(rows);
    cols.push_back(std::move(jc));
  }
  return {{"columns", std::move(cols)}};
}

}  // namespace convaudit
