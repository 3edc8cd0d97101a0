#pragma once

// Labeled converter failures (symptom, cause, location) and their marginal
// and joint distribution tables.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "convaudit/csv.hpp"
#include "convaudit/error.hpp"
#include "convaudit/report.hpp"

namespace convaudit {

enum class Symptom { Crash, WrongModel, BadPerformance, BuildFailure, Hang, Unreported };

inline constexpr std::array<std::string_view, 6> kSymptomNames = {
    "Crash", "WrongModel", "BadPerformance", "BuildFailure", "Hang", "Unreported"};

enum class CauseCategory { Incompatibility, TypeProblem, AlgorithmicError, ShapeProblem, APIMisuse, Testing, Other };

inline constexpr std::array<std::string_view, 7> kCauseNames = {
    "Incompatibility", "TypeProblem", "AlgorithmicError", "ShapeProblem", "APIMisuse", "Testing", "Other"};

enum class Location { LoadModel, NodeConversion, GraphOptimization, Protobuf, Validation, NotDistinguishable };

inline constexpr std::array<std::string_view, 6> kLocationNames = {
    "LoadModel", "NodeConversion", "GraphOptimization", "Protobuf", "Validation", "NotDistinguishable"};

constexpr std::string_view to_string(Symptom s) { return kSymptomNames[static_cast<std::size_t>(s)]; }
constexpr std::string_view to_string(CauseCategory c) { return kCauseNames[static_cast<std::size_t>(c)]; }
constexpr std::string_view to_string(Location l) { return kLocationNames[static_cast<std::size_t>(l)]; }

template <typename Enum, std::size_t N>
std::optional<Enum> enum_from(std::string_view text, const std::array<std::string_view, N>& names) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == text) return static_cast<Enum>(i);
  return std::nullopt;
}

// Legal subcategories per cause category. An empty list with
// `detail_required == false` means no detail is allowed, except for Other,
// whose detail is free text.
struct CauseRule {
  std::vector<std::string_view> details;
  bool detail_required;
};

inline const CauseRule& cause_rule(CauseCategory c) {
  static const std::array<CauseRule, 7> rules = {{
      {{"External", "Internal", "Resource"}, true},
      {{"Node", "Tensor", "Conventional"}, true},
      {{"Optimization", "Tracing"}, false},
      {{}, false},
      {{}, false},
      {{}, false},
      {{}, true},
  }};
  return rules[static_cast<std::size_t>(c)];
}

struct Cause {
  CauseCategory category;
  std::string detail;  // subcategory, or free text for Other

  std::string label() const {
    return detail.empty() ? std::string(to_string(category)) : std::string(to_string(category)) + "/" + detail;
  }
  friend bool operator==(const Cause&, const Cause&) = default;
};

struct FailureRecord {
  std::string record_id;
  std::string converter;
  Symptom symptom;
  Cause cause;
  std::optional<Location> location;
  std::optional<std::string> source_url;

  friend bool operator==(const FailureRecord&, const FailureRecord&) = default;
};

// ---------------------------------------------------------------------------
// CSV input

inline constexpr std::array<std::string_view, 7> kRecordColumns = {
    "record_id", "converter", "symptom", "cause", "cause_detail", "location", "source_url"};
inline constexpr std::array<std::string_view, 4> kRequiredColumns = {"record_id", "converter", "symptom", "cause"};

inline std::vector<FailureRecord> parse_records(std::string_view text) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw AuditError(ErrorKind::MissingField, "line 1", "header row");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
    const auto& name = rows[0].fields[i];
    if (std::find(kRecordColumns.begin(), kRecordColumns.end(), name) == kRecordColumns.end()) {
      throw AuditError(ErrorKind::MalformedInput, "line 1: " + name, "unknown column");
    }
    if (!col.emplace(name, i).second) throw AuditError(ErrorKind::MalformedInput, "line 1: " + name, "repeated column");
  }
  for (auto req : kRequiredColumns) {
    if (!col.contains(std::string(req))) throw AuditError(ErrorKind::MissingField, "line 1: " + std::string(req), "column");
  }

  std::vector<FailureRecord> out;
  std::unordered_set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "line " + std::to_string(row.line);
    if (row.fields.size() != rows[0].fields.size()) {
      throw AuditError(ErrorKind::MalformedInput, where,
                       "expected " + std::to_string(rows[0].fields.size()) + " fields, got " +
                           std::to_string(row.fields.size()));
    }
    auto get = [&](std::string_view name) -> std::string {
      auto it = col.find(std::string(name));
      return it == col.end() ? std::string() : row.fields[it->second];
    };
    auto required = [&](std::string_view name) {
      auto v = get(name);
      if (v.empty()) throw AuditError(ErrorKind::MissingField, where + ": " + std::string(name));
      return v;
    };
    auto unknown = [&](std::string_view field, const std::string& value) {
      return AuditError(ErrorKind::UnknownEnumValue, where + ": " + std::string(field), value);
    };

    FailureRecord rec;
    rec.record_id = required("record_id");
    if (!ids.insert(rec.record_id).second) throw AuditError(ErrorKind::DuplicateId, rec.record_id, where);
    rec.converter = required("converter");

    auto symptom = required("symptom");
    auto s = enum_from<Symptom>(symptom, kSymptomNames);
    if (!s) throw unknown("symptom", symptom);
    rec.symptom = *s;

    auto cause = required("cause");
    auto c = enum_from<CauseCategory>(cause, kCauseNames);
    if (!c) throw unknown("cause", cause);
    rec.cause = {*c, get("cause_detail")};
    const auto& rule = cause_rule(*c);
    if (rec.cause.detail.empty()) {
      if (rule.detail_required) throw AuditError(ErrorKind::MissingField, where + ": cause_detail");
    } else if (*c != CauseCategory::Other &&
               std::find(rule.details.begin(), rule.details.end(), rec.cause.detail) == rule.details.end()) {
      throw unknown("cause_detail", rec.cause.detail);
    }

    if (auto loc = get("location"); !loc.empty()) {
      auto l = enum_from<Location>(loc, kLocationNames);
      if (!l) throw unknown("location", loc);
      rec.location = *l;
    }
    if (auto url = get("source_url"); !url.empty()) rec.source_url = url;
    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Distribution tables

enum class Dimension { Symptom, Cause, Location };

constexpr std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::Symptom: return "symptom";
    case Dimension::Cause: return "cause";
    case Dimension::Location: return "location";
  }
  return "?";
}

// Counts indexed [converter][row][col]. Marginal tables have a single
// unnamed column.
struct DistributionTable {
  std::vector<std::string> dimensions;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::string> converters;
  std::vector<std::vector<std::vector<std::uint64_t>>> counts;

  std::uint64_t cell(std::size_t conv, std::size_t row, std::size_t col = 0) const { return counts[conv][row][col]; }

  std::uint64_t cell(std::string_view conv, std::string_view row, std::string_view col = {}) const {
    return cell(index(converters, conv), index(row_labels, row), col.empty() ? 0 : index(col_labels, col));
  }

  // Across converters.
  std::uint64_t row_total(std::size_t row, std::size_t col = 0) const {
    std::uint64_t n = 0;
    for (const auto& c : counts) n += c[row][col];
    return n;
  }
  std::uint64_t row_total(std::string_view row, std::string_view col = {}) const {
    return row_total(index(row_labels, row), col.empty() ? 0 : index(col_labels, col));
  }

  std::uint64_t converter_total(std::size_t conv) const {
    std::uint64_t n = 0;
    for (const auto& r : counts[conv])
      for (auto x : r) n += x;
    return n;
  }
  std::uint64_t column_total(std::size_t conv, std::size_t col) const {
    std::uint64_t n = 0;
    for (const auto& r : counts[conv]) n += r[col];
    return n;
  }
  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (std::size_t k = 0; k < converters.size(); ++k) n += converter_total(k);
    return n;
  }

  static std::size_t index(const std::vector<std::string>& labels, std::string_view label) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw AuditError(ErrorKind::MalformedInput, std::string(label), "no such table label");
    return static_cast<std::size_t>(it - labels.begin());
  }
};

// Cause rows in table order; detailed for the two categories whose
// subcategories are always labeled, everything outside the top five binned.
inline const std::vector<std::string>& cause_marginal_rows() {
  static const std::vector<std::string> rows = {
      "Incompatibility/External", "Incompatibility/Internal", "Incompatibility/Resource",
      "TypeProblem/Node",         "TypeProblem/Conventional", "TypeProblem/Tensor",
      "AlgorithmicError",         "ShapeProblem",             "APIMisuse",
      "Others"};
  return rows;
}

inline const std::vector<std::string>& cause_joint_rows() {
  static const std::vector<std::string> rows = {"Incompatibility", "TypeProblem", "AlgorithmicError",
                                                "ShapeProblem",    "APIMisuse",   "Others"};
  return rows;
}

inline std::string cause_joint_row(const Cause& c) {
  switch (c.category) {
    case CauseCategory::Testing:
    case CauseCategory::Other: return "Others";
    default: return std::string(to_string(c.category));
  }
}

inline std::string cause_marginal_row(const Cause& c) {
  switch (c.category) {
    case CauseCategory::Incompatibility:
    case CauseCategory::TypeProblem: return c.label();
    default: return cause_joint_row(c);
  }
}

namespace detail {

inline std::vector<std::string> converter_columns(std::span<const FailureRecord> records) {
  std::set<std::string> others;
  for (const auto& r : records)
    if (r.converter != "tf2onnx" && r.converter != "torch_onnx") others.insert(r.converter);
  std::vector<std::string> out = {"tf2onnx", "torch_onnx"};
  out.insert(out.end(), others.begin(), others.end());
  return out;
}

inline DistributionTable empty_table(std::vector<std::string> dims, std::vector<std::string> rows,
                                     std::vector<std::string> cols, std::vector<std::string> converters) {
  DistributionTable t{std::move(dims), std::move(rows), std::move(cols), std::move(converters), {}};
  t.counts.assign(t.converters.size(),
                  std::vector<std::vector<std::uint64_t>>(t.row_labels.size(),
                                                          std::vector<std::uint64_t>(t.col_labels.size(), 0)));
  return t;
}

inline std::vector<std::string> names_of(std::span<const std::string_view> names) {
  return {names.begin(), names.end()};
}

}  // namespace detail

inline DistributionTable marginal(std::span<const FailureRecord> records, Dimension dim) {
  std::vector<std::string> rows;
  switch (dim) {
    case Dimension::Symptom:
      rows = {"Crash", "WrongModel", "BuildFailure", "BadPerformance", "Hang", "Unreported"};
      break;
    case Dimension::Cause: rows = cause_marginal_rows(); break;
    case Dimension::Location: {
      rows = detail::names_of(kLocationNames);
      bool unlabeled = std::any_of(records.begin(), records.end(), [](const auto& r) { return !r.location; });
      if (unlabeled) rows.push_back("Unlabeled");
      break;
    }
  }
  auto t = detail::empty_table({std::string(to_string(dim))}, std::move(rows), {""}, detail::converter_columns(records));
  for (const auto& r : records) {
    std::string label;
    switch (dim) {
      case Dimension::Symptom: label = to_string(r.symptom); break;
      case Dimension::Cause: label = cause_marginal_row(r.cause); break;
      case Dimension::Location: label = r.location ? std::string(to_string(*r.location)) : "Unlabeled"; break;
    }
    ++t.counts[DistributionTable::index(t.converters, r.converter)][DistributionTable::index(t.row_labels, label)][0];
  }
  return t;
}

// Cause (top five plus Others) by symptom, per converter.
inline DistributionTable joint(std::span<const FailureRecord> records) {
  auto t = detail::empty_table({"cause", "symptom"}, cause_joint_rows(),
                               {"Crash", "WrongModel", "BadPerformance", "BuildFailure", "Hang", "Unreported"},
                               detail::converter_columns(records));
  for (const auto& r : records) {
    ++t.counts[DistributionTable::index(t.converters, r.converter)]
              [DistributionTable::index(t.row_labels, cause_joint_row(r.cause))]
              [DistributionTable::index(t.col_labels, to_string(r.symptom))];
  }
  return t;
}

// Symptom counts of DL compiler front-end failures from an earlier study,
// shown beside the symptom table for comparison only.
struct ReferenceColumn {
  std::string_view title;
  std::array<std::pair<std::string_view, std::uint64_t>, 6> counts;
  std::uint64_t total;
};

inline constexpr ReferenceColumn kCompilerFrontEndSymptoms = {
    "DL compiler front-ends",
    {{{"Crash", 226}, {"WrongModel", 100}, {"BuildFailure", 3}, {"BadPerformance", 6}, {"Hang", 4}, {"Unreported", 20}}},
    359};

inline std::string render_text(const DistributionTable& t) {
  const bool is_joint = t.col_labels.size() > 1;
  const bool with_reference = !is_joint && t.dimensions == std::vector<std::string>{"symptom"};
  std::vector<std::string> header{t.dimensions.front()};
  if (is_joint) {
    for (const auto& col : t.col_labels)
      for (const auto& conv : t.converters) header.push_back(col + " " + conv);
    for (const auto& conv : t.converters) header.push_back("Total " + conv);
  } else {
    for (const auto& conv : t.converters) header.push_back(conv);
    header.push_back("Total");
    if (with_reference) header.push_back(std::string(kCompilerFrontEndSymptoms.title));
  }
  TextTable table(std::move(header));

  const auto total = t.total();
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    std::vector<std::string> row{t.row_labels[r]};
    if (is_joint) {
      for (std::size_t c = 0; c < t.col_labels.size(); ++c)
        for (std::size_t k = 0; k < t.converters.size(); ++k) row.push_back(std::to_string(t.cell(k, r, c)));
      for (std::size_t k = 0; k < t.converters.size(); ++k) {
        std::uint64_t n = 0;
        for (std::size_t c = 0; c < t.col_labels.size(); ++c) n += t.cell(k, r, c);
        row.push_back(std::to_string(n));
      }
    } else {
      for (std::size_t k = 0; k < t.converters.size(); ++k) row.push_back(std::to_string(t.cell(k, r)));
      row.push_back(count_with_percent(t.row_total(r), total));
      if (with_reference) {
        for (const auto& [label, n] : kCompilerFrontEndSymptoms.counts)
          if (label == t.row_labels[r]) row.push_back(count_with_percent(n, kCompilerFrontEndSymptoms.total));
      }
    }
    table.add_row(std::move(row));
  }
  table.add_rule();
  std::vector<std::string> totals{"Total"};
  if (is_joint) {
    for (std::size_t c = 0; c < t.col_labels.size(); ++c)
      for (std::size_t k = 0; k < t.converters.size(); ++k) totals.push_back(std::to_string(t.column_total(k, c)));
    for (std::size_t k = 0; k < t.converters.size(); ++k) totals.push_back(std::to_string(t.converter_total(k)));
  } else {
    for (std::size_t k = 0; k < t.converters.size(); ++k) totals.push_back(std::to_string(t.converter_total(k)));
    totals.push_back(count_with_percent(total, total));
    if (with_reference) totals.push_back(count_with_percent(kCompilerFrontEndSymptoms.total, kCompilerFrontEndSymptoms.total));
  }
  table.add_row(std::move(totals));
  return table.render();
}

inline nlohmann::ordered_json to_json(const DistributionTable& t) {
  nlohmann::ordered_json j;
  j["dimensions"] = t.dimensions;
  j["converters"] = t.converters;
  const bool is_joint = t.col_labels.size() > 1;
  if (is_joint) j["columns"] = t.col_labels;
  const auto total = t.total();
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    nlohmann::ordered_json jr;
    jr["label"] = t.row_labels[r];
    nlohmann::ordered_json counts;
    for (std::size_t k = 0; k < t.converters.size(); ++k) {
      if (is_joint) {
        nlohmann::ordered_json per_col;
        for (std::size_t c = 0; c < t.col_labels.size(); ++c) per_col[t.col_labels[c]] = t.cell(k, r, c);
        counts[t.converters[k]] = std::move(per_col);
      } else {
        counts[t.converters[k]] = t.cell(k, r);
      }
    }
    jr["counts"] = std::move(counts);
    std::uint64_t row_total = 0;
    for (std::size_t c = 0; c < t.col_labels.size(); ++c) row_total += t.row_total(r, c);
    jr["total"] = row_total;
    jr["percent"] = percent_half_up(row_total, total);
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  nlohmann::ordered_json conv_totals;
  for (std::size_t k = 0; k < t.converters.size(); ++k) conv_totals[t.converters[k]] = t.converter_total(k);
  j["converter_totals"] = std::move(conv_totals);
  j["total"] = total;
  return j;
}

}  // namespace convaudit
