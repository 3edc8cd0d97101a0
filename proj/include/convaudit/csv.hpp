#pragma once

// Minimal RFC 4180 reader: comma separated, double-quoted fields may contain
// commas, doubled quotes and newlines. CRLF and LF line endings both accepted.

#include <string>
#include <string_view>
#include <vector>

#include "convaudit/error.hpp"

namespace convaudit::csv {

struct Row {
  std::size_t line = 0;  // 1-based line on which the row starts
  std::vector<std::string> fields;
};

inline std::vector<Row> parse(std::string_view text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool closed_quote = false;
  std::size_t line = 1;
  row.line = 1;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
    closed_quote = false;
  };
  auto end_row = [&] {
    end_field();
    bool blank = row.fields.size() == 1 && row.fields[0].empty();
    if (!blank) rows.push_back(std::move(row));
    row = Row{};
    row.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
          closed_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started || !field.empty()) {
          throw AuditError(ErrorKind::MalformedInput, "line " + std::to_string(line), "stray quote");
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',': end_field(); break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        ++line;
        end_row();
        break;
      case '\n':
        ++line;
        end_row();
        break;
      default:
        if (closed_quote) {
          throw AuditError(ErrorKind::MalformedInput, "line " + std::to_string(line), "text after closing quote");
        }
        field += c;
    }
  }
  if (in_quotes) throw AuditError(ErrorKind::MalformedInput, "line " + std::to_string(row.line), "unterminated quote");
  if (field_started || !field.empty() || !row.fields.empty()) end_row();
  return rows;
}

}  // namespace convaudit::csv
