#pragma once

// Plain-text table rendering and the percentage convention shared by every
// report.

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

namespace convaudit {

// 100 * part / whole rounded half-up to an integer; 0 when whole is 0.
constexpr std::uint64_t percent_half_up(std::uint64_t part, std::uint64_t whole) {
  if (whole == 0) return 0;
  return (200 * part + whole) / (2 * whole);
}

inline std::string count_with_percent(std::uint64_t part, std::uint64_t whole) {
  return std::to_string(part) + " (" + std::to_string(percent_half_up(part, whole)) + "%)";
}

class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) {
    row.resize(header_.size());
    rows_.push_back(std::move(row));
  }
  void add_rule() { rows_.emplace_back(); }

  // First column left-aligned, the rest right-aligned.
  std::string render() const {
    std::vector<std::size_t> width(header_.size(), 0);
    auto measure = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    };
    measure(header_);
    for (const auto& r : rows_) measure(r);

    std::size_t total = 0;
    for (auto w : width) total += w;
    total += 3 * (width.empty() ? 0 : width.size() - 1);

    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out << " | ";
        std::string pad(width[i] - r[i].size(), ' ');
        out << (i == 0 ? r[i] + pad : pad + r[i]);
      }
      out << '\n';
    };
    emit(header_);
    out << std::string(total, '-') << '\n';
    for (const auto& r : rows_) {
      if (r.empty()) {
        out << std::string(total, '-') << '\n';
      } else {
        emit(r);
      }
    }
    return out.str();
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace convaudit
