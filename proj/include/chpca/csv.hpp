#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chpca/types.hpp"

namespace chpca::csv {

/// Splits one record. Handles double-quoted fields with "" escapes.
inline std::vector<std::string> split(std::string_view line, char delimiter, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (ch == delimiter) {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(ch);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  fields.push_back(std::move(field));
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

/// Line reader that tracks line numbers, strips a UTF-8 BOM and skips blank lines.
class Reader {
public:
  Reader(std::istream& in, char delimiter) : in_(in), delimiter_(delimiter) {}

  std::optional<std::vector<std::string>> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line_no_ == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (trim(line).empty()) continue;
      auto fields = split(line, delimiter_, line_no_);
      for (auto& f : fields) f = std::string(trim(f));
      return fields;
    }
    return std::nullopt;
  }

  std::size_t line() const noexcept { return line_no_; }

private:
  std::istream& in_;
  char delimiter_;
  std::size_t line_no_ = 0;
};

inline std::size_t column_index(const std::vector<std::string>& header, std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ParseError("missing column '" + std::string(name) + "'", 1);
}

inline double parse_double(const std::string& text, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw ParseError("invalid number '" + text + "'", line_no);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("invalid number '" + text + "'", line_no);
  }
}

}  // namespace chpca::csv
