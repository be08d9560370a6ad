#ifndef WBIDF_CSV_HPP
#define WBIDF_CSV_HPP

// RFC 4180 reader: comma separated, double-quote quoting with "" escapes,
// CRLF or LF record terminators, newlines allowed inside quoted fields.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "wbidf/error.hpp"

namespace wbidf::csv {

struct Record {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

inline std::vector<Record> parse(std::string_view text) {
  std::vector<Record> records;
  std::size_t pos = 0;
  std::size_t line = 1;
  // Skip a UTF-8 byte order mark.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;

  while (pos < text.size()) {
    Record rec;
    rec.line = line;
    std::string field;
    bool at_field_start = true;
    bool quoted = false;
    bool done = false;
    while (!done) {
      if (pos >= text.size()) {
        if (quoted) {
          throw InputError("csv line " + std::to_string(rec.line) +
                           ": unterminated quoted field");
        }
        rec.fields.push_back(std::move(field));
        break;
      }
      const char c = text[pos];
      if (quoted) {
        if (c == '"') {
          if (pos + 1 < text.size() && text[pos + 1] == '"') {
            field.push_back('"');
            pos += 2;
          } else {
            quoted = false;
            ++pos;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++pos;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (!at_field_start) {
            throw InputError("csv line " + std::to_string(line) +
                             ": quote inside unquoted field");
          }
          quoted = true;
          at_field_start = false;
          ++pos;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          at_field_start = true;
          ++pos;
          break;
        case '\r':
          ++pos;
          if (pos < text.size() && text[pos] == '\n') ++pos;
          ++line;
          rec.fields.push_back(std::move(field));
          done = true;
          break;
        case '\n':
          ++pos;
          ++line;
          rec.fields.push_back(std::move(field));
          done = true;
          break;
        default:
          field.push_back(c);
          at_field_start = false;
          ++pos;
      }
    }
    // A blank line is not a record.
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace wbidf::csv

#endif  // WBIDF_CSV_HPP
