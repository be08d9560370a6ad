#ifndef WBIDF_TABLE_HPP
#define WBIDF_TABLE_HPP

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "wbidf/utf8.hpp"

namespace wbidf {

/// Renders a boxed text grid. Column widths use terminal display width,
/// so CJK terms line up.
inline std::string render_grid(const std::string& title,
                               const std::vector<std::string>& header,
                               const std::vector<std::vector<std::string>>& rows) {
  std::size_t n_cols = header.size();
  for (const auto& r : rows) n_cols = std::max(n_cols, r.size());
  std::vector<std::size_t> width(n_cols, 0);
  auto measure = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      width[c] = std::max(width[c], utf8::display_width(r[c]));
    }
  };
  measure(header);
  for (const auto& r : rows) measure(r);

  std::string rule = "+";
  for (auto w : width) rule += std::string(w + 2, '-') + "+";
  rule += "\n";

  auto line = [&](const std::vector<std::string>& r) {
    std::string s = "|";
    for (std::size_t c = 0; c < n_cols; ++c) {
      const std::string cell = c < r.size() ? r[c] : std::string();
      s += " " + cell +
           std::string(width[c] - utf8::display_width(cell) + 1, ' ') + "|";
    }
    return s + "\n";
  };

  std::string out;
  if (!title.empty()) out += title + "\n";
  out += rule + line(header) + rule;
  for (const auto& r : rows) out += line(r);
  out += rule;
  return out;
}

}  // namespace wbidf

#endif  // WBIDF_TABLE_HPP
