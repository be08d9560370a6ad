#ifndef WBIDF_EVAL_HPP
#define WBIDF_EVAL_HPP

// Keyword extraction from a fitted model and precision / recall / F1
// scoring against a labeled keyword universe.

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wbidf/corpus.hpp"
#include "wbidf/error.hpp"
#include "wbidf/lda.hpp"
#include "wbidf/table.hpp"

namespace wbidf {

using KeywordSet = std::set<std::string>;

struct LabelSet {
  std::map<std::string, KeywordSet> labels;  // post id -> keywords
  KeywordSet universe;

  void add(const std::string& post_id, KeywordSet keywords) {
    if (keywords.empty()) {
      throw InputError("labels: post '" + post_id + "' has no keywords");
    }
    universe.insert(keywords.begin(), keywords.end());
    auto [it, inserted] = labels.emplace(post_id, std::move(keywords));
    if (!inserted) {
      throw InputError("labels: duplicate post id '" + post_id + "'");
    }
  }
};

/// Applies the tokenizer's normalization to a label keyword so that it
/// compares equal to the tokens it should match.
inline std::string normalize_keyword(std::string_view keyword,
                                     Tokenization tokenization) {
  if (tokenization == Tokenization::pretokenized) return std::string(keyword);
  const auto parts = tokenize_whitespace(keyword);
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

/// JSONL, one {"id": "...", "keywords": ["...", ...]} object per line.
inline LabelSet parse_labels(std::string_view text,
                             Tokenization tokenization) {
  LabelSet set;
  std::size_t line = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    ++line;
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view row = text.substr(start, end - start);
    start = end + 1;
    if (row.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    const std::string where = "labels line " + std::to_string(line);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(row);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(where + ": invalid JSON (" + e.what() + ")");
    }
    auto id = obj.find("id");
    if (!obj.is_object() || id == obj.end() || !id->is_string()) {
      throw InputError(where + ": field 'id' missing or not a string");
    }
    auto kws = obj.find("keywords");
    if (kws == obj.end() || !kws->is_array()) {
      throw InputError(where + ": field 'keywords' missing or not an array");
    }
    KeywordSet keywords;
    for (const auto& k : *kws) {
      if (!k.is_string()) {
        throw InputError(where + ": field 'keywords' has a non-string element");
      }
      auto norm = normalize_keyword(k.get<std::string>(), tokenization);
      if (!norm.empty()) keywords.insert(std::move(norm));
    }
    if (keywords.empty()) {
      throw InputError(where + ": field 'keywords' is empty");
    }
    set.add(id->get<std::string>(), std::move(keywords));
  }
  return set;
}

inline LabelSet load_labels(const std::string& path,
                            Tokenization tokenization) {
  return parse_labels(detail::read_file(path), tokenization);
}

/// Which topics contribute keywords: all of them, or the m highest ranked.
struct TopicSelection {
  std::optional<std::size_t> top_m;

  static TopicSelection all() { return {}; }
  static TopicSelection top(std::size_t m) { return {m}; }
};

inline KeywordSet detected_keywords(const LdaModel& model,
                                    TopicSelection topics,
                                    std::size_t n_per_topic) {
  std::vector<TopicId> chosen = topic_rank(model);
  if (topics.top_m && *topics.top_m < chosen.size()) {
    chosen.resize(*topics.top_m);
  }
  KeywordSet out;
  for (TopicId k : chosen) {
    for (auto& [term, p] : top_words(model, k, n_per_topic)) {
      out.insert(std::move(term));
    }
  }
  return out;
}

struct EvalReport {
  std::string model_name;
  KeywordSet detected;
  KeywordSet labeled;
  KeywordSet hits;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Harmonic mean; 0 when both inputs are 0.
inline double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

inline EvalReport score(const KeywordSet& detected, const LabelSet& labels,
                        std::string model_name = {}) {
  if (labels.universe.empty()) throw InputError("score: empty label universe");
  EvalReport r;
  r.model_name = std::move(model_name);
  r.detected = detected;
  r.labeled = labels.universe;
  std::set_intersection(detected.begin(), detected.end(),
                        labels.universe.begin(), labels.universe.end(),
                        std::inserter(r.hits, r.hits.end()));
  const double h = static_cast<double>(r.hits.size());
  r.precision = detected.empty() ? 0.0 : h / static_cast<double>(detected.size());
  r.recall = h / static_cast<double>(labels.universe.size());
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  return {{"model", r.model_name},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"n_detected", r.detected.size()},
          {"n_labeled", r.labeled.size()},
          {"n_hits", r.hits.size()},
          {"detected", r.detected},
          {"labeled", r.labeled},
          {"hits", r.hits}};
}

struct ComparisonRow {
  std::string model_name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool best_precision = false;
  bool best_recall = false;
  bool best_f1 = false;
};

using ComparisonTable = std::vector<ComparisonRow>;

/// One row per report in input order; every row attaining a column's
/// maximum is flagged for that column.
inline ComparisonTable compare_models(const std::vector<EvalReport>& reports) {
  ComparisonTable table;
  double max_p = 0.0, max_r = 0.0, max_f = 0.0;
  for (const auto& r : reports) {
    max_p = std::max(max_p, r.precision);
    max_r = std::max(max_r, r.recall);
    max_f = std::max(max_f, r.f1);
  }
  for (const auto& r : reports) {
    table.push_back({r.model_name, r.precision, r.recall, r.f1,
                     r.precision == max_p, r.recall == max_r, r.f1 == max_f});
  }
  return table;
}

namespace detail {
inline std::string fixed3(double x, bool best) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return std::string(buf) + (best ? " *" : "");
}
}  // namespace detail

/// Precision / recall / F1 grid; '*' marks the best value in each column.
inline std::string render_comparison(const ComparisonTable& table) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : table) {
    rows.push_back({r.model_name, detail::fixed3(r.precision, r.best_precision),
                    detail::fixed3(r.recall, r.best_recall),
                    detail::fixed3(r.f1, r.best_f1)});
  }
  return render_grid("Keyword detection scores (* = best in column)",
                     {"Model", "Precision", "Recall", "F1-Score"}, rows);
}

inline nlohmann::json comparison_to_json(const ComparisonTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table) {
    rows.push_back({{"model", r.model_name},
                    {"precision", r.precision},
                    {"recall", r.recall},
                    {"f1", r.f1},
                    {"best_precision", r.best_precision},
                    {"best_recall", r.best_recall},
                    {"best_f1", r.best_f1}});
  }
  return {{"rows", rows}};
}

}  // namespace wbidf

#endif  // WBIDF_EVAL_HPP
