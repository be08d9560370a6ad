#ifndef WBIDF_CORPUS_HPP
#define WBIDF_CORPUS_HPP

// Post ingestion (JSONL / CSV), tokenization, and vocabulary construction.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wbidf/csv.hpp"
#include "wbidf/error.hpp"
#include "wbidf/utf8.hpp"

namespace wbidf {

using TermId = std::uint32_t;

/// One social-media document with its engagement counts.
struct Post {
  std::string id;
  std::vector<std::string> tokens;
  std::uint64_t likes = 0;
  std::uint64_t comments = 0;
  std::uint64_t retweets = 0;
  std::optional<std::string> timestamp;

  friend bool operator==(const Post&, const Post&) = default;
};

enum class InputFormat { jsonl, csv };
enum class Tokenization { pretokenized, whitespace };

/// Term <-> dense id map plus per-term document frequencies.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Rebuilds a vocabulary from stored parts, validating its invariants.
  static Vocabulary from_parts(std::vector<std::string> terms,
                               std::vector<std::uint64_t> doc_freq,
                               std::uint64_t n_docs) {
    if (terms.size() != doc_freq.size()) {
      throw InputError("vocabulary: terms and doc_freq differ in length");
    }
    Vocabulary v;
    v.n_docs_ = n_docs;
    v.doc_freq_ = std::move(doc_freq);
    v.terms_.reserve(terms.size());
    for (auto& term : terms) {
      const auto id = static_cast<TermId>(v.terms_.size());
      if (!v.index_.emplace(term, id).second) {
        throw InputError("vocabulary: duplicate term '" + term + "'");
      }
      v.terms_.push_back(std::move(term));
    }
    for (auto df : v.doc_freq_) {
      if (df == 0 || df > n_docs) {
        throw InputError("vocabulary: doc_freq out of range (0, n_docs]");
      }
    }
    return v;
  }

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  std::uint64_t n_docs() const noexcept { return n_docs_; }

  const std::string& term(TermId id) const { return terms_.at(id); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  std::uint64_t doc_freq(TermId id) const { return doc_freq_.at(id); }
  const std::vector<std::uint64_t>& doc_freqs() const noexcept {
    return doc_freq_;
  }

  std::optional<TermId> find(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.n_docs_ == b.n_docs_ && a.terms_ == b.terms_ &&
           a.doc_freq_ == b.doc_freq_;
  }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> index_;
  std::vector<std::uint64_t> doc_freq_;
  std::uint64_t n_docs_ = 0;
};

/// A post reduced to the ids of its in-vocabulary tokens, order preserved.
struct EncodedDoc {
  std::string post_id;
  std::vector<TermId> term_ids;

  friend bool operator==(const EncodedDoc&, const EncodedDoc&) = default;
};

/// Lowercases, replaces every non letter/digit character with a space,
/// and splits on whitespace.
inline std::vector<std::string> tokenize_whitespace(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t pos = 0; pos < text.size();) {
    const char32_t cp = utf8::decode(text, pos);
    if (utf8::is_word_char(cp)) {
      utf8::append(current, utf8::to_lower(cp));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

/// Splits on ASCII whitespace only, leaving tokens untouched.
inline std::vector<std::string> split_pretokenized(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  for (std::string tok; in >> tok;) tokens.push_back(std::move(tok));
  return tokens;
}

namespace detail {

inline std::string record_where(InputFormat format, std::size_t line) {
  return std::string(format == InputFormat::jsonl ? "jsonl" : "csv") +
         " line " + std::to_string(line);
}

inline std::uint64_t json_count(const nlohmann::json& obj,
                                const char* field, std::size_t line) {
  const std::string where = record_where(InputFormat::jsonl, line);
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw InputError(where + ": missing field '" + field + "'");
  }
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer()) {
    throw InputError(where + ": field '" + field +
                     "' is a negative engagement count");
  }
  throw InputError(where + ": field '" + field + "' is not an integer");
}

inline std::uint64_t csv_count(const std::string& value, const char* field,
                               std::size_t line) {
  const std::string where = record_where(InputFormat::csv, line);
  std::string_view v = value;
  while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
  while (!v.empty() && v.back() == ' ') v.remove_suffix(1);
  if (!v.empty() && v.front() == '-') {
    throw InputError(where + ": field '" + field +
                     "' is a negative engagement count");
  }
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw InputError(where + ": field '" + field + "' is not an integer");
  }
  try {
    return std::stoull(std::string(v));
  } catch (const std::out_of_range&) {
    throw InputError(where + ": field '" + field + "' overflows");
  }
}

inline Post parse_jsonl_record(std::string_view line_text, std::size_t line,
                               Tokenization tokenization) {
  const std::string where = record_where(InputFormat::jsonl, line);
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(where + ": invalid JSON (" + e.what() + ")");
  }
  if (!obj.is_object()) throw InputError(where + ": record is not an object");

  Post post;
  auto id = obj.find("id");
  if (id == obj.end() || !id->is_string()) {
    throw InputError(where + ": field 'id' missing or not a string");
  }
  post.id = id->get<std::string>();

  if (tokenization == Tokenization::pretokenized) {
    auto toks = obj.find("tokens");
    if (toks == obj.end() || !toks->is_array()) {
      throw InputError(where + ": field 'tokens' missing or not an array");
    }
    for (const auto& t : *toks) {
      if (!t.is_string()) {
        throw InputError(where + ": field 'tokens' has a non-string element");
      }
      post.tokens.push_back(t.get<std::string>());
    }
  } else {
    auto text = obj.find("text");
    if (text == obj.end() || !text->is_string()) {
      throw InputError(where + ": field 'text' missing or not a string");
    }
    post.tokens = tokenize_whitespace(text->get<std::string>());
  }

  post.likes = json_count(obj, "likes", line);
  post.comments = json_count(obj, "comments", line);
  post.retweets = json_count(obj, "retweets", line);

  if (auto ts = obj.find("timestamp"); ts != obj.end() && !ts->is_null()) {
    if (!ts->is_string()) {
      throw InputError(where + ": field 'timestamp' is not a string");
    }
    post.timestamp = ts->get<std::string>();
  }
  return post;
}

inline std::vector<Post> parse_jsonl(std::string_view text,
                                     Tokenization tokenization) {
  std::vector<Post> posts;
  std::size_t line = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    ++line;
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(start, end - start);
    start = end + 1;
    if (row.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    posts.push_back(parse_jsonl_record(row, line, tokenization));
  }
  return posts;
}

inline std::vector<Post> parse_csv(std::string_view text,
                                   Tokenization tokenization) {
  const auto records = csv::parse(text);
  std::vector<Post> posts;
  if (records.empty()) return posts;

  const auto& header = records.front().fields;
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  std::size_t cols[5];
  const char* required[5] = {"id", "text", "likes", "comments", "retweets"};
  for (int i = 0; i < 5; ++i) {
    auto c = column(required[i]);
    if (!c) {
      throw InputError("csv line 1: header is missing column '" +
                       std::string(required[i]) + "'");
    }
    cols[i] = *c;
  }
  const auto ts_col = column("timestamp");

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw InputError(record_where(InputFormat::csv, rec.line) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(rec.fields.size()));
    }
    Post post;
    post.id = rec.fields[cols[0]];
    const auto& text = rec.fields[cols[1]];
    post.tokens = tokenization == Tokenization::whitespace
                      ? tokenize_whitespace(text)
                      : split_pretokenized(text);
    post.likes = csv_count(rec.fields[cols[2]], "likes", rec.line);
    post.comments = csv_count(rec.fields[cols[3]], "comments", rec.line);
    post.retweets = csv_count(rec.fields[cols[4]], "retweets", rec.line);
    if (ts_col && !rec.fields[*ts_col].empty()) {
      post.timestamp = rec.fields[*ts_col];
    }
    posts.push_back(std::move(post));
  }
  return posts;
}

inline void check_unique_ids(const std::vector<Post>& posts) {
  std::unordered_set<std::string_view> seen;
  for (const auto& p : posts) {
    if (!seen.insert(p.id).second) {
      throw InputError("duplicate post id '" + p.id + "'");
    }
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

}  // namespace detail

/// Parses posts from in-memory text. Records keep file order.
inline std::vector<Post> parse_posts(std::string_view text, InputFormat format,
                                     Tokenization tokenization) {
  auto posts = format == InputFormat::jsonl
                   ? detail::parse_jsonl(text, tokenization)
                   : detail::parse_csv(text, tokenization);
  detail::check_unique_ids(posts);
  return posts;
}

inline std::vector<Post> ingest(const std::string& path, InputFormat format,
                                Tokenization tokenization) {
  return parse_posts(detail::read_file(path), format, tokenization);
}

/// Occurrences of `term` in `doc` divided by the document length.
inline double term_frequency(std::string_view term, const Post& doc) {
  if (doc.tokens.empty()) {
    throw Error("term_frequency: document '" + doc.id + "' has no tokens");
  }
  std::size_t count = 0;
  for (const auto& t : doc.tokens) count += (t == term);
  return static_cast<double>(count) / static_cast<double>(doc.tokens.size());
}

/// Distinct terms across `posts` with ids in first-occurrence order.
/// n_docs counts every post, including empty ones.
inline Vocabulary build_vocabulary(const std::vector<Post>& posts) {
  std::vector<std::string> terms;
  std::vector<std::uint64_t> doc_freq;
  std::unordered_map<std::string, TermId> index;
  std::vector<std::size_t> last_seen;  // last post index counted per term

  for (std::size_t d = 0; d < posts.size(); ++d) {
    for (const auto& tok : posts[d].tokens) {
      auto [it, inserted] =
          index.try_emplace(tok, static_cast<TermId>(terms.size()));
      if (inserted) {
        terms.push_back(tok);
        doc_freq.push_back(1);
        last_seen.push_back(d);
      } else if (last_seen[it->second] != d) {
        ++doc_freq[it->second];
        last_seen[it->second] = d;
      }
    }
  }
  if (terms.empty()) {
    throw InputError("build_vocabulary: no post has any tokens");
  }
  return Vocabulary::from_parts(std::move(terms), std::move(doc_freq),
                                posts.size());
}

/// Maps tokens to ids, dropping out-of-vocabulary tokens.
inline EncodedDoc encode(const Post& post, const Vocabulary& vocab) {
  EncodedDoc doc{post.id, {}};
  doc.term_ids.reserve(post.tokens.size());
  for (const auto& tok : post.tokens) {
    if (auto id = vocab.find(tok)) doc.term_ids.push_back(*id);
  }
  return doc;
}

}  // namespace wbidf

#endif  // WBIDF_CORPUS_HPP
