#ifndef WBIDF_FILTER_HPP
#define WBIDF_FILTER_HPP

// IDF vocabulary filtering, popularity selection, and engagement weights.
//
// All logarithms are natural logarithms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "wbidf/corpus.hpp"
#include "wbidf/error.hpp"

namespace wbidf {

struct IdfTable {
  std::vector<double> idf;  // indexed by TermId
  std::optional<double> idf_min_threshold;
  std::optional<double> idf_max_threshold;
};

/// ln(N / (1 + df)) + 1
inline double idf_value(std::uint64_t n_docs, std::uint64_t doc_freq) {
  return std::log(static_cast<double>(n_docs) /
                  (1.0 + static_cast<double>(doc_freq))) +
         1.0;
}

inline IdfTable compute_idf(const Vocabulary& vocab) {
  if (vocab.empty()) throw Error("compute_idf: empty vocabulary");
  IdfTable table;
  table.idf.reserve(vocab.size());
  for (auto df : vocab.doc_freqs()) {
    table.idf.push_back(idf_value(vocab.n_docs(), df));
  }
  return table;
}

/// Terms with idf below this appear in (nearly) every document.
inline constexpr double kDefaultIdfMin = 1.0;

/// Default upper threshold: the idf of a term with doc_freq 3, so terms
/// seen in fewer than three documents are dropped.
inline double default_idf_max(std::uint64_t n_docs) {
  return idf_value(n_docs, 3);
}

/// Keeps terms with idf_min <= idf <= idf_max. Surviving terms get dense
/// ids in their original relative order; doc_freq and n_docs carry over.
inline Vocabulary filter_vocabulary(const Vocabulary& vocab,
                                    const IdfTable& idf, double idf_min,
                                    double idf_max) {
  if (!(idf_min < idf_max)) {
    throw InputError("filter_vocabulary: idf_min must be < idf_max");
  }
  if (idf.idf.size() != vocab.size()) {
    throw Error("filter_vocabulary: idf table does not match vocabulary");
  }
  std::vector<std::string> terms;
  std::vector<std::uint64_t> doc_freq;
  for (TermId t = 0; t < vocab.size(); ++t) {
    const double v = idf.idf[t];
    if (idf_min <= v && v <= idf_max) {
      terms.push_back(vocab.term(t));
      doc_freq.push_back(vocab.doc_freq(t));
    }
  }
  if (terms.empty()) throw Error("empty vocabulary after IDF filter");
  return Vocabulary::from_parts(std::move(terms), std::move(doc_freq),
                                vocab.n_docs());
}

inline std::uint64_t popularity(const Post& post) {
  return post.likes + post.comments + post.retweets;
}

/// The k most popular posts, most popular first. Ties keep input order.
inline std::vector<Post> select_top_popular(const std::vector<Post>& posts,
                                            std::size_t k) {
  if (k == 0) throw InputError("select_top_popular: k must be >= 1");
  std::vector<std::size_t> order(posts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t keep = std::min(k, posts.size());
  auto more_popular = [&](std::size_t a, std::size_t b) {
    const auto pa = popularity(posts[a]);
    const auto pb = popularity(posts[b]);
    return pa != pb ? pa > pb : a < b;
  };
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    more_popular);
  std::vector<Post> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(posts[order[i]]);
  return out;
}

/// 1 + ln(1 + likes) + 2 ln(1 + comments) + 4 ln(1 + retweets)
inline double compute_weight(const Post& post) {
  return 1.0 + std::log1p(static_cast<double>(post.likes)) +
         2.0 * std::log1p(static_cast<double>(post.comments)) +
         4.0 * std::log1p(static_cast<double>(post.retweets));
}

/// Round-half-up of a weight, never below 1.
inline std::uint32_t replication_count(double weight) {
  const double r = std::floor(weight + 0.5);
  return r < 1.0 ? 1u : static_cast<std::uint32_t>(r);
}

struct WeightedDoc {
  EncodedDoc doc;
  std::uint64_t popularity = 0;
  double raw_weight = 1.0;
  std::uint32_t replication = 1;
};

struct WeightedCorpus {
  std::vector<WeightedDoc> docs;
  Vocabulary vocab;
  bool weighting_enabled = false;

  std::uint64_t total_replicas() const {
    std::uint64_t n = 0;
    for (const auto& d : docs) n += d.replication;
    return n;
  }

  /// Tokens after replication.
  std::uint64_t total_tokens() const {
    std::uint64_t n = 0;
    for (const auto& d : docs) {
      n += static_cast<std::uint64_t>(d.replication) * d.doc.term_ids.size();
    }
    return n;
  }
};

/// Encodes posts against `vocab`, drops those left empty, and attaches a
/// replication count (1 when weighting is disabled).
inline WeightedCorpus build_weighted_corpus(const std::vector<Post>& posts,
                                            const Vocabulary& vocab,
                                            bool weighting_enabled) {
  WeightedCorpus corpus;
  corpus.vocab = vocab;
  corpus.weighting_enabled = weighting_enabled;
  for (const auto& post : posts) {
    EncodedDoc enc = encode(post, vocab);
    if (enc.term_ids.empty()) continue;
    WeightedDoc wd;
    wd.doc = std::move(enc);
    wd.popularity = popularity(post);
    wd.raw_weight = compute_weight(post);
    wd.replication = weighting_enabled ? replication_count(wd.raw_weight) : 1;
    corpus.docs.push_back(std::move(wd));
  }
  if (corpus.docs.empty()) {
    throw Error("build_weighted_corpus: no document survives encoding");
  }
  return corpus;
}

}  // namespace wbidf

#endif  // WBIDF_FILTER_HPP
