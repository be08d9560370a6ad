#ifndef WBIDF_SYNTHETIC_HPP
#define WBIDF_SYNTHETIC_HPP

// Planted-topic corpus generator with ground-truth keyword labels.
//
// Every topic owns `vocab_per_topic` signature terms ("k<topic>w<j>").
// A document is drawn from one topic and is either an event post or, with
// probability `chatter_share`, a chatter post. Each token is noise with a
// per-document probability: event posts use noise_ratio / 3 and chatter
// posts the rate that brings the corpus mean back to noise_ratio (capped
// at 0.95). Noise tokens are shared noise terms ("n<j>", Zipf distributed,
// so the first few behave like stopwords) or one-off rare terms
// ("r<doc>x<i>"). Engagement grows with the realized on-topic purity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wbidf/corpus.hpp"
#include "wbidf/error.hpp"
#include "wbidf/eval.hpp"
#include "wbidf/rng.hpp"

namespace wbidf {

/// Expected engagement of a document with purity p (fraction of on-topic
/// tokens) is scale * p^purity_exponent for each count.
struct EngagementModel {
  double likes_scale = 20.0;
  double comments_scale = 6.0;
  double retweets_scale = 3.0;
  double purity_exponent = 4.0;
};

struct SyntheticSpec {
  std::uint32_t n_topics = 10;
  std::uint32_t vocab_per_topic = 8;
  std::uint32_t docs = 2000;
  std::uint32_t doc_len = 20;
  double noise_ratio = 0.3;
  std::uint32_t noise_vocab = 100;
  double noise_zipf_exponent = 1.5;
  double rare_share = 0.1;  // fraction of noise tokens that are one-off terms
  double chatter_share = 1.0 / 3.0;
  EngagementModel popularity_model;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_topics < 1 || vocab_per_topic < 1 || docs < 1 || doc_len < 1) {
      throw InputError("synthetic: counts must be >= 1");
    }
    if (!(noise_ratio >= 0.0 && noise_ratio < 1.0)) {
      throw InputError("synthetic: noise_ratio must be in [0, 1)");
    }
    if (noise_ratio > 0.0 && noise_vocab < 1 && rare_share < 1.0) {
      throw InputError("synthetic: noise requires noise_vocab >= 1");
    }
    if (!(chatter_share > 0.0 && chatter_share <= 1.0)) {
      throw InputError("synthetic: chatter_share must be in (0, 1]");
    }
    if (!(rare_share >= 0.0 && rare_share <= 1.0)) {
      throw InputError("synthetic: rare_share must be in [0, 1]");
    }
  }
};

struct SyntheticCorpus {
  std::vector<Post> posts;
  LabelSet labels;
  std::vector<std::uint32_t> topic_of;               // per post
  std::vector<std::vector<std::string>> signatures;  // per topic
};

namespace detail {

/// Knuth's multiplication method, split into chunks of mean <= 16.
inline std::uint64_t poisson(Rng& rng, double mean) {
  std::uint64_t total = 0;
  while (mean > 0.0) {
    const double chunk = std::min(mean, 16.0);
    mean -= chunk;
    const double limit = std::exp(-chunk);
    double prod = rng.uniform();
    while (prod > limit) {
      ++total;
      prod *= rng.uniform();
    }
  }
  return total;
}

inline std::uint32_t sample_cdf(Rng& rng, const std::vector<double>& cdf) {
  const double u = rng.uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<std::uint32_t>(
      std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
}

}  // namespace detail

inline std::string signature_term(std::uint32_t topic, std::uint32_t j) {
  return "k" + std::to_string(topic) + "w" + std::to_string(j);
}

inline SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticCorpus out;

  out.signatures.resize(spec.n_topics);
  for (std::uint32_t t = 0; t < spec.n_topics; ++t) {
    for (std::uint32_t j = 0; j < spec.vocab_per_topic; ++j) {
      out.signatures[t].push_back(signature_term(t, j));
    }
  }
  std::vector<double> noise_cdf;
  double acc = 0.0;
  for (std::uint32_t j = 0; j < spec.noise_vocab; ++j) {
    acc += 1.0 / std::pow(j + 1.0, spec.noise_zipf_exponent);
    noise_cdf.push_back(acc);
  }

  const double event_noise = spec.noise_ratio / 3.0;
  const double chatter_noise = std::min(
      0.95, (spec.noise_ratio - (1.0 - spec.chatter_share) * event_noise) /
                spec.chatter_share);
  const auto& eng = spec.popularity_model;

  for (std::uint32_t d = 0; d < spec.docs; ++d) {
    const std::uint32_t topic = rng.below(spec.n_topics);
    const double noise_p =
        rng.uniform() < spec.chatter_share ? chatter_noise : event_noise;

    Post post;
    post.id = "s" + std::to_string(d);
    std::uint32_t on_topic = 0;
    for (std::uint32_t i = 0; i < spec.doc_len; ++i) {
      const bool noise = spec.noise_ratio > 0.0 && rng.uniform() < noise_p;
      if (!noise) {
        post.tokens.push_back(
            out.signatures[topic][rng.below(spec.vocab_per_topic)]);
        ++on_topic;
      } else if (noise_cdf.empty() || rng.uniform() < spec.rare_share) {
        post.tokens.push_back("r" + std::to_string(d) + "x" +
                              std::to_string(i));
      } else {
        post.tokens.push_back("n" +
                              std::to_string(detail::sample_cdf(rng, noise_cdf)));
      }
    }

    const double purity =
        static_cast<double>(on_topic) / static_cast<double>(spec.doc_len);
    const double s = std::pow(purity, eng.purity_exponent);
    post.likes = detail::poisson(rng, eng.likes_scale * s);
    post.comments = detail::poisson(rng, eng.comments_scale * s);
    post.retweets = detail::poisson(rng, eng.retweets_scale * s);

    out.labels.add(post.id, KeywordSet(out.signatures[topic].begin(),
                                       out.signatures[topic].end()));
    out.topic_of.push_back(topic);
    out.posts.push_back(std::move(post));
  }
  return out;
}

/// Writes posts.jsonl (pretokenized) and labels.jsonl into `dir`.
inline void save_synthetic(const SyntheticCorpus& corpus,
                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream posts(dir / "posts.jsonl", std::ios::binary);
  for (const auto& p : corpus.posts) {
    posts << nlohmann::json{{"id", p.id},
                            {"tokens", p.tokens},
                            {"likes", p.likes},
                            {"comments", p.comments},
                            {"retweets", p.retweets}}
                 .dump()
          << '\n';
  }
  std::ofstream labels(dir / "labels.jsonl", std::ios::binary);
  for (const auto& [id, kws] : corpus.labels.labels) {
    labels << nlohmann::json{{"id", id}, {"keywords", kws}}.dump() << '\n';
  }
  posts.close();
  labels.close();
  if (!posts || !labels) {
    throw Error("failed writing synthetic corpus to " + dir.string());
  }
}

}  // namespace wbidf

#endif  // WBIDF_SYNTHETIC_HPP
