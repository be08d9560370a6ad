#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include "wbidf/corpus.hpp"
#include "wbidf/filter.hpp"

namespace wbidf {
namespace {

using Big = boost::multiprecision::cpp_dec_float_50;

double idf_oracle(std::uint64_t n, std::uint64_t df) {
  return static_cast<double>(log(Big(n) / (Big(1) + Big(df))) + 1);
}

double weight_oracle(std::uint64_t l, std::uint64_t c, std::uint64_t r) {
  const Big w = Big(1) + log(Big(1) + Big(l)) + 2 * log(Big(1) + Big(c)) +
                4 * log(Big(1) + Big(r));
  return static_cast<double>(w);
}

Post make_post(std::string id, std::vector<std::string> tokens,
               std::uint64_t l = 0, std::uint64_t c = 0, std::uint64_t r = 0) {
  Post p;
  p.id = std::move(id);
  p.tokens = std::move(tokens);
  p.likes = l;
  p.comments = c;
  p.retweets = r;
  return p;
}

TEST(Idf, Examples) {
  EXPECT_NEAR(idf_value(10, 4), 1.6931471805599453, 1e-15);
  EXPECT_NEAR(idf_value(10, 9), 1.0, 1e-15);
  EXPECT_NEAR(idf_value(4000, 3), std::log(1000.0) + 1.0, 1e-12);
  EXPECT_NEAR(idf_value(2, 2), 0.5945348918918356, 1e-15);
}

TEST(Idf, MatchesHighPrecisionOracle) {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t n = 1 + gen() % 1000000;
    const std::uint64_t df = 1 + gen() % n;
    const double want = idf_oracle(n, df);
    EXPECT_LE(std::abs(idf_value(n, df) - want), 1e-12 * std::abs(want))
        << n << " " << df;
  }
}

TEST(Idf, StrictlyDecreasingInDocFreq) {
  for (std::uint64_t n : {1u, 7u, 1000u}) {
    for (std::uint64_t df = 1; df < n; ++df) {
      EXPECT_GT(idf_value(n, df), idf_value(n, df + 1));
    }
  }
}

TEST(Idf, ComputeOverVocabulary) {
  const auto vocab = build_vocabulary({make_post("1", {"a", "b"}),
                                       make_post("2", {"b"}),
                                       make_post("3", {})});
  const auto table = compute_idf(vocab);
  ASSERT_EQ(table.idf.size(), 2u);
  EXPECT_DOUBLE_EQ(table.idf[0], std::log(3.0 / 2.0) + 1.0);
  EXPECT_DOUBLE_EQ(table.idf[1], std::log(1.0) + 1.0);
}

TEST(Idf, DefaultUpperThresholdKeepsDocFreqThree) {
  const std::uint64_t n = 4000;
  EXPECT_EQ(default_idf_max(n), idf_value(n, 3));
  EXPECT_LT(default_idf_max(n), idf_value(n, 2));
}

// 20 documents. "common" appears everywhere, "mid*" in 3 to 6 documents,
// "rare*" in one or two.
std::vector<Post> threshold_corpus() {
  std::vector<Post> posts;
  for (int d = 0; d < 20; ++d) {
    std::vector<std::string> t{"common"};
    if (d < 3) t.push_back("mid3");
    if (d < 6) t.push_back("mid6");
    if (d == 0) t.push_back("rare1");
    if (d < 2) t.push_back("rare2");
    posts.push_back(make_post(std::to_string(d), t));
  }
  return posts;
}

TEST(Filter, DropsCommonAndRareTerms) {
  const auto vocab = build_vocabulary(threshold_corpus());
  const auto idf = compute_idf(vocab);
  const auto kept =
      filter_vocabulary(vocab, idf, kDefaultIdfMin, default_idf_max(vocab.n_docs()));
  EXPECT_EQ(kept.terms(), (std::vector<std::string>{"mid3", "mid6"}));
  EXPECT_EQ(kept.n_docs(), 20u);
  EXPECT_EQ(kept.doc_freq(0), 3u);
  EXPECT_EQ(kept.doc_freq(1), 6u);
}

TEST(Filter, InfiniteThresholdsKeepEverything) {
  const auto vocab = build_vocabulary(threshold_corpus());
  const auto kept = filter_vocabulary(vocab, compute_idf(vocab), -INFINITY, INFINITY);
  EXPECT_EQ(kept, vocab);
}

TEST(Filter, Errors) {
  const auto vocab = build_vocabulary(threshold_corpus());
  const auto idf = compute_idf(vocab);
  EXPECT_THROW(filter_vocabulary(vocab, idf, 2.0, 2.0), InputError);
  EXPECT_THROW(filter_vocabulary(vocab, idf, 3.0, 1.0), InputError);
  EXPECT_THROW(filter_vocabulary(vocab, idf, 100.0, 200.0), Error);
}

TEST(Filter, KeptTermsAreExactlyThoseInRange) {
  std::mt19937 gen(5);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Post> posts;
    const int n = 5 + static_cast<int>(gen() % 60);
    for (int d = 0; d < n; ++d) {
      std::vector<std::string> t;
      for (int i = 0; i < 8; ++i) {
        t.push_back("w" + std::to_string(gen() % (1 + gen() % 40)));
      }
      posts.push_back(make_post(std::to_string(d), t));
    }
    const auto vocab = build_vocabulary(posts);
    const auto idf = compute_idf(vocab);
    const double lo = 0.5 + (gen() % 100) / 100.0;
    const double hi = lo + 0.2 + (gen() % 300) / 100.0;
    std::vector<std::string> expected;
    for (TermId t = 0; t < vocab.size(); ++t) {
      if (lo <= idf.idf[t] && idf.idf[t] <= hi) expected.push_back(vocab.term(t));
    }
    if (expected.empty()) {
      EXPECT_THROW(filter_vocabulary(vocab, idf, lo, hi), Error);
      continue;
    }
    const auto kept = filter_vocabulary(vocab, idf, lo, hi);
    EXPECT_EQ(kept.terms(), expected);
    for (TermId t = 0; t < kept.size(); ++t) {
      EXPECT_EQ(kept.doc_freq(t), vocab.doc_freq(*vocab.find(kept.term(t))));
    }
  }
}

TEST(Popularity, SumsCounts) {
  EXPECT_EQ(popularity(make_post("a", {}, 10, 5, 2)), 17u);
  EXPECT_EQ(popularity(make_post("a", {})), 0u);
}

TEST(Select, TiesKeepInputOrder) {
  const std::vector<Post> posts{make_post("a", {}, 5), make_post("b", {}, 9),
                                make_post("c", {}, 0, 9), make_post("d", {}, 1)};
  const auto top = select_top_popular(posts, 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].id, "b");
  EXPECT_EQ(top[1].id, "c");
  EXPECT_EQ(select_top_popular(posts, 10).size(), 4u);
  EXPECT_THROW(select_top_popular(posts, 0), InputError);
}

TEST(Select, MatchesStableSortOnRandomInputs) {
  std::mt19937 gen(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Post> posts;
    const int n = 1 + static_cast<int>(gen() % 50);
    for (int i = 0; i < n; ++i) {
      posts.push_back(make_post(std::to_string(i), {}, gen() % 5, gen() % 3, gen() % 2));
    }
    std::vector<Post> sorted = posts;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Post& a, const Post& b) {
      return popularity(a) > popularity(b);
    });
    const std::size_t k = 1 + gen() % (n + 3);
    sorted.resize(std::min<std::size_t>(k, sorted.size()));
    EXPECT_EQ(select_top_popular(posts, k), sorted);
  }
}

TEST(Weight, Examples) {
  EXPECT_NEAR(compute_weight(make_post("a", {}, 10, 5, 2)), 11.37586336592692, 1e-13);
  EXPECT_EQ(compute_weight(make_post("a", {})), 1.0);
  EXPECT_NEAR(compute_weight(make_post("a", {}, 0, 0, 1)), 3.772588722239781, 1e-15);
  EXPECT_EQ(replication_count(11.37585), 11u);
  EXPECT_EQ(replication_count(1.0), 1u);
  EXPECT_EQ(replication_count(2.5), 3u);
  EXPECT_EQ(replication_count(2.4999), 2u);
  EXPECT_EQ(replication_count(0.2), 1u);
}

TEST(Weight, MatchesHighPrecisionOracle) {
  std::mt19937_64 gen(21);
  for (int i = 0; i < 500; ++i) {
    const int scale = static_cast<int>(gen() % 4);
    const std::uint64_t mod = scale == 0 ? 10 : scale == 1 ? 1000 : scale == 2 ? 1000000 : (1ull << 40);
    const auto l = gen() % mod, c = gen() % mod, r = gen() % mod;
    const double want = weight_oracle(l, c, r);
    EXPECT_LE(std::abs(compute_weight(make_post("x", {}, l, c, r)) - want),
              1e-12 * want);
  }
}

TEST(Weight, MonotoneWithRetweetsWeighedMost) {
  std::mt19937 gen(4);
  for (int i = 0; i < 200; ++i) {
    const auto l = gen() % 100, c = gen() % 100, r = gen() % 100;
    const double base = compute_weight(make_post("x", {}, l, c, r));
    EXPECT_GE(base, 1.0);
    const double more_l = compute_weight(make_post("x", {}, l + 1, c, r));
    const double more_c = compute_weight(make_post("x", {}, l, c + 1, r));
    const double more_r = compute_weight(make_post("x", {}, l, c, r + 1));
    EXPECT_GT(more_l, base);
    EXPECT_GT(more_c, base);
    EXPECT_GT(more_r, base);
    // At equal counts one more retweet outweighs one more comment, which
    // outweighs one more like.
    const double same = compute_weight(make_post("x", {}, l, l, l));
    EXPECT_GT(compute_weight(make_post("x", {}, l, l, l + 1)) - same,
              compute_weight(make_post("x", {}, l, l + 1, l)) - same);
    EXPECT_GT(compute_weight(make_post("x", {}, l, l + 1, l)) - same,
              compute_weight(make_post("x", {}, l + 1, l, l)) - same);
  }
}

TEST(WeightedCorpus, ReplicationFollowsWeight) {
  const std::vector<Post> posts{make_post("a", {"x", "y"}, 10, 5, 2),
                                make_post("b", {"z"}),
                                make_post("c", {"unknown"}, 100, 100, 100)};
  const auto vocab = build_vocabulary({make_post("v", {"x", "y", "z"})});
  const auto wc = build_weighted_corpus(posts, vocab, true);
  ASSERT_EQ(wc.docs.size(), 2u);  // "c" encodes to nothing
  EXPECT_EQ(wc.docs[0].replication, 11u);
  EXPECT_EQ(wc.docs[0].popularity, 17u);
  EXPECT_EQ(wc.docs[1].replication, 1u);
  EXPECT_EQ(wc.total_replicas(), 12u);
  EXPECT_EQ(wc.total_tokens(), 23u);

  const auto flat = build_weighted_corpus(posts, vocab, false);
  for (const auto& d : flat.docs) EXPECT_EQ(d.replication, 1u);
  EXPECT_EQ(flat.total_tokens(), 3u);

  EXPECT_THROW(build_weighted_corpus({make_post("c", {"q"})}, vocab, true), Error);
}

}  // namespace
}  // namespace wbidf
