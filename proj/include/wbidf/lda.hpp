#ifndef WBIDF_LDA_HPP
#define WBIDF_LDA_HPP

/*
 * Weighted LDA fitted by collapsed Gibbs sampling.
 *
 *   theta[d] ~ Dir(alpha)          document-topic proportions
 *   phi[k]   ~ Dir(beta)           topic-word distributions
 *   z[d,i]   ~ Mult(theta[d])      topic of the i-th token of d
 *   w[d,i]   ~ Mult(phi[z[d,i]])
 *
 * theta and phi are integrated out and each z is resampled from
 *
 *   p(z = k | rest) ∝ (n_dk + alpha) (n_kw + beta) / (n_k + V beta)
 *
 * with the token's own assignment removed from the counts. A document with
 * replication r is expanded into r independent virtual documents before
 * sampling. After burn-in, counts are averaged over every retained sweep
 * and phi/theta are estimated from the averages.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "wbidf/corpus.hpp"
#include "wbidf/error.hpp"
#include "wbidf/filter.hpp"
#include "wbidf/rng.hpp"

namespace wbidf {

using TopicId = std::uint32_t;

struct LdaConfig {
  std::uint32_t k = 30;
  std::optional<double> alpha;  // unset: 50 / k
  double beta = 0.01;
  std::uint32_t iterations = 1000;
  std::uint32_t burn_in = 200;
  std::uint64_t seed = 42;

  double alpha_value() const { return alpha ? *alpha : 50.0 / k; }

  void validate() const {
    if (k < 1) throw InputError("lda: k must be >= 1");
    if (!(alpha_value() > 0.0) || !std::isfinite(alpha_value())) {
      throw InputError("lda: alpha must be > 0");
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
      throw InputError("lda: beta must be > 0");
    }
    if (burn_in >= iterations) {
      throw InputError("lda: burn_in must be < iterations");
    }
  }
};

/// Topic assignments and the count matrices they induce.
///
/// Documents here are the virtual (replicated) documents. Word-topic
/// counts are stored word-major so that the sampler's inner loop over
/// topics reads contiguous memory.
struct SamplerState {
  std::uint32_t n_topics = 0;
  std::uint32_t n_terms = 0;
  std::vector<std::size_t> doc_offsets{0};  // n_docs + 1 entries
  std::vector<TermId> tokens;
  std::vector<TopicId> z;
  std::vector<std::uint32_t> n_dk;  // n_docs x n_topics
  std::vector<std::uint32_t> n_wk;  // n_terms x n_topics
  std::vector<std::uint32_t> n_k;   // n_topics

  std::size_t n_docs() const { return doc_offsets.size() - 1; }
  std::size_t doc_length(std::size_t d) const {
    return doc_offsets[d + 1] - doc_offsets[d];
  }
  std::uint32_t doc_topic(std::size_t d, TopicId k) const {
    return n_dk[d * n_topics + k];
  }
  std::uint32_t topic_word(TopicId k, TermId w) const {
    return n_wk[static_cast<std::size_t>(w) * n_topics + k];
  }

  /// Builds a state from explicit assignments, one per token in order.
  static SamplerState from_assignments(
      const std::vector<std::vector<TermId>>& docs,
      std::span<const TopicId> assignments, std::uint32_t n_topics,
      std::uint32_t n_terms) {
    SamplerState s;
    s.n_topics = n_topics;
    s.n_terms = n_terms;
    for (const auto& doc : docs) {
      s.tokens.insert(s.tokens.end(), doc.begin(), doc.end());
      s.doc_offsets.push_back(s.tokens.size());
    }
    if (assignments.size() != s.tokens.size()) {
      throw Error("from_assignments: one assignment per token required");
    }
    s.z.assign(assignments.begin(), assignments.end());
    s.n_dk.assign(s.n_docs() * n_topics, 0);
    s.n_wk.assign(static_cast<std::size_t>(n_terms) * n_topics, 0);
    s.n_k.assign(n_topics, 0);
    for (std::size_t d = 0; d < s.n_docs(); ++d) {
      for (std::size_t i = s.doc_offsets[d]; i < s.doc_offsets[d + 1]; ++i) {
        const TopicId k = s.z[i];
        const TermId w = s.tokens[i];
        if (k >= n_topics || w >= n_terms) {
          throw Error("from_assignments: topic or term id out of range");
        }
        ++s.n_dk[d * n_topics + k];
        ++s.n_wk[static_cast<std::size_t>(w) * n_topics + k];
        ++s.n_k[k];
      }
    }
    return s;
  }

  /// Count-level invariants: sum_w n_kw = n_k, sum_k n_dk = |d|,
  /// sum_k n_k = total tokens.
  void check_counts() const {
    if (n_dk.size() != n_docs() * n_topics ||
        n_wk.size() != static_cast<std::size_t>(n_terms) * n_topics ||
        n_k.size() != n_topics) {
      throw Error("sampler state: count matrix dimensions are inconsistent");
    }
    std::vector<std::uint64_t> topic_totals(n_topics, 0);
    for (std::size_t w = 0; w < n_terms; ++w) {
      for (TopicId k = 0; k < n_topics; ++k) {
        topic_totals[k] += n_wk[w * n_topics + k];
      }
    }
    std::uint64_t all = 0;
    for (TopicId k = 0; k < n_topics; ++k) {
      if (topic_totals[k] != n_k[k]) {
        throw Error("sampler state: sum_w n_kw != n_k for topic " +
                    std::to_string(k));
      }
      all += n_k[k];
    }
    if (all != tokens.size()) {
      throw Error("sampler state: sum_k n_k != total tokens");
    }
    for (std::size_t d = 0; d < n_docs(); ++d) {
      std::uint64_t row = 0;
      for (TopicId k = 0; k < n_topics; ++k) row += n_dk[d * n_topics + k];
      if (row != doc_length(d)) {
        throw Error("sampler state: sum_k n_dk != length of document " +
                    std::to_string(d));
      }
    }
  }

  /// check_counts() plus a full recount from the assignments.
  void check_invariants() const {
    check_counts();
    if (z.size() != tokens.size()) {
      throw Error("sampler state: assignment vector length mismatch");
    }
    std::vector<std::uint32_t> dk(n_dk.size(), 0);
    std::vector<std::uint32_t> wk(n_wk.size(), 0);
    std::vector<std::uint32_t> k_tot(n_topics, 0);
    for (std::size_t d = 0; d < n_docs(); ++d) {
      for (std::size_t i = doc_offsets[d]; i < doc_offsets[d + 1]; ++i) {
        if (z[i] >= n_topics) {
          throw Error("sampler state: assignment out of topic range");
        }
        ++dk[d * n_topics + z[i]];
        ++wk[static_cast<std::size_t>(tokens[i]) * n_topics + z[i]];
        ++k_tot[z[i]];
      }
    }
    if (dk != n_dk || wk != n_wk || k_tot != n_k) {
      throw Error("sampler state: counts disagree with assignments");
    }
  }
};

/// Log of the collapsed joint p(w, z | alpha, beta):
///
///   sum_d [ lnG(K a) - K lnG(a) + sum_k lnG(n_dk + a) - lnG(n_d + K a) ]
/// + sum_k [ lnG(V b) - V lnG(b) + sum_w lnG(n_kw + b) - lnG(n_k + V b) ]
inline double log_joint(const SamplerState& state, double alpha, double beta) {
  state.check_counts();
  const double K = state.n_topics;
  const double V = state.n_terms;
  double lp = 0.0;
  const double doc_norm = std::lgamma(K * alpha) - K * std::lgamma(alpha);
  for (std::size_t d = 0; d < state.n_docs(); ++d) {
    lp += doc_norm;
    for (TopicId k = 0; k < state.n_topics; ++k) {
      lp += std::lgamma(state.doc_topic(d, k) + alpha);
    }
    lp -= std::lgamma(static_cast<double>(state.doc_length(d)) + K * alpha);
  }
  const double topic_norm = std::lgamma(V * beta) - V * std::lgamma(beta);
  for (TopicId k = 0; k < state.n_topics; ++k) {
    lp += topic_norm;
    for (TermId w = 0; w < state.n_terms; ++w) {
      lp += std::lgamma(state.topic_word(k, w) + beta);
    }
    lp -= std::lgamma(static_cast<double>(state.n_k[k]) + V * beta);
  }
  return lp;
}

inline double log_joint(const SamplerState& state, const LdaConfig& config) {
  return log_joint(state, config.alpha_value(), config.beta);
}

class GibbsSampler {
 public:
  /// Samples over raw documents (no replication).
  GibbsSampler(const std::vector<std::vector<TermId>>& docs,
               std::uint32_t n_terms, const LdaConfig& config)
      : config_(config), rng_(config.seed) {
    config_.validate();
    alpha_ = config_.alpha_value();
    beta_ = config_.beta;
    for (const auto& d : docs) {
      replica_owner_.push_back(replica_owner_.size());
      state_.tokens.insert(state_.tokens.end(), d.begin(), d.end());
      state_.doc_offsets.push_back(state_.tokens.size());
    }
    initialize(n_terms);
  }

  /// Samples over a weighted corpus; each document is expanded into
  /// `replication` consecutive virtual documents.
  GibbsSampler(const WeightedCorpus& corpus, const LdaConfig& config)
      : config_(config), rng_(config.seed) {
    config_.validate();
    alpha_ = config_.alpha_value();
    beta_ = config_.beta;
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
      const auto& ids = corpus.docs[d].doc.term_ids;
      for (std::uint32_t r = 0; r < corpus.docs[d].replication; ++r) {
        replica_owner_.push_back(d);
        state_.tokens.insert(state_.tokens.end(), ids.begin(), ids.end());
        state_.doc_offsets.push_back(state_.tokens.size());
      }
    }
    initialize(static_cast<std::uint32_t>(corpus.vocab.size()));
  }

  /// One systematic-scan pass over every token.
  void sweep() {
    const std::uint32_t K = state_.n_topics;
    const double vbeta = static_cast<double>(state_.n_terms) * beta_;
    double* cdf = cdf_.data();
    double* inv = inv_denom_.data();
    std::uint32_t* nk = state_.n_k.data();

    for (std::size_t d = 0; d < state_.n_docs(); ++d) {
      std::uint32_t* ndk = state_.n_dk.data() + d * K;
      for (std::size_t i = state_.doc_offsets[d];
           i < state_.doc_offsets[d + 1]; ++i) {
        const TermId w = state_.tokens[i];
        std::uint32_t* nwk = state_.n_wk.data() + static_cast<std::size_t>(w) * K;
        TopicId k = state_.z[i];

        --ndk[k];
        --nwk[k];
        --nk[k];
        inv[k] = 1.0 / (nk[k] + vbeta);

        double total = 0.0;
        for (std::uint32_t t = 0; t < K; ++t) {
          total += (ndk[t] + alpha_) * (nwk[t] + beta_) * inv[t];
          cdf[t] = total;
        }
        const double u = rng_.uniform() * total;
        k = 0;
        while (k + 1 < K && cdf[k] <= u) ++k;

        state_.z[i] = k;
        ++ndk[k];
        ++nwk[k];
        ++nk[k];
        inv[k] = 1.0 / (nk[k] + vbeta);
      }
    }
    ++sweeps_;
  }

  const SamplerState& state() const noexcept { return state_; }
  const LdaConfig& config() const noexcept { return config_; }
  std::uint32_t sweeps_done() const noexcept { return sweeps_; }

  /// Original document index of each virtual document.
  const std::vector<std::size_t>& replica_owner() const noexcept {
    return replica_owner_;
  }

 private:
  void initialize(std::uint32_t n_terms) {
    const std::uint32_t K = config_.k;
    state_.n_topics = K;
    state_.n_terms = n_terms;
    state_.z.resize(state_.tokens.size());
    state_.n_dk.assign(state_.n_docs() * K, 0);
    state_.n_wk.assign(static_cast<std::size_t>(n_terms) * K, 0);
    state_.n_k.assign(K, 0);
    for (std::size_t d = 0; d < state_.n_docs(); ++d) {
      for (std::size_t i = state_.doc_offsets[d];
           i < state_.doc_offsets[d + 1]; ++i) {
        const TermId w = state_.tokens[i];
        if (w >= n_terms) throw Error("lda: term id outside vocabulary");
        const TopicId k = rng_.below(K);
        state_.z[i] = k;
        ++state_.n_dk[d * K + k];
        ++state_.n_wk[static_cast<std::size_t>(w) * K + k];
        ++state_.n_k[k];
      }
    }
    cdf_.assign(K, 0.0);
    inv_denom_.resize(K);
    const double vbeta = static_cast<double>(n_terms) * beta_;
    for (std::uint32_t k = 0; k < K; ++k) {
      inv_denom_[k] = 1.0 / (state_.n_k[k] + vbeta);
    }
  }

  LdaConfig config_;
  Rng rng_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  SamplerState state_;
  std::vector<std::size_t> replica_owner_;
  std::vector<double> cdf_;
  std::vector<double> inv_denom_;
  std::uint32_t sweeps_ = 0;
};

/// Fitted topic model. phi is K x V and theta is D x K, both row-major;
/// theta has one row per original (not replicated) document.
struct LdaModel {
  LdaConfig config;
  Vocabulary vocab;
  std::vector<std::string> doc_ids;
  std::vector<std::uint32_t> replication;
  std::vector<double> phi;
  std::vector<double> theta;

  std::uint32_t k() const noexcept { return config.k; }
  std::size_t v() const noexcept { return vocab.size(); }
  std::size_t n_docs() const noexcept { return doc_ids.size(); }

  std::span<const double> phi_row(TopicId topic) const {
    return {phi.data() + static_cast<std::size_t>(topic) * v(), v()};
  }
  std::span<const double> theta_row(std::size_t doc) const {
    return {theta.data() + doc * k(), k()};
  }

  friend bool operator==(const LdaModel& a, const LdaModel& b) {
    return a.config.k == b.config.k &&
           a.config.alpha_value() == b.config.alpha_value() &&
           a.config.beta == b.config.beta &&
           a.config.iterations == b.config.iterations &&
           a.config.burn_in == b.config.burn_in &&
           a.config.seed == b.config.seed && a.vocab == b.vocab &&
           a.doc_ids == b.doc_ids && a.replication == b.replication &&
           a.phi == b.phi && a.theta == b.theta;
  }
};

struct FitHooks {
  /// Called after every sweep with the 1-based sweep number.
  std::function<void(const SamplerState&, std::uint32_t)> on_sweep;
  std::function<void(const std::string&)> on_warning;
};

inline LdaModel fit(const WeightedCorpus& corpus, const LdaConfig& config,
                    const FitHooks& hooks = {}) {
  if (corpus.docs.empty()) throw Error("lda: corpus is empty");
  config.validate();

  auto warn = [&](const std::string& msg) {
    if (hooks.on_warning) {
      hooks.on_warning(msg);
    } else {
      std::clog << "warning: " << msg << '\n';
    }
  };
  {
    std::unordered_set<TermId> distinct;
    for (const auto& d : corpus.docs) {
      distinct.insert(d.doc.term_ids.begin(), d.doc.term_ids.end());
    }
    if (config.k > distinct.size()) {
      warn("k=" + std::to_string(config.k) + " exceeds the " +
           std::to_string(distinct.size()) +
           " distinct terms in the corpus; some topics will stay empty");
    }
  }

  GibbsSampler sampler(corpus, config);
  const std::uint32_t K = config.k;
  const std::size_t V = corpus.vocab.size();
  const std::size_t n_virtual = sampler.state().n_docs();

  std::vector<std::uint64_t> sum_wk(V * K, 0);
  std::vector<std::uint64_t> sum_dk(n_virtual * K, 0);
  sampler.state().check_invariants();

  for (std::uint32_t it = 1; it <= config.iterations; ++it) {
    sampler.sweep();
#ifndef NDEBUG
    sampler.state().check_invariants();
#endif
    if (it > config.burn_in) {
      const auto& s = sampler.state();
      for (std::size_t i = 0; i < sum_wk.size(); ++i) sum_wk[i] += s.n_wk[i];
      for (std::size_t i = 0; i < sum_dk.size(); ++i) sum_dk[i] += s.n_dk[i];
    }
    if (hooks.on_sweep) hooks.on_sweep(sampler.state(), it);
  }
  sampler.state().check_invariants();

  const double retained = config.iterations - config.burn_in;
  const double alpha = config.alpha_value();
  const double beta = config.beta;

  LdaModel model;
  model.config = config;
  model.config.alpha = alpha;
  model.vocab = corpus.vocab;
  for (const auto& d : corpus.docs) {
    model.doc_ids.push_back(d.doc.post_id);
    model.replication.push_back(d.replication);
  }

  model.phi.assign(static_cast<std::size_t>(K) * V, 0.0);
  for (std::uint32_t k = 0; k < K; ++k) {
    std::uint64_t topic_sum = 0;
    for (std::size_t w = 0; w < V; ++w) topic_sum += sum_wk[w * K + k];
    const double denom = topic_sum / retained + V * beta;
    for (std::size_t w = 0; w < V; ++w) {
      model.phi[k * V + w] = (sum_wk[w * K + k] / retained + beta) / denom;
    }
  }

  model.theta.assign(corpus.docs.size() * K, 0.0);
  const auto& owner = sampler.replica_owner();
  for (std::size_t r = 0; r < n_virtual; ++r) {
    const std::size_t d = owner[r];
    const double denom =
        static_cast<double>(sampler.state().doc_length(r)) + K * alpha;
    const double share = 1.0 / corpus.docs[d].replication;
    for (std::uint32_t k = 0; k < K; ++k) {
      model.theta[d * K + k] +=
          share * ((sum_dk[r * K + k] / retained + alpha) / denom);
    }
  }
  return model;
}

/// The n most probable terms of a topic; ties go to the smaller term id.
inline std::vector<std::pair<std::string, double>> top_words(
    const LdaModel& model, TopicId topic, std::size_t n) {
  if (topic >= model.k()) throw Error("top_words: topic out of range");
  const auto row = model.phi_row(topic);
  std::vector<TermId> ids(row.size());
  std::iota(ids.begin(), ids.end(), TermId{0});
  const std::size_t keep = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + keep, ids.end(),
                    [&](TermId a, TermId b) {
                      return row[a] != row[b] ? row[a] > row[b] : a < b;
                    });
  std::vector<std::pair<std::string, double>> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.emplace_back(model.vocab.term(ids[i]), row[ids[i]]);
  }
  return out;
}

/// Corpus-level topic probabilities: replication-weighted mean of theta.
inline std::vector<double> topic_weights(const LdaModel& model) {
  std::vector<double> weights(model.k(), 0.0);
  double total = 0.0;
  for (std::size_t d = 0; d < model.n_docs(); ++d) {
    const double r = model.replication[d];
    const auto row = model.theta_row(d);
    for (TopicId k = 0; k < model.k(); ++k) weights[k] += r * row[k];
    total += r;
  }
  if (total > 0) {
    for (auto& w : weights) w /= total;
  }
  return weights;
}

/// Topics by descending corpus-level probability, ties by topic id.
inline std::vector<TopicId> topic_rank(const LdaModel& model) {
  const auto weights = topic_weights(model);
  std::vector<TopicId> order(model.k());
  std::iota(order.begin(), order.end(), TopicId{0});
  std::stable_sort(order.begin(), order.end(), [&](TopicId a, TopicId b) {
    return weights[a] > weights[b];
  });
  return order;
}

}  // namespace wbidf

#endif  // WBIDF_LDA_HPP
