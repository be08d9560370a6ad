#ifndef WBIDF_PIPELINE_HPP
#define WBIDF_PIPELINE_HPP

// End-to-end keyword detection runs:
//
//   ingest -> IDF filter (full corpus) -> top-k popularity selection
//          -> engagement weighting -> LDA fit -> keyword extraction -> score
//
// plus the three-variant comparison (LDA / IDF-LDA / WBIDF-LDA) and the
// topic-count sweep. Every output is a deterministic function of the
// configuration, including the seed.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wbidf/corpus.hpp"
#include "wbidf/error.hpp"
#include "wbidf/eval.hpp"
#include "wbidf/filter.hpp"
#include "wbidf/lda.hpp"
#include "wbidf/model_io.hpp"
#include "wbidf/rng.hpp"
#include "wbidf/table.hpp"

namespace wbidf {

struct PipelineConfig {
  std::string input;
  InputFormat format = InputFormat::jsonl;
  Tokenization tokenization = Tokenization::whitespace;
  bool idf_filter = true;
  std::optional<double> idf_min;  // unset: kDefaultIdfMin
  std::optional<double> idf_max;  // unset: default_idf_max(N)
  std::size_t top_k_posts = 4000;
  bool weighting_enabled = true;
  LdaConfig lda;
  std::size_t n_per_topic = 10;
  std::optional<std::size_t> topics_used;  // unset: all topics
  std::string labels;
  std::string output_dir = "wbidf-out";
};

/// Keys accepted by apply_setting, in documentation order.
inline const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = {
      "input",        "format",      "tokenization", "idf_filter",
      "idf_min",      "idf_max",     "top_k_posts",  "weighting_enabled",
      "k",            "alpha",       "beta",         "iterations",
      "burn_in",      "seed",        "n_per_topic",  "topics_used",
      "labels",       "output_dir"};
  return keys;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InputError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end) {
    throw InputError("config: '" + key + "' expects a non-negative integer, got '" +
                     v + "'");
  }
  return out;
}

inline std::uint32_t parse_u32(const std::string& key, const std::string& v) {
  const auto x = parse_uint(key, v);
  if (x > std::numeric_limits<std::uint32_t>::max()) {
    throw InputError("config: '" + key + "' is too large");
  }
  return static_cast<std::uint32_t>(x);
}

inline double parse_real(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  if (v == "-inf") return -std::numeric_limits<double>::infinity();
  double out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end || std::isnan(out)) {
    throw InputError("config: '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

inline nlohmann::json real_to_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

}  // namespace detail

inline void apply_setting(PipelineConfig& c, const std::string& key,
                          const std::string& raw) {
  using namespace detail;
  const std::string v = trim(raw);
  if (key == "input") {
    c.input = v;
  } else if (key == "format") {
    if (v == "jsonl") c.format = InputFormat::jsonl;
    else if (v == "csv") c.format = InputFormat::csv;
    else throw InputError("config: format must be jsonl or csv");
  } else if (key == "tokenization") {
    if (v == "whitespace") c.tokenization = Tokenization::whitespace;
    else if (v == "pretokenized") c.tokenization = Tokenization::pretokenized;
    else throw InputError("config: tokenization must be whitespace or pretokenized");
  } else if (key == "idf_filter") {
    c.idf_filter = parse_bool(key, v);
  } else if (key == "idf_min") {
    c.idf_min = parse_real(key, v);
  } else if (key == "idf_max") {
    c.idf_max = parse_real(key, v);
  } else if (key == "top_k_posts") {
    c.top_k_posts = parse_uint(key, v);
    if (c.top_k_posts == 0) throw InputError("config: top_k_posts must be >= 1");
  } else if (key == "weighting_enabled") {
    c.weighting_enabled = parse_bool(key, v);
  } else if (key == "k") {
    c.lda.k = parse_u32(key, v);
  } else if (key == "alpha") {
    c.lda.alpha = parse_real(key, v);
  } else if (key == "beta") {
    c.lda.beta = parse_real(key, v);
  } else if (key == "iterations") {
    c.lda.iterations = parse_u32(key, v);
  } else if (key == "burn_in") {
    c.lda.burn_in = parse_u32(key, v);
  } else if (key == "seed") {
    c.lda.seed = parse_uint(key, v);
  } else if (key == "n_per_topic") {
    c.n_per_topic = parse_uint(key, v);
  } else if (key == "topics_used") {
    if (v == "all") c.topics_used.reset();
    else c.topics_used = parse_uint(key, v);
  } else if (key == "labels") {
    c.labels = v;
  } else if (key == "output_dir") {
    c.output_dir = v;
  } else {
    throw InputError("config: unknown key '" + key + "'");
  }
}

/// Flat "key = value" text; '#' starts a comment line.
inline std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    ++line;
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string row = detail::trim(text.substr(start, end - start));
    start = end + 1;
    if (row.empty() || row[0] == '#') continue;
    const auto eq = row.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(line) +
                       ": expected 'key = value'");
    }
    out[detail::trim(std::string_view(row).substr(0, eq))] =
        detail::trim(std::string_view(row).substr(eq + 1));
  }
  return out;
}

inline void apply_config_file(PipelineConfig& c, const std::string& path) {
  for (const auto& [k, v] : parse_config_text(detail::read_file(path))) {
    apply_setting(c, k, v);
  }
}

/// Every setting except output_dir, so that manifests do not depend on
/// where they are written.
inline nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["input"] = c.input;
  j["format"] = c.format == InputFormat::jsonl ? "jsonl" : "csv";
  j["tokenization"] =
      c.tokenization == Tokenization::whitespace ? "whitespace" : "pretokenized";
  j["idf_filter"] = c.idf_filter;
  j["idf_min"] = c.idf_min ? detail::real_to_json(*c.idf_min) : nlohmann::json();
  j["idf_max"] = c.idf_max ? detail::real_to_json(*c.idf_max) : nlohmann::json();
  j["top_k_posts"] = c.top_k_posts;
  j["weighting_enabled"] = c.weighting_enabled;
  j["k"] = c.lda.k;
  j["alpha"] = c.lda.alpha_value();
  j["beta"] = c.lda.beta;
  j["iterations"] = c.lda.iterations;
  j["burn_in"] = c.lda.burn_in;
  j["seed"] = c.lda.seed;
  j["n_per_topic"] = c.n_per_topic;
  j["topics_used"] = c.topics_used ? nlohmann::json(*c.topics_used)
                                   : nlohmann::json("all");
  j["labels"] = c.labels;
  return j;
}

/// Name of the method a configuration realizes.
inline std::string variant_name(const PipelineConfig& c) {
  if (c.idf_filter) return c.weighting_enabled ? "WBIDF-LDA" : "IDF-LDA";
  return c.weighting_enabled ? "WB-LDA" : "LDA";
}

/// Runs `fn`, re-throwing failures as a StageError tagged with `stage`.
template <class Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const InputError& e) {
    throw StageError(stage, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), false);
  }
}

struct CorpusStats {
  std::uint64_t n_posts = 0;        // N before filtering
  std::uint64_t n_empty_posts = 0;
  std::uint64_t n_selected = 0;     // after top-k popularity selection
  std::uint64_t n_docs = 0;         // N after filtering (non-empty encodings)
  std::uint64_t vocab_before = 0;
  std::uint64_t vocab_after = 0;
  double idf_min = 0.0;
  double idf_max = 0.0;
  std::uint64_t total_replicas = 0;
  std::uint64_t total_tokens = 0;   // after replication

  nlohmann::json to_json() const {
    return {{"n_posts", n_posts},
            {"n_empty_posts", n_empty_posts},
            {"n_selected", n_selected},
            {"n_docs", n_docs},
            {"vocab_before", vocab_before},
            {"vocab_after", vocab_after},
            {"idf_min", detail::real_to_json(idf_min)},
            {"idf_max", detail::real_to_json(idf_max)},
            {"total_replicas", total_replicas},
            {"total_tokens", total_tokens}};
  }
};

struct PreparedCorpus {
  WeightedCorpus corpus;
  CorpusStats stats;
};

inline std::vector<Post> load_posts(const PipelineConfig& c) {
  return run_stage("ingest", [&] {
    if (c.input.empty()) throw InputError("no input file configured");
    return ingest(c.input, c.format, c.tokenization);
  });
}

/// Vocabulary and IDF filtering over all posts, then popularity selection
/// and weighting.
inline PreparedCorpus prepare_corpus(const std::vector<Post>& posts,
                                     const PipelineConfig& c) {
  PreparedCorpus out;
  auto& st = out.stats;
  st.n_posts = posts.size();
  for (const auto& p : posts) st.n_empty_posts += p.tokens.empty();

  const Vocabulary full = run_stage("vocabulary", [&] {
    return build_vocabulary(posts);
  });
  st.vocab_before = full.size();

  const Vocabulary filtered = run_stage("idf-filter", [&] {
    const double inf = std::numeric_limits<double>::infinity();
    st.idf_min = c.idf_filter ? c.idf_min.value_or(kDefaultIdfMin) : -inf;
    st.idf_max = c.idf_filter ? c.idf_max.value_or(default_idf_max(full.n_docs()))
                              : inf;
    return filter_vocabulary(full, compute_idf(full), st.idf_min, st.idf_max);
  });
  st.vocab_after = filtered.size();

  const auto selected = run_stage("select", [&] {
    return select_top_popular(posts, c.top_k_posts);
  });
  st.n_selected = selected.size();

  out.corpus = run_stage("weight", [&] {
    return build_weighted_corpus(selected, filtered, c.weighting_enabled);
  });
  st.n_docs = out.corpus.docs.size();
  st.total_replicas = out.corpus.total_replicas();
  st.total_tokens = out.corpus.total_tokens();
  return out;
}

struct RunResult {
  std::string model_name;
  CorpusStats stats;
  LdaModel model;
  std::optional<EvalReport> report;
  std::vector<std::string> warnings;
};

/// Runs every stage in memory. `labels` may be null.
inline RunResult execute_run(const std::vector<Post>& posts,
                             const PipelineConfig& c, const LabelSet* labels) {
  RunResult r;
  r.model_name = variant_name(c);
  auto prepared = prepare_corpus(posts, c);
  r.stats = prepared.stats;
  r.model = run_stage("fit", [&] {
    FitHooks hooks;
    hooks.on_warning = [&](const std::string& w) { r.warnings.push_back(w); };
    return fit(prepared.corpus, c.lda, hooks);
  });
  if (labels) {
    r.report = run_stage("score", [&] {
      const auto detected = detected_keywords(
          r.model, TopicSelection{c.topics_used}, c.n_per_topic);
      return score(detected, *labels, r.model_name);
    });
  }
  return r;
}

inline std::string render_topic_table(const LdaModel& model,
                                      std::size_t n_per_topic) {
  const auto weights = topic_weights(model);
  std::vector<std::string> header = {"Topic", "Id", "Weight"};
  for (std::size_t i = 1; i <= std::min(n_per_topic, model.v()); ++i) {
    header.push_back("#" + std::to_string(i));
  }
  std::vector<std::vector<std::string>> rows;
  std::size_t rank = 0;
  for (TopicId k : topic_rank(model)) {
    char w[32];
    std::snprintf(w, sizeof w, "%.4f", weights[k]);
    std::vector<std::string> row = {std::to_string(++rank), std::to_string(k), w};
    for (auto& [term, p] : top_words(model, k, n_per_topic)) row.push_back(term);
    rows.push_back(std::move(row));
  }
  return render_grid("Topic number K = " + std::to_string(model.k()), header,
                     rows);
}

inline nlohmann::json topic_table_json(const LdaModel& model,
                                       std::size_t n_per_topic) {
  const auto weights = topic_weights(model);
  nlohmann::json topics = nlohmann::json::array();
  std::size_t rank = 0;
  for (TopicId k : topic_rank(model)) {
    nlohmann::json words = nlohmann::json::array();
    for (const auto& [term, p] : top_words(model, k, n_per_topic)) {
      words.push_back({{"term", term}, {"p", p}});
    }
    topics.push_back(
        {{"rank", ++rank}, {"topic", k}, {"weight", weights[k]}, {"words", words}});
  }
  return {{"k", model.k()}, {"n_per_topic", n_per_topic}, {"topics", topics}};
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << s;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline void write_json(const std::filesystem::path& path,
                       const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline std::string render_report(const EvalReport& r) {
  std::string s = render_comparison(compare_models({r}));
  s += "detected " + std::to_string(r.detected.size()) + ", labeled " +
       std::to_string(r.labeled.size()) + ", hits " +
       std::to_string(r.hits.size()) + "\n";
  return s;
}

}  // namespace detail

inline nlohmann::json run_manifest(const PipelineConfig& c, const RunResult& r) {
  return {{"tool", "wbidf"},
          {"variant", r.model_name},
          {"config", config_to_json(c)},
          {"seed", c.lda.seed},
          {"rng", Rng::kAlgorithm},
          {"pipeline_order", {"idf-filter(full corpus)", "top-k popularity",
                              "weighting", "fit"}},
          {"stats", r.stats.to_json()},
          {"warnings", r.warnings}};
}

inline void write_run(const RunResult& r, const PipelineConfig& c,
                      const std::filesystem::path& dir) {
  run_stage("write", [&] {
    std::filesystem::create_directories(dir);
    save_model(r.model, (dir / kModelFileName).string());
    detail::write_text(dir / "topics.txt", render_topic_table(r.model, c.n_per_topic));
    detail::write_json(dir / "topics.json", topic_table_json(r.model, c.n_per_topic));
    if (r.report) {
      detail::write_text(dir / "report.txt", detail::render_report(*r.report));
      detail::write_json(dir / "report.json", report_to_json(*r.report));
    }
    detail::write_json(dir / "manifest.json", run_manifest(c, r));
    return 0;
  });
}

inline std::optional<LabelSet> load_labels_if_any(const PipelineConfig& c) {
  if (c.labels.empty()) return std::nullopt;
  return run_stage("labels", [&] { return load_labels(c.labels, c.tokenization); });
}

/// Full pipeline; writes manifest, model, topic table and (with labels)
/// the evaluation report into c.output_dir.
inline RunResult run_pipeline(const PipelineConfig& c) {
  run_stage("config", [&] { c.lda.validate(); return 0; });
  const auto labels = load_labels_if_any(c);
  const auto posts = load_posts(c);
  auto r = execute_run(posts, c, labels ? &*labels : nullptr);
  write_run(r, c, c.output_dir);
  return r;
}

/// The three compared methods, all on the same top-k subset and seed.
inline std::vector<std::pair<std::string, PipelineConfig>> comparison_variants(
    const PipelineConfig& c) {
  PipelineConfig lda = c;
  lda.idf_filter = false;
  lda.weighting_enabled = false;
  PipelineConfig idf = c;
  idf.idf_filter = true;
  idf.weighting_enabled = false;
  PipelineConfig wb = c;
  wb.idf_filter = true;
  wb.weighting_enabled = true;
  return {{"lda", lda}, {"idf-lda", idf}, {"wbidf-lda", wb}};
}

struct ComparisonResult {
  std::vector<RunResult> runs;  // LDA, IDF-LDA, WBIDF-LDA
  ComparisonTable table;
};

/// Runs the three variants concurrently on already-loaded posts.
inline ComparisonResult execute_comparison(const std::vector<Post>& posts,
                                           const PipelineConfig& c,
                                           const LabelSet& labels) {
  const auto variants = comparison_variants(c);
  std::vector<std::future<RunResult>> futures;
  for (const auto& variant : variants) {
    const PipelineConfig& vc = variant.second;
    futures.push_back(std::async(std::launch::async, [&posts, &labels, &vc] {
      return execute_run(posts, vc, &labels);
    }));
  }
  ComparisonResult out;
  std::vector<EvalReport> reports;
  for (auto& f : futures) {
    out.runs.push_back(f.get());
    reports.push_back(*out.runs.back().report);
  }
  out.table = compare_models(reports);
  return out;
}

inline ComparisonResult run_comparison(const PipelineConfig& c) {
  run_stage("config", [&] {
    c.lda.validate();
    if (c.labels.empty()) throw InputError("compare requires a labels file");
    return 0;
  });
  const auto labels = load_labels_if_any(c);
  const auto posts = load_posts(c);
  auto result = execute_comparison(posts, c, *labels);

  const auto variants = comparison_variants(c);
  const std::filesystem::path root = c.output_dir;
  nlohmann::json per_variant = nlohmann::json::object();
  for (std::size_t i = 0; i < variants.size(); ++i) {
    write_run(result.runs[i], variants[i].second, root / variants[i].first);
    per_variant[result.runs[i].model_name] = result.runs[i].stats.to_json();
  }
  run_stage("write", [&] {
    detail::write_text(root / "report.txt", render_comparison(result.table));
    detail::write_json(root / "report.json", comparison_to_json(result.table));
    detail::write_json(root / "manifest.json",
                       {{"tool", "wbidf"},
                        {"command", "compare"},
                        {"config", config_to_json(c)},
                        {"seed", c.lda.seed},
                        {"rng", Rng::kAlgorithm},
                        {"baseline_corpus", "top_k_posts subset, no IDF filter"},
                        {"variants", per_variant}});
    return 0;
  });
  return result;
}

struct SweepResult {
  std::vector<std::uint32_t> k_values;  // deduplicated, first-seen order
  std::vector<LdaModel> models;
  std::vector<std::string> warnings;
};

/// One fit per topic count on a shared corpus and seed. When alpha is not
/// configured it follows each K (50 / K).
inline SweepResult run_topic_sweep(const PipelineConfig& c,
                                   const std::vector<std::uint32_t>& k_values) {
  SweepResult out;
  run_stage("config", [&] {
    if (k_values.empty()) throw InputError("sweep needs at least one K value");
    for (auto k : k_values) {
      if (std::find(out.k_values.begin(), out.k_values.end(), k) !=
          out.k_values.end()) {
        out.warnings.push_back("duplicate K=" + std::to_string(k) + " ignored");
        continue;
      }
      out.k_values.push_back(k);
      LdaConfig lc = c.lda;
      lc.k = k;
      lc.validate();
    }
    return 0;
  });
  const auto posts = load_posts(c);
  const auto prepared = prepare_corpus(posts, c);
  const std::filesystem::path root = c.output_dir;
  run_stage("write", [&] { std::filesystem::create_directories(root); return 0; });

  for (auto k : out.k_values) {
    LdaConfig lc = c.lda;
    lc.k = k;
    out.models.push_back(run_stage("fit", [&] {
      FitHooks hooks;
      hooks.on_warning = [&](const std::string& w) { out.warnings.push_back(w); };
      return fit(prepared.corpus, lc, hooks);
    }));
    const auto& m = out.models.back();
    run_stage("write", [&] {
      const std::string stem = "topics_k" + std::to_string(k);
      detail::write_text(root / (stem + ".txt"), render_topic_table(m, c.n_per_topic));
      detail::write_json(root / (stem + ".json"), topic_table_json(m, c.n_per_topic));
      return 0;
    });
  }
  run_stage("write", [&] {
    detail::write_json(root / "manifest.json",
                       {{"tool", "wbidf"},
                        {"command", "sweep"},
                        {"config", config_to_json(c)},
                        {"k_values", out.k_values},
                        {"seed", c.lda.seed},
                        {"rng", Rng::kAlgorithm},
                        {"stats", prepared.stats.to_json()},
                        {"warnings", out.warnings}});
    return 0;
  });
  return out;
}

}  // namespace wbidf

#endif  // WBIDF_PIPELINE_HPP
