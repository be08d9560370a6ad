// wbidf: keyword detection from engagement-weighted social media posts.
//
//   wbidf ingest-stats --input posts.jsonl
//   wbidf run      --config run.conf --labels labels.jsonl
//   wbidf compare  --config run.conf --labels labels.jsonl
//   wbidf sweep    --config run.conf --k-values 10,30,70
//   wbidf synth    --out-dir data/
//
// Exit codes: 0 success, 1 input/config error, 2 pipeline-stage failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wbidf/wbidf.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitStage = 2;

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

/// Pipeline settings exposed as --flags on a subcommand. A flag given on
/// the command line overrides the same key from --config.
struct SettingFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path,
                    "flat key = value configuration file");
    for (const auto& key : wbidf::setting_keys()) {
      options[key] = app->add_option("--" + dashed(key), values[key],
                                     "setting '" + key + "'");
    }
  }

  wbidf::PipelineConfig resolve() const {
    wbidf::PipelineConfig config;
    if (!config_path.empty()) wbidf::apply_config_file(config, config_path);
    for (const auto& key : wbidf::setting_keys()) {
      if (options.at(key)->count() > 0) {
        wbidf::apply_setting(config, key, values.at(key));
      }
    }
    return config;
  }
};

int ingest_stats(const wbidf::PipelineConfig& c, bool as_json) {
  const auto posts = wbidf::load_posts(c);
  const auto prepared = wbidf::prepare_corpus(posts, c);
  const auto& s = prepared.stats;

  std::vector<std::uint64_t> pop;
  std::uint64_t tokens = 0;
  for (const auto& p : posts) {
    pop.push_back(wbidf::popularity(p));
    tokens += p.tokens.size();
  }
  std::sort(pop.begin(), pop.end());
  nlohmann::json j = s.to_json();
  j["raw_tokens"] = tokens;
  j["popularity"] = {{"min", pop.empty() ? 0 : pop.front()},
                     {"median", pop.empty() ? 0 : pop[pop.size() / 2]},
                     {"max", pop.empty() ? 0 : pop.back()}};
  if (as_json) {
    std::cout << j.dump(2) << '\n';
    return kExitOk;
  }
  std::cout << "posts            " << s.n_posts << " (" << s.n_empty_posts
            << " empty)\n"
            << "tokens           " << tokens << '\n'
            << "vocabulary       " << s.vocab_before << " -> " << s.vocab_after
            << " after IDF filter [" << j["idf_min"].dump() << ", "
            << j["idf_max"].dump() << "]\n"
            << "selected posts   " << s.n_selected << " (top_k_posts "
            << c.top_k_posts << ")\n"
            << "encoded docs     " << s.n_docs << '\n'
            << "replicas         " << s.total_replicas
            << (c.weighting_enabled ? " (weighted)" : " (unweighted)") << '\n'
            << "replica tokens   " << s.total_tokens << '\n'
            << "popularity       min " << j["popularity"]["min"] << ", median "
            << j["popularity"]["median"] << ", max " << j["popularity"]["max"]
            << '\n';
  return kExitOk;
}

void write_synthetic(const wbidf::SyntheticSpec& spec,
                     const std::filesystem::path& dir) {
  const auto corpus = wbidf::generate_synthetic(spec);
  wbidf::save_synthetic(corpus, dir);
  std::cout << "wrote " << corpus.posts.size() << " posts and "
            << corpus.labels.universe.size() << " planted keywords to "
            << dir.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WBIDF-LDA keyword detection"};
  app.require_subcommand(1);

  SettingFlags stats_flags, run_flags, compare_flags, sweep_flags;
  bool stats_json = false;
  std::vector<std::uint32_t> k_values;

  auto* stats = app.add_subcommand("ingest-stats",
                                   "corpus, vocabulary and filter statistics");
  stats_flags.attach(stats);
  stats->add_flag("--json", stats_json, "print JSON instead of text");

  auto* run = app.add_subcommand("run", "fit one model and write its reports");
  run_flags.attach(run);

  auto* compare = app.add_subcommand(
      "compare", "LDA vs IDF-LDA vs WBIDF-LDA on the same corpus and seed");
  compare_flags.attach(compare);

  auto* sweep = app.add_subcommand("sweep", "topic tables for several K");
  sweep_flags.attach(sweep);
  sweep->add_option("--k-values", k_values, "comma separated topic counts")
      ->delimiter(',')
      ->required();

  wbidf::SyntheticSpec synth_spec;
  std::string synth_dir;
  auto* synth = app.add_subcommand(
      "synth", "write a planted-topic corpus (posts.jsonl, labels.jsonl)");
  synth->add_option("--out-dir", synth_dir, "output directory")->required();
  synth->add_option("--topics", synth_spec.n_topics);
  synth->add_option("--vocab-per-topic", synth_spec.vocab_per_topic);
  synth->add_option("--docs", synth_spec.docs);
  synth->add_option("--doc-len", synth_spec.doc_len);
  synth->add_option("--noise-ratio", synth_spec.noise_ratio);
  synth->add_option("--noise-vocab", synth_spec.noise_vocab);
  synth->add_option("--seed", synth_spec.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*stats) return ingest_stats(stats_flags.resolve(), stats_json);
    if (*run) {
      const auto r = wbidf::run_pipeline(run_flags.resolve());
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      if (r.report) {
        std::cout << wbidf::render_comparison(wbidf::compare_models({*r.report}));
      }
      return kExitOk;
    }
    if (*compare) {
      const auto r = wbidf::run_comparison(compare_flags.resolve());
      std::cout << wbidf::render_comparison(r.table);
      return kExitOk;
    }
    if (*sweep) {
      const auto r = wbidf::run_topic_sweep(sweep_flags.resolve(), k_values);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "wrote " << r.k_values.size() << " topic tables\n";
      return kExitOk;
    }
    if (*synth) {
      write_synthetic(synth_spec, synth_dir);
      return kExitOk;
    }
  } catch (const wbidf::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.input_fault() ? kExitInput : kExitStage;
  } catch (const wbidf::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  }
  return kExitOk;
}
