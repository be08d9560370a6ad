#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "wbidf/wbidf.hpp"

namespace wbidf {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("wbidf_pipeline_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    SyntheticSpec spec;
    spec.n_topics = 4;
    spec.docs = 300;
    spec.seed = 3;
    const auto corpus = generate_synthetic(spec);
    posts_ = corpus.posts;
    save_synthetic(corpus, dir_);
    labels_ = corpus.labels;
  }

  void TearDown() override { fs::remove_all(dir_); }

  PipelineConfig base_config() const {
    PipelineConfig c;
    c.input = (dir_ / "posts.jsonl").string();
    c.tokenization = Tokenization::pretokenized;
    c.labels = (dir_ / "labels.jsonl").string();
    c.top_k_posts = 200;
    c.lda.k = 4;
    c.lda.iterations = 60;
    c.lda.burn_in = 20;
    c.n_per_topic = 8;
    c.output_dir = (dir_ / "out").string();
    return c;
  }

  fs::path dir_;
  std::vector<Post> posts_;
  LabelSet labels_;
};

TEST(Config, ParseAndApply) {
  const auto kv = parse_config_text(
      "# comment\n"
      "k = 12\n"
      "  alpha=0.5  \n"
      "\n"
      "idf_max = inf\n"
      "weighting_enabled = false\n"
      "topics_used = 3\n");
  PipelineConfig c;
  for (const auto& [key, value] : kv) apply_setting(c, key, value);
  EXPECT_EQ(c.lda.k, 12u);
  EXPECT_EQ(c.lda.alpha_value(), 0.5);
  EXPECT_TRUE(std::isinf(*c.idf_max));
  EXPECT_FALSE(c.weighting_enabled);
  EXPECT_EQ(c.topics_used, 3u);
  apply_setting(c, "topics_used", "all");
  EXPECT_FALSE(c.topics_used.has_value());
}

TEST(Config, DefaultsAndKeys) {
  PipelineConfig c;
  EXPECT_EQ(c.lda.k, 30u);
  EXPECT_EQ(c.lda.alpha_value(), 50.0 / 30.0);
  EXPECT_EQ(c.lda.beta, 0.01);
  EXPECT_EQ(c.lda.iterations, 1000u);
  EXPECT_EQ(c.lda.burn_in, 200u);
  EXPECT_EQ(c.top_k_posts, 4000u);
  EXPECT_TRUE(c.idf_filter);
  EXPECT_TRUE(c.weighting_enabled);
  EXPECT_EQ(setting_keys().size(), 18u);
  for (const auto& key : setting_keys()) {
    EXPECT_TRUE(config_to_json(c).contains(key) || key == "output_dir") << key;
  }
}

TEST(Config, Errors) {
  PipelineConfig c;
  EXPECT_THROW(apply_setting(c, "bogus", "1"), InputError);
  EXPECT_THROW(apply_setting(c, "k", "-3"), InputError);
  EXPECT_THROW(apply_setting(c, "k", "three"), InputError);
  EXPECT_THROW(apply_setting(c, "format", "xml"), InputError);
  EXPECT_THROW(apply_setting(c, "weighting_enabled", "maybe"), InputError);
  EXPECT_THROW(apply_setting(c, "top_k_posts", "0"), InputError);
  EXPECT_THROW(parse_config_text("k 3\n"), InputError);
}

TEST(Variant, Names) {
  PipelineConfig c;
  EXPECT_EQ(variant_name(c), "WBIDF-LDA");
  c.weighting_enabled = false;
  EXPECT_EQ(variant_name(c), "IDF-LDA");
  c.idf_filter = false;
  EXPECT_EQ(variant_name(c), "LDA");
}

TEST_F(PipelineTest, RunsAreByteIdentical) {
  auto a = base_config();
  auto b = base_config();
  a.output_dir = (dir_ / "a").string();
  b.output_dir = (dir_ / "b").string();
  run_pipeline(a);
  run_pipeline(b);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a.output_dir)) {
    names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (std::vector<std::string>{"manifest.json", "model.v1", "report.json",
                                             "report.txt", "topics.json", "topics.txt"}));
  for (const auto& n : names) {
    EXPECT_EQ(slurp(fs::path(a.output_dir) / n), slurp(fs::path(b.output_dir) / n)) << n;
  }
  EXPECT_EQ(load_model((fs::path(a.output_dir) / kModelFileName).string()).phi,
            load_model((fs::path(b.output_dir) / kModelFileName).string()).phi);
}

TEST_F(PipelineTest, WeightingOffMatchesManualIdfLda) {
  auto c = base_config();
  c.weighting_enabled = false;
  const auto r = execute_run(posts_, c, nullptr);

  const auto full = build_vocabulary(posts_);
  const auto kept = filter_vocabulary(full, compute_idf(full), kDefaultIdfMin,
                                      default_idf_max(full.n_docs()));
  const auto corpus =
      build_weighted_corpus(select_top_popular(posts_, c.top_k_posts), kept, false);
  EXPECT_EQ(fit(corpus, c.lda, {nullptr, [](const std::string&) {}}), r.model);
  EXPECT_EQ(r.stats.total_replicas, r.stats.n_docs);
}

TEST_F(PipelineTest, ZeroEngagementMakesWeightingInert) {
  auto flat = posts_;
  for (auto& p : flat) p.likes = p.comments = p.retweets = 0;
  auto c = base_config();
  const auto weighted = execute_run(flat, c, nullptr);
  c.weighting_enabled = false;
  const auto plain = execute_run(flat, c, nullptr);
  EXPECT_EQ(weighted.model, plain.model);
}

TEST_F(PipelineTest, IdentityThresholdsReduceToPlainLda) {
  auto c = base_config();
  c.weighting_enabled = false;
  c.idf_min = -std::numeric_limits<double>::infinity();
  c.idf_max = std::numeric_limits<double>::infinity();
  const auto open = execute_run(posts_, c, nullptr);
  c.idf_filter = false;
  const auto lda = execute_run(posts_, c, nullptr);
  EXPECT_EQ(open.model, lda.model);
  EXPECT_EQ(open.model_name, "IDF-LDA");
  EXPECT_EQ(lda.model_name, "LDA");
}

TEST_F(PipelineTest, FilterRunsOnFullCorpusBeforeSelection) {
  auto c = base_config();
  c.top_k_posts = 10;
  const auto r = execute_run(posts_, c, nullptr);
  EXPECT_EQ(r.stats.n_posts, 300u);
  EXPECT_EQ(r.stats.n_selected, 10u);
  EXPECT_EQ(r.model.vocab.n_docs(), 300u);
  EXPECT_EQ(r.stats.idf_max, default_idf_max(300));
}

TEST_F(PipelineTest, ComparisonWritesAllVariants) {
  auto c = base_config();
  const auto r = run_comparison(c);
  ASSERT_EQ(r.table.size(), 3u);
  EXPECT_EQ(r.table[0].model_name, "LDA");
  EXPECT_EQ(r.table[1].model_name, "IDF-LDA");
  EXPECT_EQ(r.table[2].model_name, "WBIDF-LDA");
  for (const char* sub : {"lda", "idf-lda", "wbidf-lda"}) {
    EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / sub / "model.v1")) << sub;
  }
  EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "report.txt"));
  const auto manifest = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "manifest.json"));
  EXPECT_EQ(manifest["variants"].size(), 3u);
}

TEST_F(PipelineTest, ComparisonNeedsLabels) {
  auto c = base_config();
  c.labels.clear();
  try {
    run_comparison(c);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "config");
    EXPECT_TRUE(e.input_fault());
  }
  EXPECT_FALSE(fs::exists(c.output_dir));
}

TEST_F(PipelineTest, SweepDeduplicatesK) {
  auto c = base_config();
  const auto r = run_topic_sweep(c, {3, 5, 3});
  EXPECT_EQ(r.k_values, (std::vector<std::uint32_t>{3, 5}));
  ASSERT_EQ(r.models.size(), 2u);
  EXPECT_EQ(r.models[1].k(), 5u);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings[0].find("K=3"), std::string::npos);
  for (const char* f : {"topics_k3.txt", "topics_k3.json", "topics_k5.txt",
                        "topics_k5.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / f)) << f;
  }
  const auto table = slurp(fs::path(c.output_dir) / "topics_k5.txt");
  EXPECT_NE(table.find("Topic number K = 5"), std::string::npos);
}

TEST_F(PipelineTest, StageErrorsNameTheStage) {
  auto c = base_config();
  c.input = (dir_ / "missing.jsonl").string();
  c.labels.clear();
  try {
    run_pipeline(c);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "ingest");
    EXPECT_TRUE(e.input_fault());
  }
  c = base_config();
  c.idf_min = 50.0;
  c.idf_max = 60.0;
  try {
    run_pipeline(c);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "idf-filter");
  }
}

// Command-line behavior, through the built executable.
class CliTest : public PipelineTest {
 protected:
  int cli(const std::string& args) {
    const char* exe = std::getenv("WBIDF_CLI");
    if (!exe) return -1;
    const std::string cmd = std::string(exe) + " " + args + " > " +
                            (dir_ / "stdout.txt").string() + " 2> " +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  void SetUp() override {
    if (!std::getenv("WBIDF_CLI")) GTEST_SKIP() << "WBIDF_CLI not set";
    PipelineTest::SetUp();
    std::ofstream conf(dir_ / "run.conf");
    conf << "input = " << (dir_ / "posts.jsonl").string() << "\n"
         << "tokenization = pretokenized\n"
         << "labels = " << (dir_ / "labels.jsonl").string() << "\n"
         << "k = 4\niterations = 40\nburn_in = 10\ntop_k_posts = 150\n"
         << "output_dir = " << (dir_ / "out").string() << "\n";
  }

  std::string conf() const { return "--config " + (dir_ / "run.conf").string(); }
};

TEST_F(CliTest, RunSucceeds) {
  EXPECT_EQ(cli("run " + conf()), 0) << slurp(dir_ / "stderr.txt");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "model.v1"));
  EXPECT_NE(slurp(dir_ / "stdout.txt").find("F1-Score"), std::string::npos);
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
  EXPECT_EQ(cli("run " + conf() + " --k 3 --output-dir " + (dir_ / "o3").string()), 0);
  EXPECT_EQ(load_model((dir_ / "o3" / "model.v1").string()).k(), 3u);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, IngestStatsJson) {
  EXPECT_EQ(cli("ingest-stats --json " + conf()), 0);
  const auto j = nlohmann::json::parse(slurp(dir_ / "stdout.txt"));
  EXPECT_EQ(j["n_posts"], 300);
  EXPECT_EQ(j["n_selected"], 150);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(cli("run --input " + (dir_ / "nope.jsonl").string()), 1);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("[ingest]"), std::string::npos);
  EXPECT_EQ(cli("run " + conf() + " --k zero"), 1);
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("--help"), 0);
  EXPECT_EQ(cli("compare " + conf() + " --labels ''"), 1);
  EXPECT_EQ(cli("sweep " + conf()), 1);  // --k-values is required

  std::ofstream(dir_ / "blocker") << "x";
  EXPECT_EQ(cli("run " + conf() + " --output-dir " + (dir_ / "blocker").string()), 2);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("[write]"), std::string::npos);
}

TEST_F(CliTest, SweepAndSynth) {
  EXPECT_EQ(cli("sweep " + conf() + " --k-values 2,3"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "topics_k2.txt"));
  EXPECT_EQ(cli("synth --out-dir " + (dir_ / "syn").string() + " --docs 50"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "syn" / "posts.jsonl"));
  EXPECT_TRUE(fs::exists(dir_ / "syn" / "labels.jsonl"));
}

}  // namespace
}  // namespace wbidf
