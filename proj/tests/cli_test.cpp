/*
 * Copyright 2026 The tactile-evalkit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "evalkit/cli.hpp"

#include <fstream>
#include <sstream>

#include "evalkit/baseline_metrics.hpp"
#include "evalkit/embedding_store.hpp"
#include "evalkit/leakage_audit.hpp"
#include "evalkit/tactile_metrics.hpp"
#include "fixtures.hpp"
#include "gtest/gtest.h"
#include "json.hpp"

namespace evalkit {
namespace {

namespace fs = std::filesystem;
using ::evalkit::testing::make_set;
using ::evalkit::testing::temp_dir;
using nlohmann::json;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

json run_json(std::vector<std::string> args) {
  auto r = run(std::move(args));
  EXPECT_EQ(r.code, kExitOk) << r.err;
  return json::parse(r.out);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = temp_dir(std::string("cli_") +
                    ::testing::UnitTest::GetInstance()->current_test_info()->name());
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write_set(const std::string& name, const EmbeddingSet& set) const {
    write_embeddings(set, path(name));
    return path(name);
  }
  std::string write_text(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
    return path(name);
  }
  fs::path dir_;
};

TEST_F(CliTest, TmmdTwoPointFixture) {
  auto g = write_set("g.temb", make_set({{0}, {0}}, "g"));
  auto r = write_set("r.temb", make_set({{2}, {2}}, "r"));
  auto j = run_json({"metrics", "tmmd", "--generated", g, "--reference", r, "--sigma", "1"});
  EXPECT_NEAR(j["value"].get<double>(), 1.7293294, 1e-7);
  EXPECT_EQ(j["metric"], "tmmd");
  EXPECT_EQ(j["sigma"].get<double>(), 1.0);
  EXPECT_EQ(j["sigma_policy"], "fixed");
  EXPECT_EQ(j["inputs"][g].get<std::string>().size(), 64u);
  EXPECT_EQ(j["inputs"][g], file_sha256(g));
}

TEST_F(CliTest, EmbeddingMmdMatchesTmmd) {
  auto g = write_set("g.temb", make_set({{0}, {2}}));
  auto j = run_json({"metrics", "embedding-mmd", "--generated", g, "--reference", g,
                     "--sigma", "1"});
  EXPECT_NEAR(j["value"].get<double>(), -0.8646647, 1e-7);
}

TEST_F(CliTest, ItmmdInterleaveFixture) {
  auto g = write_set("g.temb", make_set({{0}, {0}, {2}, {2}}, {"a", "b", "c", "d"}));
  auto j = run_json({"metrics", "itmmd", "--generated", g, "--split-mode", "interleave",
                     "--sigma", "1"});
  EXPECT_NEAR(j["value"].get<double>(), -0.8646647, 1e-7);
  EXPECT_EQ(j["split"]["mode"], "interleave");
}

TEST_F(CliTest, ItmmdRestrictedToMetaSamples) {
  auto g = write_set("g.temb",
                     make_set({{0}, {0}, {2}, {2}, {50}}, {"a", "b", "c", "d", "e"}));
  auto m = write_text("m.jsonl", "{\"sample_id\":\"a\"}\n{\"sample_id\":\"b\"}\n"
                                 "{\"sample_id\":\"c\"}\n{\"sample_id\":\"d\"}\n");
  auto j = run_json({"metrics", "itmmd", "--generated", g, "--meta", m,
                     "--split-mode", "interleave", "--sigma", "1"});
  EXPECT_NEAR(j["value"].get<double>(), -0.8646647, 1e-7);
}

std::string two_class_meta() {
  std::string text;
  for (int i = 0; i < 8; ++i) {
    text += "{\"sample_id\":\"s00000" + std::to_string(i) + "\",\"class\":\"" +
            (i < 4 ? "A" : "B") + "\"}\n";
  }
  return text;
}

TEST_F(CliTest, DtmmdTwoClassFixture) {
  auto g = write_set("g.temb",
                     make_set({{0}, {0}, {0}, {0}, {1000}, {1000}, {1000}, {1000}}));
  auto m = write_text("m.jsonl", two_class_meta());
  auto j = run_json({"metrics", "dtmmd", "--generated", g, "--meta", m, "--sigma", "1"});
  EXPECT_NEAR(j["value"].get<double>(), 0.0, 1e-7);
  EXPECT_EQ(j["classes"], json({"A", "B"}));
  EXPECT_NEAR(j["divergence"]["D"][0][1].get<double>(), 2.0, 1e-12);
  auto ci = run_json({"metrics", "citmmd", "--generated", g, "--meta", m, "--sigma", "1"});
  EXPECT_EQ(ci["value"].get<double>(), 0.0);
}

TEST_F(CliTest, IndeterminateDiversityExitsWithUsageError) {
  auto g = write_set("g.temb", make_set(testing::Rows(8, {1.0})));
  auto m = write_text("m.jsonl", two_class_meta());
  auto r = run({"metrics", "dtmmd", "--generated", g, "--meta", m, "--sigma", "1"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("indeterminate diversity"), std::string::npos);
}

TEST_F(CliTest, BaselineFidPsnrSsim) {
  std::mt19937_64 rng(1);
  auto x = write_set("x.temb", make_set(testing::random_rows(rng, 20, 3)));
  EXPECT_NEAR(run_json({"baseline", "fid", "--a", x, "--b", x})["value"].get<double>(),
              0.0, 1e-10);

  ImageGray img{16, 12, std::vector<std::uint8_t>(16 * 12)};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 7);
  write_png(img, path("img.png"));
  auto p = run({"baseline", "psnr", "--a", path("img.png"), "--b", path("img.png")});
  ASSERT_EQ(p.code, kExitOk) << p.err;
  EXPECT_EQ(json::parse(p.out)["value"], "inf");
  auto s = run_json({"baseline", "ssim", "--a", path("img.png"), "--b", path("img.png")});
  EXPECT_NEAR(s["value"].get<double>(), 1.0, 1e-12);
}

TEST_F(CliTest, RetrievalPlantedRanks) {
  auto q = write_set("q.temb", make_set({{1, 0}, {0, 1}, {-1, -1}}, {"q1", "q2", "q3"}));
  auto g = write_set("g.temb", make_set({{1, 0.05}, {0.1, 1}, {1, 1}, {-1, 0}, {0, -1}},
                                        {"g1", "g2", "g3", "g4", "g5"}));
  // q1 -> g1 (rank 1), q2 -> g2 (rank 1), q3 -> g3 is antipodal (rank 5).
  auto pairs = write_text("p.jsonl", "{\"query\":\"q1\",\"gallery\":\"g1\"}\n"
                                     "{\"query\":\"q2\",\"gallery\":\"g2\"}\n"
                                     "{\"query\":\"q3\",\"gallery\":\"g3\"}\n");
  auto j = run_json({"baseline", "retrieval", "--queries", q, "--gallery", g,
                     "--pairs", pairs, "--k", "1,5"});
  EXPECT_NEAR(j["top1"].get<double>(), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(j["top5"].get<double>(), 1.0);
  EXPECT_EQ(j["ranks"]["q3"], 5);
}

TEST_F(CliTest, KnnProbe) {
  auto train = write_set("train.temb", make_set({{0}, {0.1}, {10}, {10.1}}, "tr"));
  auto test = write_set("test.temb", make_set({{0.05}, {9.9}}, "te"));
  auto m = write_text("m.jsonl",
                      "{\"sample_id\":\"tr000000\",\"class\":\"a\"}\n"
                      "{\"sample_id\":\"tr000001\",\"class\":\"a\"}\n"
                      "{\"sample_id\":\"tr000002\",\"class\":\"b\"}\n"
                      "{\"sample_id\":\"tr000003\",\"class\":\"b\"}\n"
                      "{\"sample_id\":\"te000000\",\"class\":\"a\"}\n"
                      "{\"sample_id\":\"te000001\",\"class\":\"b\"}\n");
  auto j = run_json({"baseline", "knn", "--train", train, "--test", test, "--meta", m,
                     "--k", "1"});
  EXPECT_EQ(j["value"].get<double>(), 1.0);
}

TEST_F(CliTest, AuditFindsAdjacentFrameLeak) {
  auto m = write_text("leaked.jsonl",
                      "{\"sample_id\":\"f169\",\"video_id\":\"v\",\"frame_index\":169,\"split\":\"train\"}\n"
                      "{\"sample_id\":\"f170\",\"video_id\":\"v\",\"frame_index\":170,\"split\":\"test\"}\n");
  auto j = run_json({"audit", "--meta", m});
  ASSERT_EQ(j["video_overlap"].size(), 1u);
  EXPECT_EQ(j["video_overlap"][0]["min_frame_gap"], 1);
  EXPECT_EQ(j["leakage_rate"].get<double>(), 1.0);
}

TEST_F(CliTest, SplitTwiceGivesIdenticalFiles) {
  std::string meta;
  for (int v = 0; v < 12; ++v) {
    for (int f = 0; f < 5; ++f) {
      meta += "{\"sample_id\":\"v" + std::to_string(v) + "f" + std::to_string(f) +
              "\",\"video_id\":\"v" + std::to_string(v) + "\",\"frame_index\":" +
              std::to_string(f) + ",\"class\":\"c" + std::to_string(v % 2) + "\"}\n";
    }
  }
  auto m = write_text("m.jsonl", meta);
  auto a = run({"split", "--meta", m, "--test-frac", "0.2", "--seed", "7", "--out-dir", path("a")});
  auto b = run({"split", "--meta", m, "--test-frac", "0.2", "--seed", "7", "--out-dir", path("b")});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(path("a/train.txt")), slurp(path("b/train.txt")));
  EXPECT_EQ(slurp(path("a/test.txt")), slurp(path("b/test.txt")));
  // 60 samples in 5-frame videos: 10 is the reachable count closest to 12.
  EXPECT_EQ(read_id_list(path("a/test.txt")).size(), 10u);
}

TEST_F(CliTest, SynthThenDtmmdMatchesLibrary) {
  auto s = run({"synth", "--scenario", "collapse", "--seed", "1", "--out-dir", path("syn"),
                "--rho", "0", "--dim", "8"});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  auto j = run_json({"metrics", "dtmmd", "--generated", path("syn/generated.temb"),
                     "--meta", path("syn/meta.jsonl"), "--seed", "1"});
  auto g = load_embeddings(path("syn/generated.temb"));
  auto p = partition_by_class(g, load_meta(path("syn/meta.jsonl")));
  auto lib = d_tmmd(g, p, MmdConfig::median(), SplitStrategy::seeded_random(1, 5));
  EXPECT_EQ(j["value"].get<double>(), *lib.value);
  EXPECT_EQ(j["classes"].size(), 5u);
}

TEST_F(CliTest, CsvSummaryMatchesJson) {
  auto g = write_set("g.temb", make_set({{0}, {0}}, "g"));
  auto r = write_set("r.temb", make_set({{2}, {2}}, "r"));
  auto as_json = run_json({"metrics", "tmmd", "--generated", g, "--reference", r});
  auto csv = run({"metrics", "tmmd", "--generated", g, "--reference", r,
                  "--format", "csv-summary"});
  ASSERT_EQ(csv.code, kExitOk);
  std::istringstream lines(csv.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "key,value");
  std::map<std::string, std::string> kv;
  while (std::getline(lines, line)) {
    auto comma = line.find(',');
    kv[line.substr(0, comma)] = line.substr(comma + 1);
  }
  EXPECT_EQ(kv.at("value"), as_json["value"].dump());
  EXPECT_EQ(kv.at("sigma"), as_json["sigma"].dump());
  EXPECT_EQ(kv.at("metric"), "tmmd");
}

TEST_F(CliTest, OutFlagAndThreadCountsGiveIdenticalBytes) {
  std::mt19937_64 rng(3);
  auto g = write_set("g.temb", make_set(testing::random_rows(rng, 150, 4), "g"));
  auto r = write_set("r.temb", make_set(testing::random_rows(rng, 140, 4, 0.2), "r"));
  ASSERT_EQ(run({"metrics", "tmmd", "--generated", g, "--reference", r, "--threads", "1",
                 "--out", path("one.json")}).code, kExitOk);
  ASSERT_EQ(run({"metrics", "tmmd", "--generated", g, "--reference", r, "--threads", "8",
                 "--out", path("eight.json")}).code, kExitOk);
  EXPECT_EQ(slurp(path("one.json")), slurp(path("eight.json")));
  EXPECT_FALSE(slurp(path("one.json")).empty());
}

TEST_F(CliTest, VerboseOnlyTouchesStderr) {
  auto g = write_set("g.temb", make_set({{0}, {0}}, "g"));
  auto r = write_set("r.temb", make_set({{2}, {2}}, "r"));
  auto quiet = run({"metrics", "tmmd", "--generated", g, "--reference", r});
  auto loud = run({"metrics", "tmmd", "--generated", g, "--reference", r, "--verbose"});
  EXPECT_EQ(quiet.out, loud.out);
  EXPECT_TRUE(quiet.err.empty());
  EXPECT_FALSE(loud.err.empty());
}

TEST_F(CliTest, ExitCodes) {
  auto g = write_set("g.temb", make_set({{0}, {0}}, "g"));
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({"bogus"}).code, kExitUsage);
  auto missing = run({"metrics", "tmmd", "--generated", path("nope.temb"), "--reference", g});
  EXPECT_EQ(missing.code, kExitUsage);
  EXPECT_NE(missing.err.find("--generated"), std::string::npos);
  EXPECT_EQ(run({"metrics", "tmmd", "--generated", g, "--reference", g, "--sigma", "1",
                 "--median"}).code, kExitUsage);
  EXPECT_EQ(run({"metrics", "tmmd", "--generated", g, "--reference", g, "--sigma", "-1"}).code,
            kExitUsage);
  // Median of identical points is degenerate.
  EXPECT_EQ(run({"metrics", "tmmd", "--generated", g, "--reference", g}).code, kExitUsage);
  auto bad = write_text("bad.temb", "not an embedding file");
  EXPECT_EQ(run({"metrics", "tmmd", "--generated", bad, "--reference", g}).code, kExitUsage);
  EXPECT_EQ(run({"metrics", "dtmmd", "--generated", g}).code, kExitUsage);
  EXPECT_EQ(run({"baseline", "retrieval", "--queries", g, "--gallery", g, "--pairs",
                 write_text("p.jsonl", "{oops"), "--k", "1"}).code, kExitUsage);
  EXPECT_EQ(run({"synth", "--out-dir", g + "/sub"}).code, kExitUsage);
}

}  // namespace
}  // namespace evalkit
