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

#include "evalkit/synth_bench.hpp"

#include <cmath>
#include <set>

#include "evalkit/error.hpp"
#include "evalkit/leakage_audit.hpp"
#include "fixtures.hpp"
#include "gtest/gtest.h"

namespace evalkit {
namespace {

using ::evalkit::testing::make_set;

ScenarioSpec small_spec(Scenario scenario, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.scenario = scenario;
  spec.classes = 3;
  spec.videos_per_class = 4;
  spec.frames_per_video = 20;
  spec.dim = 8;
  spec.seed = seed;
  return spec;
}

// Pooled lag-1 correlation of frame deviations from the class mean.
double adjacent_frame_correlation(const ScenarioOutput& out,
                                  const ScenarioSpec& spec) {
  double cross = 0.0, energy = 0.0;
  const std::size_t frames = spec.frames_per_video;
  const std::size_t videos = spec.classes * spec.videos_per_class;
  for (std::size_t v = 0; v < videos; ++v) {
    const std::size_t c = v / spec.videos_per_class;
    auto dev = [&](std::size_t t, std::size_t k) {
      double mean = k == c ? spec.class_separation : 0.0;
      return static_cast<double>(out.embeddings.row(v * frames + t)[k]) - mean;
    };
    for (std::size_t t = 0; t + 1 < frames; ++t) {
      for (std::size_t k = 0; k < spec.dim; ++k) {
        cross += dev(t, k) * dev(t + 1, k);
        energy += dev(t, k) * dev(t, k);
      }
    }
  }
  return cross / energy;
}

TEST(Scenario, ParseAndPrint) {
  for (auto s : {Scenario::kClean, Scenario::kCollapse, Scenario::kLeakage}) {
    EXPECT_EQ(parse_scenario(to_string(s)), s);
  }
  EXPECT_THROW(parse_scenario("chaos"), Error);
}

TEST(Scenario, SpecValidation) {
  ScenarioSpec spec;
  EXPECT_NO_THROW(spec.validate());
  spec.rho = 1.0;
  EXPECT_THROW(spec.validate(), Error);
  spec = ScenarioSpec{};
  spec.classes = 0;
  EXPECT_THROW(spec.validate(), Error);
  spec = ScenarioSpec{};
  spec.dim = 2;
  EXPECT_THROW(spec.validate(), Error);
  spec.scenario = Scenario::kCollapse;
  EXPECT_NO_THROW(spec.validate());
}

TEST(Scenario, ShapesAndIdsAreConsistent) {
  auto spec = small_spec(Scenario::kClean, 3);
  auto out = generate_scenario(spec);
  EXPECT_EQ(out.embeddings.count(), 3u * 4 * 20);
  EXPECT_EQ(out.embeddings.dim(), 8u);
  EXPECT_EQ(out.meta.size(), out.embeddings.count());
  EXPECT_EQ(out.meta.videos().size(), 12u);
  EXPECT_EQ(out.generator_outputs.ids(), out.embeddings.ids());
  for (const auto& r : out.meta.rows()) {
    EXPECT_TRUE(out.embeddings.find(r.sample_id).has_value());
    EXPECT_TRUE(r.class_label.has_value());
  }
  auto p = partition_by_class(out.embeddings, out.meta);
  EXPECT_EQ(p.class_count(), 3u);
}

TEST(Scenario, DeterministicAndSeedSensitive) {
  for (auto scenario : {Scenario::kClean, Scenario::kCollapse, Scenario::kLeakage}) {
    auto a = generate_scenario(small_spec(scenario, 5));
    auto b = generate_scenario(small_spec(scenario, 5));
    auto c = generate_scenario(small_spec(scenario, 6));
    EXPECT_EQ(encode_embeddings(a.embeddings), encode_embeddings(b.embeddings));
    EXPECT_EQ(encode_embeddings(a.generator_outputs),
              encode_embeddings(b.generator_outputs));
    EXPECT_EQ(format_meta(a.meta), format_meta(b.meta));
    EXPECT_NE(encode_embeddings(a.embeddings), encode_embeddings(c.embeddings));
  }
}

TEST(Scenario, RhoControlsAdjacentCorrelation) {
  ScenarioSpec spec;
  spec.seed = 11;
  spec.rho = 0.0;
  EXPECT_NEAR(adjacent_frame_correlation(generate_scenario(spec), spec), 0.0, 0.05);
  spec.rho = 0.97;
  EXPECT_NEAR(adjacent_frame_correlation(generate_scenario(spec), spec), 0.97, 0.02);
}

TEST(Scenario, CollapseClassMeansAgree) {
  ScenarioSpec spec;
  spec.scenario = Scenario::kCollapse;
  spec.rho = 0.0;
  spec.seed = 12;
  auto out = generate_scenario(spec);
  auto p = partition_by_class(out.embeddings, out.meta);
  std::vector<std::vector<double>> means(p.class_count(), std::vector<double>(spec.dim));
  for (std::size_t c = 0; c < p.class_count(); ++c) {
    for (auto i : p.members[c]) {
      for (std::size_t k = 0; k < spec.dim; ++k) means[c][k] += out.embeddings.row(i)[k];
    }
    for (auto& m : means[c]) m /= static_cast<double>(p.members[c].size());
  }
  const double n = static_cast<double>(p.members[0].size());
  // Standard error of the difference of two class-mean vectors.
  const double se = std::sqrt(static_cast<double>(spec.dim) * 2.0 / n) * spec.noise_scale;
  for (std::size_t a = 0; a < means.size(); ++a) {
    for (std::size_t b = a + 1; b < means.size(); ++b) {
      double gap = 0.0;
      for (std::size_t k = 0; k < spec.dim; ++k) {
        gap += (means[a][k] - means[b][k]) * (means[a][k] - means[b][k]);
      }
      EXPECT_LE(std::sqrt(gap), 3.0 * se);
    }
  }
}

TEST(Scenario, LeakageCarriesInterleavedSplit) {
  auto out = generate_scenario(small_spec(Scenario::kLeakage, 2));
  auto audit = audit_split(out.meta);
  EXPECT_EQ(audit.video_overlap.size(), 12u);
  EXPECT_GT(audit.leakage_rate, 0.0);
  std::size_t tests = 0;
  for (const auto& r : out.meta.rows()) tests += r.split == SplitTag::kTest;
  EXPECT_EQ(out.generator_outputs.count(), tests);
}

TEST(FrameInterleavedSplit, EveryKthFrameIsTest) {
  auto out = generate_scenario(small_spec(Scenario::kClean, 1));
  auto split = frame_interleaved_split(out.meta, 0.25);
  for (const auto& r : out.meta.rows()) {
    const bool expect_test = *r.frame_index % 4 == 3;
    EXPECT_EQ(split.assignment.at(r.sample_id) == SplitTag::kTest, expect_test);
  }
  EXPECT_DOUBLE_EQ(split.achieved_test_fraction, 0.25);
}

TEST(MemorizingGenerator, ZeroNoiseCopiesNearestTrainRow) {
  auto train = make_set({{0, 0}, {10, 0}, {0, 10}}, {"a", "b", "c"});
  auto probe = make_set({{0, 0}, {9, 1}, {100, 100}}, {"p", "q", "r"});
  auto out = memorizing_generator(train, probe, 0.0, 1);
  EXPECT_EQ(out.ids(), probe.ids());
  EXPECT_EQ(out.row(0)[0], 0.0f);
  EXPECT_EQ(out.row(1)[0], 10.0f);
  EXPECT_EQ(out.row(1)[1], 0.0f);
  // (100, 100) is equidistant from b and c; the lower index wins.
  EXPECT_EQ(out.row(2)[0], 10.0f);
  auto self = memorizing_generator(train, train, 0.0, 3);
  EXPECT_EQ(self.values(), train.values());
}

TEST(MemorizingGenerator, OutputsStayNearTrainRows) {
  auto spec = small_spec(Scenario::kClean, 8);
  auto data = generate_scenario(spec);
  const double noise = 0.05;
  auto out = memorizing_generator(data.embeddings, data.embeddings, noise, 4);
  const double bound = noise * std::sqrt(static_cast<double>(spec.dim)) * 4.0;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < out.count(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < data.embeddings.count(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < spec.dim; ++k) {
        double diff = out.row(i)[k] - data.embeddings.row(j)[k];
        s += diff * diff;
      }
      best = std::min(best, s);
    }
    violations += std::sqrt(best) > bound;
  }
  EXPECT_LE(static_cast<double>(violations), 0.001 * static_cast<double>(out.count()));
}

TEST(LeakStudy, DefaultSpecShowsInflation) {
  ScenarioSpec spec;
  spec.seed = 1;
  auto study = run_leak_study(spec, 0.2, 1);
  EXPECT_GT(study.leaked.accuracy, study.noleak.accuracy);
  EXPECT_GT(study.leaked.top1, study.noleak.top1);
  EXPECT_LT(study.leaked.tmmd, study.noleak.tmmd);
  EXPECT_GT(study.leaked.leakage_rate, 0.0);
  EXPECT_EQ(study.noleak.leakage_rate, 0.0);
  auto report = study.to_report();
  EXPECT_EQ(report.metric, "leak-study");
  EXPECT_TRUE(report.extra.contains("inflation"));
}

TEST(LeakStudy, RequiresCorrelatedFrames) {
  ScenarioSpec spec;
  spec.rho = 0.5;
  EXPECT_THROW(run_leak_study(spec, 0.2, 1), Error);
}

}  // namespace
}  // namespace evalkit
