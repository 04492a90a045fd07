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

#include "evalkit/leakage_audit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <string>

#include "evalkit/counter_rng.hpp"
#include "evalkit/error.hpp"
#include "evalkit/parallel.hpp"

namespace evalkit {
namespace {

constexpr std::size_t kScanBlock = 256;
constexpr std::uint64_t kSplitStream = 0x53504C4954ULL;  // "SPLIT"

std::vector<double> unit_rows(const EmbeddingSet& set,
                              const std::vector<std::size_t>& rows) {
  const std::size_t d = set.dim();
  std::vector<double> out(rows.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto r = set.row(rows[i]);
    double norm = 0.0;
    for (float v : r) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < d; ++k) {
      out[i * d + k] = norm > 0.0 ? r[k] / norm : 0.0;
    }
  }
  return out;
}

struct Group {
  std::string key;
  std::vector<std::size_t> rows;
};

}  // namespace

MetricReport LeakageReport::to_report() const {
  MetricReport report;
  report.metric = "leakage-audit";
  report.value = leakage_rate;
  nlohmann::json overlap = nlohmann::json::array();
  nlohmann::json gaps = nlohmann::json::object();
  for (const auto& v : video_overlap) {
    nlohmann::json gap = v.min_frame_gap ? nlohmann::json(*v.min_frame_gap)
                                         : nlohmann::json();
    overlap.push_back({{"video_id", v.video_id},
                       {"train_samples", v.train_samples},
                       {"test_samples", v.test_samples},
                       {"min_frame_gap", gap}});
    gaps[v.video_id] = gap;
  }
  nlohmann::json dups = nlohmann::json::array();
  for (const auto& d : near_duplicates) {
    dups.push_back({{"train_id", d.train_id},
                    {"test_id", d.test_id},
                    {"similarity", json_number(d.similarity)}});
  }
  report.extra["video_overlap"] = std::move(overlap);
  report.extra["min_frame_gap"] = std::move(gaps);
  report.extra["near_duplicates"] = std::move(dups);
  report.extra["leakage_rate"] = json_number(leakage_rate);
  report.extra["test_count"] = test_count;
  report.extra["implicated_test_count"] = implicated_test_count;
  report.extra["threshold"] =
      threshold ? json_number(*threshold) : nlohmann::json();
  return report;
}

LeakageReport audit_split(const MetaTable& meta,
                          const EmbeddingSet* embeddings, double threshold) {
  if (embeddings && !(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "similarity threshold must be in (0, 1], got " +
                    std::to_string(threshold));
  }
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < meta.size(); ++i) {
    switch (meta[i].split) {
      case SplitTag::kTrain:
        train_rows.push_back(i);
        break;
      case SplitTag::kTest:
        test_rows.push_back(i);
        break;
      case SplitTag::kUnassigned:
        throw Error(ErrorCode::kUntaggedSample,
                    "sample '" + meta[i].sample_id + "' has no split tag");
    }
  }

  LeakageReport report;
  report.test_count = test_rows.size();
  std::set<std::string> implicated;

  for (const auto& [video, rows] : meta.videos()) {
    std::vector<std::int64_t> train_frames, test_frames;
    std::size_t n_train = 0, n_test = 0;
    for (auto i : rows) {
      const bool is_train = meta[i].split == SplitTag::kTrain;
      (is_train ? n_train : n_test) += 1;
      if (meta[i].frame_index) {
        (is_train ? train_frames : test_frames).push_back(*meta[i].frame_index);
      }
    }
    if (n_train == 0 || n_test == 0) continue;
    VideoOverlap overlap{video, n_train, n_test, std::nullopt};
    if (!train_frames.empty() && !test_frames.empty()) {
      std::sort(train_frames.begin(), train_frames.end());
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (auto f : test_frames) {
        auto it = std::lower_bound(train_frames.begin(), train_frames.end(), f);
        if (it != train_frames.end()) best = std::min(best, *it - f);
        if (it != train_frames.begin()) best = std::min(best, f - *(it - 1));
      }
      overlap.min_frame_gap = best;
    }
    for (auto i : rows) {
      if (meta[i].split == SplitTag::kTest) implicated.insert(meta[i].sample_id);
    }
    report.video_overlap.push_back(std::move(overlap));
  }

  if (embeddings) {
    report.threshold = threshold;
    auto locate = [&](const std::vector<std::size_t>& meta_rows) {
      std::vector<std::size_t> out;
      out.reserve(meta_rows.size());
      for (auto i : meta_rows) {
        auto idx = embeddings->find(meta[i].sample_id);
        if (!idx) {
          throw Error(ErrorCode::kMissingSample,
                      "sample '" + meta[i].sample_id +
                          "' has no embedding row");
        }
        out.push_back(*idx);
      }
      return out;
    };
    const auto train_emb = locate(train_rows);
    const auto test_emb = locate(test_rows);
    const auto train_unit = unit_rows(*embeddings, train_emb);
    const auto test_unit = unit_rows(*embeddings, test_emb);
    const std::size_t d = embeddings->dim();

    const std::size_t blocks = (train_rows.size() + kScanBlock - 1) / kScanBlock;
    std::vector<std::vector<NearDuplicate>> found(blocks);
    parallel_for(blocks, [&](std::size_t b) {
      const std::size_t end = std::min(train_rows.size(), (b + 1) * kScanBlock);
      for (std::size_t i = b * kScanBlock; i < end; ++i) {
        for (std::size_t j = 0; j < test_rows.size(); ++j) {
          double dot = 0.0;
          for (std::size_t k = 0; k < d; ++k) {
            dot += train_unit[i * d + k] * test_unit[j * d + k];
          }
          if (dot >= threshold) {
            found[b].push_back({meta[train_rows[i]].sample_id,
                                meta[test_rows[j]].sample_id, dot});
          }
        }
      }
    });
    for (auto& block : found) {
      for (auto& dup : block) {
        implicated.insert(dup.test_id);
        report.near_duplicates.push_back(std::move(dup));
      }
    }
    std::sort(report.near_duplicates.begin(), report.near_duplicates.end(),
              [](const NearDuplicate& a, const NearDuplicate& b) {
                if (a.similarity != b.similarity) {
                  return a.similarity > b.similarity;
                }
                if (a.train_id != b.train_id) return a.train_id < b.train_id;
                return a.test_id < b.test_id;
              });
  }

  report.implicated_test_count = implicated.size();
  report.leakage_rate =
      report.test_count == 0
          ? 0.0
          : static_cast<double>(implicated.size()) /
                static_cast<double>(report.test_count);
  return report;
}

MetricReport SplitAssignment::to_report() const {
  MetricReport report;
  report.metric = "noleak-split";
  report.value = achieved_test_fraction;
  report.warnings = warnings;
  auto lists = split_to_lists(*this);
  report.extra["seed"] = seed;
  report.extra["test_fraction_target"] = json_number(test_fraction_target);
  report.extra["achieved_test_fraction"] = json_number(achieved_test_fraction);
  report.extra["stratify_key"] =
      stratify_key ? nlohmann::json(*stratify_key) : nlohmann::json();
  report.extra["train_count"] = lists.train.size();
  report.extra["test_count"] = lists.test.size();
  return report;
}

SplitAssignment make_noleak_split(const MetaTable& meta, double test_fraction,
                                  std::uint64_t seed,
                                  const std::optional<std::string>& stratify_key) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "test fraction must be in (0, 1), got " +
                    std::to_string(test_fraction));
  }
  if (stratify_key && *stratify_key != "class") {
    throw Error(ErrorCode::kInvalidArgument,
                "unsupported stratify key '" + *stratify_key +
                    "' (only 'class' is supported)");
  }
  const bool stratify = stratify_key.has_value();

  std::vector<Group> groups;
  for (auto& [video, rows] : meta.videos()) groups.push_back({video, rows});
  std::vector<Group> singletons;
  for (std::size_t i = 0; i < meta.size(); ++i) {
    if (!meta[i].video_id) singletons.push_back({meta[i].sample_id, {i}});
  }
  std::sort(singletons.begin(), singletons.end(),
            [](const Group& a, const Group& b) { return a.key < b.key; });
  groups.insert(groups.end(), singletons.begin(), singletons.end());
  if (groups.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "a group-aware split needs at least 2 videos");
  }

  CounterRng rng(seed, kSplitStream);
  for (std::size_t i = groups.size() - 1; i > 0; --i) {
    std::swap(groups[i], groups[rng.bounded(i + 1)]);
  }

  // Class index per row (-1 = unlabeled) and per-class totals.
  std::map<std::string, std::size_t> class_index;
  std::vector<int> row_class(meta.size(), -1);
  if (stratify) {
    for (const auto& row : meta.rows()) {
      if (row.class_label) class_index.emplace(*row.class_label, 0);
    }
    std::size_t next = 0;
    for (auto& [label, idx] : class_index) idx = next++;
    for (std::size_t i = 0; i < meta.size(); ++i) {
      if (meta[i].class_label) {
        row_class[i] = static_cast<int>(class_index.at(*meta[i].class_label));
      }
    }
  }
  std::vector<double> class_total(class_index.size(), 0.0);
  for (int c : row_class) {
    if (c >= 0) class_total[static_cast<std::size_t>(c)] += 1.0;
  }

  const double total = static_cast<double>(meta.size());
  double test_count = 0.0;
  std::vector<double> class_test(class_index.size(), 0.0);
  std::vector<bool> in_test(groups.size(), false);

  // Squared deviation of the overall test fraction plus, when stratifying,
  // the per-class deviations. The overall term carries the same weight as
  // all class terms together.
  const double overall_weight =
      stratify ? std::max<double>(1.0, static_cast<double>(class_total.size()))
               : 1.0;
  auto cost_with = [&](const Group& g, double sign) {
    double tc = test_count + sign * static_cast<double>(g.rows.size());
    double dev = tc / total - test_fraction;
    double cost = overall_weight * dev * dev;
    if (stratify) {
      std::vector<double> ct = class_test;
      for (auto i : g.rows) {
        if (row_class[i] >= 0) ct[static_cast<std::size_t>(row_class[i])] += sign;
      }
      for (std::size_t c = 0; c < ct.size(); ++c) {
        double cd = ct[c] / class_total[c] - test_fraction;
        cost += cd * cd;
      }
    }
    return cost;
  };
  auto move = [&](std::size_t gi, double sign) {
    test_count += sign * static_cast<double>(groups[gi].rows.size());
    for (auto i : groups[gi].rows) {
      if (row_class[i] >= 0) {
        class_test[static_cast<std::size_t>(row_class[i])] += sign;
      }
    }
    in_test[gi] = sign > 0;
  };
  auto flip_sign = [&](std::size_t gi) { return in_test[gi] ? -1.0 : 1.0; };

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    if (cost_with(groups[gi], 1.0) < cost_with(groups[gi], 0.0)) move(gi, 1.0);
  }

  // Both sides must be non-empty: move the cheapest group across.
  auto test_groups = std::count(in_test.begin(), in_test.end(), true);
  if (test_groups == 0 ||
      test_groups == static_cast<std::ptrdiff_t>(groups.size())) {
    const bool to_test = test_groups == 0;
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      double c = cost_with(groups[gi], to_test ? 1.0 : -1.0);
      if (c < best_cost) {
        best_cost = c;
        best = gi;
      }
    }
    move(best, to_test ? 1.0 : -1.0);
    test_groups = to_test ? 1 : test_groups - 1;
  }

  // Refinement: apply the single best improving flip until none is left.
  for (std::size_t round = 0; round < groups.size(); ++round) {
    const double current = cost_with(groups[0], 0.0);
    std::size_t best = groups.size();
    double best_cost = current;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      if (in_test[gi] ? test_groups == 1
                      : test_groups + 1 ==
                            static_cast<std::ptrdiff_t>(groups.size())) {
        continue;
      }
      const double c = cost_with(groups[gi], flip_sign(gi));
      if (c < best_cost) {
        best_cost = c;
        best = gi;
      }
    }
    if (best == groups.size() || !(best_cost < current - 1e-15)) break;
    test_groups += in_test[best] ? -1 : 1;
    move(best, flip_sign(best));
  }

  SplitAssignment out;
  out.seed = seed;
  out.test_fraction_target = test_fraction;
  out.stratify_key = stratify_key;
  out.achieved_test_fraction = test_count / total;
  std::size_t largest = 0;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    largest = std::max(largest, groups[gi].rows.size());
    for (auto i : groups[gi].rows) {
      out.assignment[meta[i].sample_id] =
          in_test[gi] ? SplitTag::kTest : SplitTag::kTrain;
    }
  }
  const double largest_share = static_cast<double>(largest) / total;
  if (largest_share > std::max(test_fraction, 1.0 - test_fraction)) {
    out.warnings.push_back("largest video holds " +
                           std::to_string(largest_share) +
                           " of all samples; the test fraction target is "
                           "unreachable");
  }
  if (std::abs(out.achieved_test_fraction - test_fraction) > 0.10) {
    out.warnings.push_back("achieved test fraction " +
                           std::to_string(out.achieved_test_fraction) +
                           " is more than 0.10 from the target");
  }
  return out;
}

MetaTable apply_split(const MetaTable& meta, const SplitAssignment& assignment) {
  std::vector<MetaRow> rows = meta.rows();
  for (auto& row : rows) {
    auto it = assignment.assignment.find(row.sample_id);
    row.split = it == assignment.assignment.end() ? SplitTag::kUnassigned
                                                  : it->second;
  }
  return MetaTable(std::move(rows));
}

SplitLists split_to_lists(const SplitAssignment& assignment) {
  SplitLists lists;
  for (const auto& [id, tag] : assignment.assignment) {  // map: sorted
    if (tag == SplitTag::kTrain) lists.train.push_back(id);
    if (tag == SplitTag::kTest) lists.test.push_back(id);
  }
  return lists;
}

void write_split_lists(const SplitLists& lists,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::vector<std::string>& ids, const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIo, "cannot write '" + (dir / name).string() + "'");
    }
    for (const auto& id : ids) out << id << '\n';
  };
  write(lists.train, "train.txt");
  write(lists.test, "test.txt");
}

std::vector<std::string> read_id_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

}  // namespace evalkit
