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

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "evalkit/baseline_metrics.hpp"
#include "evalkit/embedding_store.hpp"
#include "evalkit/error.hpp"
#include "evalkit/leakage_audit.hpp"
#include "evalkit/parallel.hpp"
#include "evalkit/report.hpp"
#include "evalkit/synth_bench.hpp"
#include "evalkit/tactile_metrics.hpp"

namespace evalkit {
namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string out;
  std::optional<double> sigma;
  bool median = false;
  std::uint64_t seed = 0;
  std::uint32_t splits = 5;
  std::string split_mode = "random";
  std::string format = "json";
  std::size_t threads = 0;
  bool verbose = false;

  MmdConfig mmd() const {
    return sigma ? MmdConfig::fixed(*sigma) : MmdConfig::median();
  }
  SplitStrategy split() const {
    return split_mode == "interleave"
               ? SplitStrategy::interleave()
               : SplitStrategy::seeded_random(seed, splits);
  }
  ReportFormat report_format() const {
    return format == "csv-summary" ? ReportFormat::kCsvSummary
                                   : ReportFormat::kJson;
  }
};

struct Inputs {
  std::string generated, reference, meta;
  std::string a, b;
  std::string queries, gallery, pairs, train, test, embeddings;
  std::string ks = "1,5";
  std::size_t k = 5;
  double tau = kDefaultDuplicateThreshold;
  double test_frac = 0.2;
  bool stratify = false;
  std::string out_dir = ".";
  std::string scenario = "clean";
  ScenarioSpec spec;
};

void add_common(CLI::App& app, CommonFlags& f) {
  app.add_option("--out", f.out, "Report path (default: stdout)");
  auto* sigma = app.add_option("--sigma", f.sigma, "Fixed kernel bandwidth")
                    ->check(CLI::PositiveNumber);
  auto* median =
      app.add_flag("--median", f.median, "Median-heuristic bandwidth (default)");
  sigma->excludes(median);
  median->excludes(sigma);
  app.add_option("--seed", f.seed, "Random seed");
  app.add_option("--splits", f.splits, "Random split repeats")
      ->check(CLI::PositiveNumber);
  app.add_option("--split-mode", f.split_mode, "Half-split mode")
      ->check(CLI::IsMember({"random", "interleave"}));
  app.add_option("--format", f.format, "Report format")
      ->check(CLI::IsMember({"json", "csv-summary"}));
  app.add_option("--threads", f.threads, "Worker thread cap")
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose", f.verbose, "Timing diagnostics on stderr");
}

void add_spec_options(CLI::App* app, ScenarioSpec& spec) {
  app->add_option("--classes", spec.classes)->check(CLI::PositiveNumber);
  app->add_option("--videos", spec.videos_per_class)->check(CLI::PositiveNumber);
  app->add_option("--frames", spec.frames_per_video)->check(CLI::PositiveNumber);
  app->add_option("--dim", spec.dim)->check(CLI::PositiveNumber);
  app->add_option("--rho", spec.rho)->check(CLI::Range(0.0, 1.0));
  app->add_option("--separation", spec.class_separation)
      ->check(CLI::NonNegativeNumber);
  app->add_option("--noise", spec.noise_scale)->check(CLI::NonNegativeNumber);
  app->add_option("--gen-noise", spec.generator_noise)
      ->check(CLI::NonNegativeNumber);
}

CLI::Option* existing(CLI::App* app, const std::string& name,
                      std::string& target, const std::string& help) {
  return app->add_option(name, target, help)->check(CLI::ExistingFile);
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      long v = std::stol(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      ks.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--k: expected comma-separated positive integers, got '" +
                      text + "'");
    }
  }
  if (ks.empty()) throw Error(ErrorCode::kInvalidArgument, "--k: empty list");
  return ks;
}

std::map<std::string, std::string> load_pairs(const fs::path& path) {
  std::map<std::string, std::string> pairs;
  const auto bytes = read_file_bytes(path);
  std::stringstream ss(std::string(bytes.begin(), bytes.end()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  "--pairs line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("query") ||
        !record.contains("gallery") || !record["query"].is_string() ||
        !record["gallery"].is_string()) {
      throw Error(ErrorCode::kMalformedRecord,
                  "--pairs line " + std::to_string(line_no) +
                      ": expected {\"query\": id, \"gallery\": id}");
    }
    auto query = record["query"].get<std::string>();
    if (!pairs.emplace(query, record["gallery"].get<std::string>()).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "--pairs: query '" + query + "' is paired twice");
    }
  }
  return pairs;
}

std::vector<std::string> labels_for(const EmbeddingSet& set,
                                    const MetaTable& meta, const char* flag) {
  std::vector<std::string> labels;
  for (const auto& id : set.ids()) {
    const auto* row = meta.find(id);
    if (row == nullptr || !row->class_label) {
      throw Error(ErrorCode::kMissingSample,
                  std::string(flag) + ": sample '" + id +
                      "' has no class label in --meta");
    }
    labels.push_back(*row->class_label);
  }
  return labels;
}

void record_input(MetricReport& report, const std::string& path) {
  if (!path.empty()) report.inputs[path] = file_sha256(path);
}

void emit(const MetricReport& report, const CommonFlags& flags,
          std::ostream& out) {
  const auto text = format_report(report, flags.report_format());
  if (flags.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(flags.out, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIo, "--out: cannot write '" + flags.out + "'");
  file << text;
}

ClassPartition partition_from(const EmbeddingSet& g, const std::string& meta) {
  if (meta.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "--meta is required for class-aware metrics");
  }
  return partition_by_class(g, load_meta(meta));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Evaluation metrics and leakage audits for embedding-based "
               "generative models",
               "evalkit"};
  app.require_subcommand(1);
  app.fallthrough();
  CommonFlags flags;
  Inputs in;
  add_common(app, flags);

  std::function<MetricReport()> action;

  // metrics
  auto* metrics = app.add_subcommand("metrics", "MMD-family metrics");
  metrics->require_subcommand(1);
  auto add_metric = [&](const std::string& name, const std::string& help,
                        bool needs_reference, bool needs_meta) {
    auto* sub = metrics->add_subcommand(name, help);
    existing(sub, "--generated", in.generated, "Generated embeddings")
        ->required();
    auto* ref = existing(sub, "--reference", in.reference,
                         "Reference embeddings");
    auto* meta = existing(sub, "--meta", in.meta, "Metadata (class labels)");
    if (needs_reference) ref->required();
    if (needs_meta) meta->required();
    return sub;
  };
  add_metric("tmmd", "MMD^2 of generated vs. reference", true, false)->callback([&] {
    action = [&] {
      auto r = tmmd(load_embeddings_any(in.generated),
                    load_embeddings_any(in.reference), flags.mmd());
      record_input(r, in.generated);
      record_input(r, in.reference);
      return r;
    };
  });
  add_metric("embedding-mmd", "Generic embedding MMD^2", true, false)->callback([&] {
    action = [&] {
      auto r = embedding_mmd(load_embeddings_any(in.generated),
                             load_embeddings_any(in.reference), flags.mmd());
      record_input(r, in.generated);
      record_input(r, in.reference);
      return r;
    };
  });
  add_metric("itmmd", "MMD^2 between halves of the generated set", false, false)->callback([&] {
    action = [&] {
      auto g = load_embeddings_any(in.generated);
      MetricReport r;
      if (in.meta.empty()) {
        r = i_tmmd(g, flags.mmd(), flags.split());
      } else {
        // Restrict to the samples listed in the metadata.
        auto meta = load_meta(in.meta);
        std::vector<std::size_t> rows;
        for (const auto& row : meta.rows()) {
          auto idx = g.find(row.sample_id);
          if (!idx) {
            throw Error(ErrorCode::kMissingSample,
                        "--meta: sample '" + row.sample_id +
                            "' is missing from --generated");
          }
          rows.push_back(*idx);
        }
        r = i_tmmd(g.subset(rows), flags.mmd(), flags.split());
      }
      record_input(r, in.generated);
      record_input(r, in.meta);
      return r;
    };
  });
  add_metric("citmmd", "Per-class itmmd, averaged", false, true)->callback([&] {
    action = [&] {
      auto g = load_embeddings_any(in.generated);
      auto r = ci_tmmd(g, partition_from(g, in.meta), flags.mmd(),
                       flags.split());
      record_input(r, in.generated);
      record_input(r, in.meta);
      return r;
    };
  });
  add_metric("dtmmd", "Class diversity from the divergence matrix", false, true)->callback([&] {
    action = [&] {
      auto g = load_embeddings_any(in.generated);
      auto r = d_tmmd(g, partition_from(g, in.meta), flags.mmd(),
                      flags.split());
      record_input(r, in.generated);
      record_input(r, in.meta);
      return r;
    };
  });

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Comparison metrics");
  baseline->require_subcommand(1);
  auto* fid_cmd = baseline->add_subcommand("fid", "Frechet distance");
  existing(fid_cmd, "--a", in.a, "First embeddings")->required();
  existing(fid_cmd, "--b", in.b, "Second embeddings")->required();
  fid_cmd->callback([&] {
    action = [&] {
      MetricReport r;
      r.metric = "fid";
      r.value = fid(fit_gaussian(load_embeddings_any(in.a)),
                    fit_gaussian(load_embeddings_any(in.b)));
      record_input(r, in.a);
      record_input(r, in.b);
      return r;
    };
  });
  for (const std::string name : {"ssim", "psnr"}) {
    auto* sub = baseline->add_subcommand(name, "Pairwise image metric");
    existing(sub, "--a", in.a, "First PNG image")->required();
    existing(sub, "--b", in.b, "Second PNG image")->required();
    sub->callback([&, name] {
      action = [&, name] {
        MetricReport r;
        r.metric = name;
        auto x = load_png(in.a);
        auto y = load_png(in.b);
        r.value = name == "ssim" ? ssim(x, y) : psnr(x, y);
        record_input(r, in.a);
        record_input(r, in.b);
        return r;
      };
    });
  }
  auto* retrieval = baseline->add_subcommand("retrieval", "Top-k retrieval");
  existing(retrieval, "--queries", in.queries, "Query embeddings")->required();
  existing(retrieval, "--gallery", in.gallery, "Gallery embeddings")
      ->required();
  existing(retrieval, "--pairs", in.pairs, "JSONL {query, gallery} pairs")
      ->required();
  retrieval->add_option("--k", in.ks, "Comma-separated k values");
  retrieval->callback([&] {
    action = [&] {
      const auto ks = parse_ks(in.ks);
      auto res = retrieval_topk(load_embeddings_any(in.queries),
                                load_embeddings_any(in.gallery),
                                load_pairs(in.pairs), ks);
      MetricReport r;
      r.metric = "retrieval";
      r.value = res.top1;
      r.extra["top1"] = json_number(res.top1);
      r.extra["top5"] = json_number(res.top5);
      nlohmann::json topk = nlohmann::json::object();
      for (const auto& [k, v] : res.top_k) topk[std::to_string(k)] = json_number(v);
      r.extra["top_k"] = topk;
      nlohmann::json ranks = nlohmann::json::object();
      for (std::size_t q = 0; q < res.ranks.size(); ++q) {
        ranks[res.query_ids[q]] = res.ranks[q];
      }
      r.extra["ranks"] = ranks;
      record_input(r, in.queries);
      record_input(r, in.gallery);
      record_input(r, in.pairs);
      return r;
    };
  });
  auto* knn = baseline->add_subcommand("knn", "k-NN classification probe");
  existing(knn, "--train", in.train, "Train embeddings")->required();
  existing(knn, "--test", in.test, "Test embeddings")->required();
  existing(knn, "--meta", in.meta, "Metadata with class labels")->required();
  knn->add_option("--k", in.k, "Neighbors (odd)")->check(CLI::PositiveNumber);
  knn->callback([&] {
    action = [&] {
      auto train = load_embeddings_any(in.train);
      auto test = load_embeddings_any(in.test);
      auto meta = load_meta(in.meta);
      MetricReport r;
      r.metric = "knn";
      r.value = knn_probe(train, labels_for(train, meta, "--train"), test,
                          labels_for(test, meta, "--test"), in.k);
      r.extra["k"] = in.k;
      record_input(r, in.train);
      record_input(r, in.test);
      record_input(r, in.meta);
      return r;
    };
  });

  // audit / split / synth / study
  auto* audit = app.add_subcommand("audit", "Leakage audit of a tagged split");
  existing(audit, "--meta", in.meta, "Metadata with split tags")->required();
  existing(audit, "--embeddings", in.embeddings,
           "Embeddings for near-duplicate search");
  audit->add_option("--tau", in.tau, "Cosine near-duplicate threshold");
  audit->callback([&] {
    action = [&] {
      auto meta = load_meta(in.meta);
      std::optional<EmbeddingSet> emb;
      if (!in.embeddings.empty()) emb = load_embeddings_any(in.embeddings);
      auto r = audit_split(meta, emb ? &*emb : nullptr, in.tau).to_report();
      record_input(r, in.meta);
      record_input(r, in.embeddings);
      return r;
    };
  });

  auto* split = app.add_subcommand("split", "Group-aware leakage-free split");
  existing(split, "--meta", in.meta, "Metadata")->required();
  split->add_option("--test-frac", in.test_frac, "Target test fraction");
  split->add_flag("--stratify", in.stratify, "Balance per-class fractions");
  split->add_option("--out-dir", in.out_dir, "Directory for train/test.txt");
  split->callback([&] {
    action = [&] {
      auto meta = load_meta(in.meta);
      auto assignment = make_noleak_split(
          meta, in.test_frac, flags.seed,
          in.stratify ? std::optional<std::string>("class") : std::nullopt);
      write_split_lists(split_to_lists(assignment), in.out_dir);
      auto r = assignment.to_report();
      record_input(r, in.meta);
      return r;
    };
  });

  auto* synth = app.add_subcommand("synth", "Write a synthetic scenario");
  synth->add_option("--scenario", in.scenario)
      ->check(CLI::IsMember({"clean", "collapse", "leakage"}));
  synth->add_option("--out-dir", in.out_dir, "Output directory");
  synth->add_option("--test-frac", in.spec.test_fraction,
                    "Leakage scenario test fraction");
  add_spec_options(synth, in.spec);
  synth->callback([&] {
    action = [&] {
      ScenarioSpec spec = in.spec;
      spec.scenario = parse_scenario(in.scenario);
      spec.seed = flags.seed;
      auto data = generate_scenario(spec);
      const fs::path dir = in.out_dir;
      fs::create_directories(dir);
      write_embeddings(data.embeddings, dir / "embeddings.temb");
      write_meta(data.meta, dir / "meta.jsonl");
      write_embeddings(data.generator_outputs, dir / "generated.temb");
      MetricReport r;
      r.metric = "synth";
      r.extra["scenario"] = std::string(to_string(spec.scenario));
      r.extra["seed"] = spec.seed;
      r.extra["samples"] = data.embeddings.count();
      r.extra["classes"] = spec.classes;
      r.extra["dim"] = spec.dim;
      r.extra["rho"] = json_number(spec.rho);
      nlohmann::json outputs = nlohmann::json::object();
      for (const char* name : {"embeddings.temb", "meta.jsonl", "generated.temb"}) {
        outputs[name] = file_sha256(dir / name);
      }
      r.extra["outputs"] = outputs;
      return r;
    };
  });

  auto* study = app.add_subcommand("study", "Leaked vs. leakage-free study");
  study->add_option("--test-frac", in.test_frac, "Target test fraction");
  add_spec_options(study, in.spec);
  study->callback([&] {
    action = [&] {
      ScenarioSpec spec = in.spec;
      spec.seed = flags.seed;
      return run_leak_study(spec, in.test_frac, flags.seed).to_report();
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "evalkit: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (flags.threads > 0) set_max_threads(flags.threads);
    const auto start = std::chrono::steady_clock::now();
    const auto report = action();
    emit(report, flags, out);
    if (flags.verbose) {
      const std::chrono::duration<double> took =
          std::chrono::steady_clock::now() - start;
      err << "evalkit: " << report.metric << " took " << took.count()
          << " s on up to " << max_threads() << " threads\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "evalkit: " << e.what() << "\n";
    return e.code() == ErrorCode::kNumerical ? kExitInternal : kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "evalkit: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "evalkit: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace evalkit
