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


#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "evalkit/embedding_store.hpp"
#include "evalkit/error.hpp"
#include "evalkit/leakage_audit.hpp"
#include "evalkit/baseline_metrics.hpp"
#include "evalkit/parallel.hpp"
#include "evalkit/tactile_metrics.hpp"

namespace py = pybind11;

namespace {

using evalkit::EmbeddingSet;
using evalkit::Error;
using evalkit::ErrorCode;

std::vector<std::string> default_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return ids;
}

// Rows are quantized to 32 bits exactly as the file path would store them.
EmbeddingSet to_set(const py::array& array,
                    std::optional<std::vector<std::string>> ids,
                    const char* name) {
  if (array.ndim() != 2) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(name) + ": expected a 2-d array, got " +
                    std::to_string(array.ndim()) + " dimensions");
  }
  if (!(array.flags() & py::array::c_style)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + ": array must be C-contiguous");
  }
  const auto n = static_cast<std::size_t>(array.shape(0));
  const auto d = static_cast<std::size_t>(array.shape(1));
  std::vector<float> values(n * d);
  if (array.dtype().is(py::dtype::of<float>())) {
    const auto* p = static_cast<const float*>(array.data());
    values.assign(p, p + n * d);
  } else if (array.dtype().is(py::dtype::of<double>())) {
    const auto* p = static_cast<const double*>(array.data());
    for (std::size_t i = 0; i < n * d; ++i) values[i] = static_cast<float>(p[i]);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + ": dtype must be float32 or float64");
  }
  if (ids && ids->size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(name) + ": " + std::to_string(ids->size()) +
                    " ids for " + std::to_string(n) + " rows");
  }
  return EmbeddingSet(d, ids ? std::move(*ids) : default_ids(n),
                      std::move(values));
}

evalkit::MmdConfig config(std::optional<double> sigma) {
  return sigma ? evalkit::MmdConfig::fixed(*sigma)
               : evalkit::MmdConfig::median();
}

evalkit::SplitStrategy strategy(const std::string& mode, std::uint64_t seed,
                                std::uint32_t repeats) {
  if (mode == "interleave") return evalkit::SplitStrategy::interleave();
  if (mode == "random") {
    return evalkit::SplitStrategy::seeded_random(seed, repeats);
  }
  throw Error(ErrorCode::kInvalidArgument,
              "split mode must be 'random' or 'interleave', got '" + mode +
                  "'");
}

evalkit::ClassPartition partition(
    const EmbeddingSet& set,
    const std::vector<std::optional<std::string>>& labels) {
  if (labels.size() != set.count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(labels.size()) + " labels for " +
                    std::to_string(set.count()) + " rows");
  }
  std::vector<evalkit::MetaRow> rows(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    rows[i].sample_id = set.ids()[i];
    rows[i].class_label = labels[i];
  }
  return evalkit::partition_by_class(set, evalkit::MetaTable(std::move(rows)));
}

std::string dump(const evalkit::MetricReport& report) {
  return evalkit::to_json(report).dump();
}

}  // namespace

PYBIND11_MODULE(_evalkit, m) {
  m.doc() = "Native core of tactile_evalkit. Functions return JSON reports.";
  py::register_exception<Error>(m, "EvalkitError", PyExc_ValueError);

  m.def("set_max_threads", &evalkit::set_max_threads, py::arg("n"));

  m.def(
      "tmmd",
      [](const py::array& g, const py::array& r, std::optional<double> sigma) {
        const auto gs = to_set(g, std::nullopt, "generated");
        const auto rs = to_set(r, std::nullopt, "reference");
        py::gil_scoped_release release;
        return dump(evalkit::tmmd(gs, rs, config(sigma)));
      },
      py::arg("generated"), py::arg("reference"), py::arg("sigma") = py::none());

  m.def(
      "embedding_mmd",
      [](const py::array& g, const py::array& r, std::optional<double> sigma) {
        const auto gs = to_set(g, std::nullopt, "generated");
        const auto rs = to_set(r, std::nullopt, "reference");
        py::gil_scoped_release release;
        return dump(evalkit::embedding_mmd(gs, rs, config(sigma)));
      },
      py::arg("generated"), py::arg("reference"), py::arg("sigma") = py::none());

  m.def(
      "reference_free",
      [](const py::array& g, const std::string& which,
         std::optional<std::vector<std::optional<std::string>>> labels,
         std::optional<std::vector<std::string>> ids,
         std::optional<double> sigma, std::uint64_t seed,
         std::uint32_t repeats, const std::string& split_mode) {
        const auto set = to_set(g, std::move(ids), "generated");
        const auto split = strategy(split_mode, seed, repeats);
        if (which == "itmmd") {
          py::gil_scoped_release release;
          return dump(evalkit::i_tmmd(set, config(sigma), split));
        }
        if (which != "citmmd" && which != "dtmmd") {
          throw Error(ErrorCode::kInvalidArgument,
                      "which must be itmmd, citmmd or dtmmd, got '" + which +
                          "'");
        }
        if (!labels) {
          throw Error(ErrorCode::kInvalidArgument,
                      which + " needs class labels");
        }
        const auto parts = partition(set, *labels);
        py::gil_scoped_release release;
        return dump(which == "citmmd"
                        ? evalkit::ci_tmmd(set, parts, config(sigma), split)
                        : evalkit::d_tmmd(set, parts, config(sigma), split));
      },
      py::arg("generated"), py::arg("which"), py::arg("labels") = py::none(),
      py::arg("ids") = py::none(), py::arg("sigma") = py::none(),
      py::arg("seed") = 0, py::arg("repeats") = 5,
      py::arg("split_mode") = "random");

  m.def(
      "audit",
      [](const std::string& meta_jsonl, std::optional<py::array> embeddings,
         std::optional<std::vector<std::string>> ids, double tau) {
        const auto meta = evalkit::parse_meta(meta_jsonl);
        std::optional<EmbeddingSet> set;
        if (embeddings) {
          if (!ids) {
            std::vector<std::string> from_meta;
            for (const auto& row : meta.rows()) from_meta.push_back(row.sample_id);
            ids = std::move(from_meta);
          }
          set = to_set(*embeddings, std::move(ids), "embeddings");
        }
        py::gil_scoped_release release;
        return dump(evalkit::audit_split(meta, set ? &*set : nullptr, tau)
                        .to_report());
      },
      py::arg("meta_jsonl"), py::arg("embeddings") = py::none(),
      py::arg("ids") = py::none(),
      py::arg("tau") = evalkit::kDefaultDuplicateThreshold);
}
