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

// Embedding sets and per-sample metadata, plus their on-disk formats.
//
// TEMB layout (little-endian, no padding):
//   "TEMB" | u16 version=1 | u8 dtype=1 (f32) | u64 n | u64 d
//   | u32 id_count (=n) | { u32 byte_len | utf-8 bytes } * n
//   | f32 values[n*d], row-major
//
// Metadata is newline-delimited JSON with keys sample_id (required),
// video_id, frame_index, class, split.

#ifndef EVALKIT_EMBEDDING_STORE_HPP_
#define EVALKIT_EMBEDDING_STORE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace evalkit {

// Dense row-major n x d matrix of 32-bit values with one unique string id per
// row. Construction validates every invariant, so a live EmbeddingSet is
// always well-formed.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  EmbeddingSet(std::size_t dim, std::vector<std::string> ids,
               std::vector<float> values);

  std::size_t count() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<float>& values() const { return values_; }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }

  // Row index of `id`, if present.
  std::optional<std::size_t> find(std::string_view id) const;

  // New set containing rows `indices` in the given order.
  EmbeddingSet subset(std::span<const std::size_t> indices) const;

 private:
  std::size_t dim_ = 1;
  std::vector<std::string> ids_;
  std::vector<float> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class SplitTag { kUnassigned, kTrain, kTest };

std::string_view to_string(SplitTag tag);

struct MetaRow {
  std::string sample_id;
  std::optional<std::string> video_id;
  std::optional<std::int64_t> frame_index;
  std::optional<std::string> class_label;
  SplitTag split = SplitTag::kUnassigned;
};

// Sample metadata in file order. Sample ids are unique and (video_id,
// frame_index) pairs are unique whenever both are present.
class MetaTable {
 public:
  MetaTable() = default;
  explicit MetaTable(std::vector<MetaRow> rows);

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const std::vector<MetaRow>& rows() const { return rows_; }
  const MetaRow& operator[](std::size_t i) const { return rows_[i]; }

  const MetaRow* find(std::string_view sample_id) const;

  // video_id -> row indices, in file order. Rows without a video id are not
  // included.
  std::map<std::string, std::vector<std::size_t>> videos() const;

 private:
  std::vector<MetaRow> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Labeled rows of an EmbeddingSet grouped by class label. Classes are in
// lexicographic order; indices within a class ascend.
struct ClassPartition {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> members;

  std::size_t class_count() const { return classes.size(); }
  std::size_t labeled_count() const;
};

EmbeddingSet load_embeddings(const std::filesystem::path& path);
EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& set);
void write_embeddings(const EmbeddingSet& set,
                      const std::filesystem::path& path);

// CSV with header `sample_id,<d value columns>`.
EmbeddingSet load_embeddings_csv(const std::filesystem::path& path);

// Dispatches on extension: `.csv` goes to the CSV reader, anything else is
// read as TEMB.
EmbeddingSet load_embeddings_any(const std::filesystem::path& path);

MetaTable load_meta(const std::filesystem::path& path);
MetaTable parse_meta(std::string_view text);
std::string format_meta(const MetaTable& table);
void write_meta(const MetaTable& table, const std::filesystem::path& path);

ClassPartition partition_by_class(const EmbeddingSet& embeddings,
                                  const MetaTable& meta);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace evalkit

#endif  // EVALKIT_EMBEDDING_STORE_HPP_
