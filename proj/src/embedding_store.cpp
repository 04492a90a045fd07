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

#include "evalkit/embedding_store.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "evalkit/error.hpp"

namespace evalkit {
namespace {

constexpr char kMagic[4] = {'T', 'E', 'M', 'B'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 1;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncated,
                  std::string("TEMB payload truncated while reading ") + what);
    }
  }

  template <typename T>
  T read_le(const char* what) {
    need(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
  }
}

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

SplitTag parse_split(const std::string& s, std::size_t line_no) {
  if (s == "train") return SplitTag::kTrain;
  if (s == "test") return SplitTag::kTest;
  if (s == "unassigned") return SplitTag::kUnassigned;
  throw Error(ErrorCode::kMalformedRecord,
              "metadata line " + std::to_string(line_no) +
                  ": unknown split '" + s + "'");
}

}  // namespace

EmbeddingSet::EmbeddingSet(std::size_t dim, std::vector<std::string> ids,
                           std::vector<float> values)
    : dim_(dim), ids_(std::move(ids)), values_(std::move(values)) {
  if (dim_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dim must be >= 1");
  }
  if (values_.size() != ids_.size() * dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding value count does not equal count * dim");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::kNonFinite,
                  "non-finite embedding value in row " +
                      std::to_string(i / dim_) + " ('" + ids_[i / dim_] +
                      "')");
    }
  }
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "duplicate sample id '" + ids_[i] + "'");
    }
  }
}

std::optional<std::size_t> EmbeddingSet::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingSet EmbeddingSet::subset(std::span<const std::size_t> indices) const {
  std::vector<std::string> ids;
  std::vector<float> values;
  ids.reserve(indices.size());
  values.reserve(indices.size() * dim_);
  for (auto i : indices) {
    ids.push_back(ids_.at(i));
    auto r = row(i);
    values.insert(values.end(), r.begin(), r.end());
  }
  return EmbeddingSet(dim_, std::move(ids), std::move(values));
}

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::kTrain:
      return "train";
    case SplitTag::kTest:
      return "test";
    case SplitTag::kUnassigned:
      break;
  }
  return "unassigned";
}

MetaTable::MetaTable(std::vector<MetaRow> rows) : rows_(std::move(rows)) {
  std::set<std::pair<std::string, std::int64_t>> frames;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& row = rows_[i];
    if (!index_.emplace(row.sample_id, i).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "duplicate sample id '" + row.sample_id + "' in metadata");
    }
    if (row.frame_index && *row.frame_index < 0) {
      throw Error(ErrorCode::kMalformedRecord,
                  "negative frame_index for '" + row.sample_id + "'");
    }
    if (row.video_id && row.frame_index &&
        !frames.emplace(*row.video_id, *row.frame_index).second) {
      throw Error(ErrorCode::kDuplicateFrame,
                  "duplicate frame " + std::to_string(*row.frame_index) +
                      " in video '" + *row.video_id + "'");
    }
  }
}

const MetaRow* MetaTable::find(std::string_view sample_id) const {
  auto it = index_.find(std::string(sample_id));
  return it == index_.end() ? nullptr : &rows_[it->second];
}

std::map<std::string, std::vector<std::size_t>> MetaTable::videos() const {
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].video_id) out[*rows_[i].video_id].push_back(i);
  }
  return out;
}

std::size_t ClassPartition::labeled_count() const {
  std::size_t n = 0;
  for (const auto& m : members) n += m.size();
  return n;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes) {
  ByteReader reader(bytes);
  auto magic = reader.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic)) {
    throw Error(ErrorCode::kBadMagic, "not a TEMB file (bad magic)");
  }
  auto version = reader.read_le<std::uint16_t>("version");
  if (version != kVersion) {
    throw Error(ErrorCode::kBadVersion,
                "unsupported TEMB version " + std::to_string(version));
  }
  auto dtype = reader.read_le<std::uint8_t>("dtype");
  if (dtype != kDtypeF32) {
    throw Error(ErrorCode::kBadDtype,
                "unsupported TEMB dtype tag " + std::to_string(dtype));
  }
  auto n = reader.read_le<std::uint64_t>("n");
  auto d = reader.read_le<std::uint64_t>("d");
  if (d == 0) {
    throw Error(ErrorCode::kInvalidArgument, "TEMB dim must be >= 1");
  }
  auto id_count = reader.read_le<std::uint32_t>("id count");
  if (id_count != n) {
    throw Error(ErrorCode::kMalformedRecord,
                "TEMB id count " + std::to_string(id_count) +
                    " does not match n " + std::to_string(n));
  }
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    auto len = reader.read_le<std::uint32_t>("id length");
    auto raw = reader.take(len, "id bytes");
    ids.emplace_back(raw.begin(), raw.end());
  }
  // Guard the multiplication before sizing the buffer.
  if (n != 0 && d > reader.remaining() / 4 / n) {
    throw Error(ErrorCode::kTruncated, "TEMB payload truncated in values");
  }
  std::vector<float> values(n * d);
  for (auto& v : values) {
    v = std::bit_cast<float>(reader.read_le<std::uint32_t>("values"));
  }
  if (reader.remaining() != 0) {
    throw Error(ErrorCode::kTrailingData,
                "TEMB file has " + std::to_string(reader.remaining()) +
                    " trailing bytes");
  }
  return EmbeddingSet(d, std::move(ids), std::move(values));
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& set) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint8_t>(out, kDtypeF32);
  put_le<std::uint64_t>(out, set.count());
  put_le<std::uint64_t>(out, set.dim());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.count()));
  for (const auto& id : set.ids()) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out.insert(out.end(), id.begin(), id.end());
  }
  out.reserve(out.size() + set.values().size() * 4);
  for (float v : set.values()) {
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  return decode_embeddings(bytes);
}

void write_embeddings(const EmbeddingSet& set,
                      const std::filesystem::path& path) {
  auto bytes = encode_embeddings(set);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

EmbeddingSet load_embeddings_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMalformedRecord, "CSV file has no header");
  }
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "sample_id" || header.size() < 2) {
    throw Error(ErrorCode::kMalformedRecord,
                "CSV header must be sample_id followed by value columns");
  }
  const std::size_t dim = header.size() - 1;
  std::vector<std::string> ids;
  std::vector<float> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kMalformedRecord,
                  "CSV line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    ids.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      float v = 0;
      const auto& f = fields[j];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw Error(ErrorCode::kMalformedRecord,
                    "CSV line " + std::to_string(line_no) +
                        ": bad number '" + f + "'");
      }
      values.push_back(v);
    }
  }
  return EmbeddingSet(dim, std::move(ids), std::move(values));
}

EmbeddingSet load_embeddings_any(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return load_embeddings_csv(path);
  return load_embeddings(path);
}

MetaTable parse_meta(std::string_view text) {
  std::vector<MetaRow> rows;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;

    auto fail = [&](const std::string& why) {
      return Error(ErrorCode::kMalformedRecord,
                   "metadata line " + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw fail(e.what());
    }
    if (!record.is_object()) throw fail("record is not a JSON object");

    MetaRow row;
    auto id = record.find("sample_id");
    if (id == record.end() || !id->is_string()) {
      throw fail("missing string field sample_id");
    }
    row.sample_id = id->get<std::string>();
    if (auto v = record.find("video_id"); v != record.end() && !v->is_null()) {
      if (!v->is_string()) throw fail("video_id must be a string");
      row.video_id = v->get<std::string>();
    }
    if (auto f = record.find("frame_index");
        f != record.end() && !f->is_null()) {
      if (!f->is_number_integer()) throw fail("frame_index must be an integer");
      row.frame_index = f->get<std::int64_t>();
    }
    if (auto c = record.find("class"); c != record.end() && !c->is_null()) {
      if (!c->is_string()) throw fail("class must be a string");
      row.class_label = c->get<std::string>();
    }
    if (auto s = record.find("split"); s != record.end() && !s->is_null()) {
      if (!s->is_string()) throw fail("split must be a string");
      row.split = parse_split(s->get<std::string>(), line_no);
    }
    rows.push_back(std::move(row));
  }
  return MetaTable(std::move(rows));
}

MetaTable load_meta(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  return parse_meta(std::string_view(
      reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string format_meta(const MetaTable& table) {
  std::string out;
  for (const auto& row : table.rows()) {
    nlohmann::json record;
    record["sample_id"] = row.sample_id;
    if (row.video_id) record["video_id"] = *row.video_id;
    if (row.frame_index) record["frame_index"] = *row.frame_index;
    if (row.class_label) record["class"] = *row.class_label;
    if (row.split != SplitTag::kUnassigned) {
      record["split"] = std::string(to_string(row.split));
    }
    out += record.dump();
    out += '\n';
  }
  return out;
}

void write_meta(const MetaTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  }
  out << format_meta(table);
}

ClassPartition partition_by_class(const EmbeddingSet& embeddings,
                                  const MetaTable& meta) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (const auto& row : meta.rows()) {
    if (!row.class_label) continue;
    auto idx = embeddings.find(row.sample_id);
    if (!idx) {
      throw Error(ErrorCode::kMissingSample,
                  "labeled sample '" + row.sample_id +
                      "' is missing from the embeddings");
    }
    groups[*row.class_label].push_back(*idx);
  }
  ClassPartition partition;
  for (auto& [label, indices] : groups) {
    std::sort(indices.begin(), indices.end());
    partition.classes.push_back(label);
    partition.members.push_back(std::move(indices));
  }
  return partition;
}

}  // namespace evalkit
