// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "alignkit/datamodel.hpp"

namespace alignkit {

// On-disk layout, little-endian throughout:
//   "MTAP" | u32 version | u32 dim | u64 count |
//   count x ( u32 id_length | id bytes | dim x f32 )
// No padding and no trailing bytes.
inline constexpr char kStoreMagic[4] = {'M', 'T', 'A', 'P'};
inline constexpr std::uint32_t kStoreVersion = 1;

struct EmbeddingEntry {
  std::string id;
  EmbeddingVector values;
};

/// Id-indexed matrix of embeddings. Immutable once built; rows are kept in
/// double precision even though the file stores 32-bit floats.
class EmbeddingStore {
 public:
  /// Builds a store from entries. Throws on mixed dims, duplicate ids,
  /// non-finite values, or dim == 0.
  EmbeddingStore(std::size_t dim, std::span<const EmbeddingEntry> entries);

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& rows() const { return rows_; }

  bool contains(std::string_view id) const;

  /// Row for `id`; throws a missing-embedding data error naming the id.
  EmbeddingVector lookup(std::string_view id) const;

  /// Row ordinal for `id`, or throws like lookup().
  std::size_t row_index(std::string_view id) const;

  /// Row ordinal for a manifest record id: the id itself if stored, else
  /// the id it was reformulated from (see origin_id).
  std::size_t record_row(std::string_view record_id) const;

  /// Stacks the rows for record ids (resolved like record_row) into a
  /// |ids| x dim matrix.
  Matrix gather(std::span<const std::string> ids) const;

  bool operator==(const EmbeddingStore& other) const;

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  Matrix rows_;
};

/// Serializes entries into the binary store format.
std::string encode_store(std::size_t dim, std::span<const EmbeddingEntry> entries);
std::string encode_store(const EmbeddingStore& store);

/// Parses the binary format; `source` names the input in error messages.
EmbeddingStore decode_store(std::string_view bytes, std::string_view source = "<memory>");

void write_store(const std::filesystem::path& path, std::size_t dim,
                 std::span<const EmbeddingEntry> entries);
void write_store(const std::filesystem::path& path, const EmbeddingStore& store);
EmbeddingStore read_store(const std::filesystem::path& path);

struct ToyFeaturizerConfig {
  std::size_t dim = 64;
  std::uint64_t seed = 0;
  std::size_t ngram = 3;
};

void check_config(const ToyFeaturizerConfig& cfg);

/// Hermetic stand-in for a frozen backbone: signed feature hashing of the
/// byte n-grams of each field (salted per field and by seed), L2-normalized.
/// Inputs that hash to the zero vector fall back to a seeded unit basis
/// vector, so the output always has unit norm.
EmbeddingVector toy_featurize(std::string_view image_bytes, std::string_view request,
                              std::string_view candidate, const ToyFeaturizerConfig& cfg);

}  // namespace alignkit
