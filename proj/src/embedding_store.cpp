// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "alignkit/embedding_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "alignkit/error.hpp"
#include "alignkit/hash.hpp"

namespace alignkit {

EmbeddingStore::EmbeddingStore(std::size_t dim, std::span<const EmbeddingEntry> entries)
    : dim_(dim) {
  if (dim == 0) throw data_error("embedding dimension must be positive");
  ids_.reserve(entries.size());
  index_.reserve(entries.size());
  rows_.resize(static_cast<Eigen::Index>(entries.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (static_cast<std::size_t>(e.values.size()) != dim) {
      throw data_error("dimension mismatch: entry '" + e.id + "' has " +
                       std::to_string(e.values.size()) + " values, store dim is " +
                       std::to_string(dim));
    }
    if (!e.values.allFinite()) throw data_error("entry '" + e.id + "' has non-finite values");
    if (!index_.emplace(e.id, i).second) throw data_error("duplicate id '" + e.id + "'");
    ids_.push_back(e.id);
    rows_.row(static_cast<Eigen::Index>(i)) = e.values.transpose();
  }
}

bool EmbeddingStore::contains(std::string_view id) const {
  return index_.contains(std::string(id));
}

std::size_t EmbeddingStore::row_index(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw data_error("missing embedding for id '" + std::string(id) + "'");
  return it->second;
}

std::size_t EmbeddingStore::record_row(std::string_view record_id) const {
  auto it = index_.find(std::string(record_id));
  if (it != index_.end()) return it->second;
  return row_index(origin_id(record_id));
}

EmbeddingVector EmbeddingStore::lookup(std::string_view id) const {
  return rows_.row(static_cast<Eigen::Index>(row_index(id))).transpose();
}

Matrix EmbeddingStore::gather(std::span<const std::string> ids) const {
  Matrix out(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = rows_.row(static_cast<Eigen::Index>(record_row(ids[i])));
  }
  return out;
}

bool EmbeddingStore::operator==(const EmbeddingStore& other) const {
  return dim_ == other.dim_ && ids_ == other.ids_ && rows_ == other.rows_;
}

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xFF));
    u = static_cast<U>(u >> 8);
  }
}

void put_f32(std::string& out, float f) { put_le(out, std::bit_cast<std::uint32_t>(f)); }

class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string_view source) : bytes_(bytes), source_(source) {}

  template <typename T>
  T get_le(const char* what) {
    need(sizeof(T), what);
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  float get_f32(const char* what) { return std::bit_cast<float>(get_le<std::uint32_t>(what)); }

  std::string_view get_bytes(std::size_t n, const char* what) {
    need(n, what);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (remaining() < n) {
      throw data_error(std::string(source_) + ": truncated store at byte offset " +
                       std::to_string(pos_) + " while reading " + what + " (need " +
                       std::to_string(n) + " bytes, have " + std::to_string(remaining()) + ")");
    }
  }

  std::string_view bytes_;
  std::string_view source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_store(std::size_t dim, std::span<const EmbeddingEntry> entries) {
  // Constructing the store runs every invariant check before anything is
  // encoded.
  return encode_store(EmbeddingStore(dim, entries));
}

std::string encode_store(const EmbeddingStore& store) {
  if (store.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw data_error("store dim does not fit in u32");
  }
  std::string out;
  out.reserve(20 + store.count() * (4 + 16 + 4 * store.dim()));
  out.append(kStoreMagic, sizeof(kStoreMagic));
  put_le(out, kStoreVersion);
  put_le(out, static_cast<std::uint32_t>(store.dim()));
  put_le(out, static_cast<std::uint64_t>(store.count()));
  const Matrix& rows = store.rows();
  for (std::size_t i = 0; i < store.count(); ++i) {
    const std::string& id = store.ids()[i];
    if (id.size() > std::numeric_limits<std::uint32_t>::max()) throw data_error("id too long");
    put_le(out, static_cast<std::uint32_t>(id.size()));
    out.append(id);
    for (std::size_t j = 0; j < store.dim(); ++j) {
      const double v = rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const float f = static_cast<float>(v);
      if (!std::isfinite(f)) {
        throw data_error("value of '" + id + "' overflows 32-bit float");
      }
      put_f32(out, f);
    }
  }
  return out;
}

EmbeddingStore decode_store(std::string_view bytes, std::string_view source) {
  ByteReader in(bytes, source);
  auto magic = in.get_bytes(4, "magic");
  if (std::memcmp(magic.data(), kStoreMagic, 4) != 0) {
    throw data_error(std::string(source) + ": format error: bad magic, not an embedding store");
  }
  const auto version = in.get_le<std::uint32_t>("version");
  if (version != kStoreVersion) {
    throw data_error(std::string(source) + ": format error: unsupported store version " + std::to_string(version));
  }
  const auto dim = in.get_le<std::uint32_t>("dim");
  const auto count = in.get_le<std::uint64_t>("count");
  if (dim == 0) throw data_error(std::string(source) + ": store dim is zero");
  // Every record needs at least 4 + 4*dim bytes; reject absurd counts before
  // allocating.
  const std::uint64_t min_record = 4 + 4ULL * dim;
  if (count > in.remaining() / min_record) {
    throw data_error(std::string(source) + ": truncated store at byte offset " +
                     std::to_string(bytes.size()) + ": header declares " + std::to_string(count) +
                     " records");
  }

  std::vector<EmbeddingEntry> entries(static_cast<std::size_t>(count));
  for (auto& e : entries) {
    const auto len = in.get_le<std::uint32_t>("id length");
    e.id = std::string(in.get_bytes(len, "id"));
    e.values.resize(dim);
    for (std::uint32_t j = 0; j < dim; ++j) {
      const float f = in.get_f32("row values");
      if (!std::isfinite(f)) {
        throw data_error(std::string(source) + ": non-finite value in row '" + e.id + "'");
      }
      e.values[j] = static_cast<double>(f);
    }
  }
  if (in.remaining() != 0) {
    throw data_error(std::string(source) + ": " + std::to_string(in.remaining()) +
                     " trailing bytes after byte offset " + std::to_string(in.offset()));
  }
  try {
    return EmbeddingStore(dim, entries);
  } catch (const Error& e) {
    throw data_error(std::string(source) + ": " + e.what());
  }
}

void write_store(const std::filesystem::path& path, std::size_t dim,
                 std::span<const EmbeddingEntry> entries) {
  write_store(path, EmbeddingStore(dim, entries));
}

void write_store(const std::filesystem::path& path, const EmbeddingStore& store) {
  const std::string bytes = encode_store(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw data_error("I/O error writing '" + path.string() + "'");
}

EmbeddingStore read_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_store(buf.view(), path.string());
}

void check_config(const ToyFeaturizerConfig& cfg) {
  if (cfg.dim < 8) throw usage_error("toy featurizer dim must be at least 8");
  if (cfg.ngram < 1) throw usage_error("toy featurizer ngram must be positive");
}

namespace {

void hash_field(std::string_view tag, std::string_view field, const ToyFeaturizerConfig& cfg,
                EmbeddingVector& acc) {
  if (field.empty()) return;
  const std::uint64_t salt = fnv1a64(tag, splitmix64(cfg.seed));
  const std::size_t n = std::min(cfg.ngram, field.size());
  for (std::size_t i = 0; i + n <= field.size(); ++i) {
    const std::uint64_t h = splitmix64(fnv1a64(field.substr(i, n), salt));
    const auto bucket = static_cast<Eigen::Index>(h % cfg.dim);
    acc[bucket] += (h >> 63) ? -1.0 : 1.0;
  }
}

}  // namespace

EmbeddingVector toy_featurize(std::string_view image_bytes, std::string_view request,
                              std::string_view candidate, const ToyFeaturizerConfig& cfg) {
  check_config(cfg);
  EmbeddingVector v = EmbeddingVector::Zero(static_cast<Eigen::Index>(cfg.dim));
  hash_field("image", image_bytes, cfg, v);
  hash_field("request", request, cfg, v);
  hash_field("candidate", candidate, cfg, v);
  const double norm = v.norm();
  if (norm == 0.0) {
    v[static_cast<Eigen::Index>(splitmix64(cfg.seed ^ fnv1a64("fallback")) % cfg.dim)] = 1.0;
    return v;
  }
  return v / norm;
}

}  // namespace alignkit
