// Copyright 2026 The mentionlink Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MLINK_EXACT_INDEX_H_
#define MLINK_EXACT_INDEX_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlink/corpus.h"
#include "mlink/encoder.h"

namespace mlink {

// One retrieved index row.
struct Neighbor {
  uint32_t row = 0;
  float score = 0.0f;

  bool operator==(const Neighbor &) const = default;
};

// Higher score first, then lower row.
inline bool RanksBefore(const Neighbor &a, const Neighbor &b) {
  return a.score > b.score || (a.score == b.score && a.row < b.row);
}

struct IndexRowLabel {
  std::string mention_id;
  std::string entity_id;
  std::string language;
  MentionSource source = MentionSource::kOrganic;

  bool operator==(const IndexRowLabel &) const = default;
};

// Immutable store of unit-norm mention embeddings and their labels.
// Safe for concurrent reads.
class MentionIndex {
 public:
  MentionIndex() = default;

  // Validates shapes and unit norms (tolerance 1e-5).
  static MentionIndex FromVectors(int dim, std::vector<float> vectors,
                                  std::vector<IndexRowLabel> labels,
                                  std::map<std::string, int64_t> positive_counts);

  size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  int dim() const { return dim_; }

  std::span<const float> vector(size_t row) const {
    return {vectors_.data() + row * dim_, static_cast<size_t>(dim_)};
  }
  std::span<const float> vectors() const { return vectors_; }
  const IndexRowLabel &label(size_t row) const { return labels_[row]; }
  const std::string &mention_id(size_t row) const { return labels_[row].mention_id; }
  const std::string &entity_id(size_t row) const { return labels_[row].entity_id; }

  // Organic training-mention count per entity.
  const std::map<std::string, int64_t> &entity_positive_counts() const {
    return positive_counts_;
  }
  int64_t PositiveCount(const std::string &entity) const;

  // Exact top-n by inner product, ordered by RanksBefore. Rows are scanned in
  // contiguous shards across `threads` workers and the shard winners merged;
  // results do not depend on the thread count.
  std::vector<Neighbor> Search(std::span<const float> query, size_t top_n,
                               int threads = 0) const;

  bool operator==(const MentionIndex &) const = default;

 private:
  int dim_ = 0;
  std::vector<float> vectors_;
  std::vector<IndexRowLabel> labels_;
  std::map<std::string, int64_t> positive_counts_;
};

enum class IndexContents { kMentionsOnly, kMentionsAndDescriptions, kDescriptionsOnly };

IndexContents ParseIndexContents(std::string_view name);
const char *IndexContentsName(IndexContents contents);

// Encodes records in input order, keeping those selected by `contents`.
// Positive counts always come from the organic records.
MentionIndex BuildIndex(const EncoderParams &params,
                        const std::vector<MentionRecord> &records,
                        IndexContents contents,
                        const FeaturizerOptions &featurizer);

inline MentionIndex BuildIndex(const EncoderParams &params,
                               const std::vector<MentionRecord> &records,
                               bool include_descriptions,
                               const FeaturizerOptions &featurizer) {
  return BuildIndex(params, records,
                    include_descriptions ? IndexContents::kMentionsAndDescriptions
                                         : IndexContents::kMentionsOnly,
                    featurizer);
}

// Query-time interface shared by exact and approximate search.
class Searcher {
 public:
  virtual ~Searcher() = default;
  virtual std::vector<Neighbor> Search(std::span<const float> query,
                                       size_t top_n) const = 0;
  virtual const MentionIndex &index() const = 0;
};

class ExactSearcher : public Searcher {
 public:
  explicit ExactSearcher(const MentionIndex &index, int threads = 1)
      : index_(index), threads_(threads) {}

  std::vector<Neighbor> Search(std::span<const float> query,
                               size_t top_n) const override {
    return index_.Search(query, top_n, threads_);
  }
  const MentionIndex &index() const override { return index_; }

 private:
  const MentionIndex &index_;
  int threads_;
};

// "MIDX", u32 version, u64 N, u32 d, float32 vectors, then length-prefixed
// UTF-8 arrays: mention ids, entity ids, languages, sources; then u64 count
// and (entity, i64 count) pairs.
inline constexpr uint32_t kIndexVersion = 1;

std::string SerializeIndex(const MentionIndex &index);
MentionIndex ParseIndex(std::string_view bytes, std::string_view source);
void SaveIndex(const MentionIndex &index, const std::filesystem::path &path);
MentionIndex LoadIndex(const std::filesystem::path &path);

}  // namespace mlink

#endif  // MLINK_EXACT_INDEX_H_
