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

#include "mlink/exact_index.h"

#include <algorithm>
#include <cmath>
#include <queue>

#include "mlink/binary_io.h"
#include "mlink/errors.h"
#include "mlink/kernels.h"
#include "mlink/parallel.h"

namespace mlink {
namespace {

constexpr double kUnitNormTolerance = 1e-5;

// Keeps the best `capacity` neighbors seen so far.
class TopN {
 public:
  explicit TopN(size_t capacity) : capacity_(capacity) {}

  void Push(Neighbor n) {
    if (heap_.size() < capacity_) {
      heap_.push(n);
    } else if (RanksBefore(n, heap_.top())) {
      heap_.pop();
      heap_.push(n);
    }
  }

  std::vector<Neighbor> Take() {
    std::vector<Neighbor> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  struct WorstOnTop {
    bool operator()(const Neighbor &a, const Neighbor &b) const {
      return RanksBefore(a, b);
    }
  };
  size_t capacity_;
  std::priority_queue<Neighbor, std::vector<Neighbor>, WorstOnTop> heap_;
};

}  // namespace

MentionIndex MentionIndex::FromVectors(
    int dim, std::vector<float> vectors, std::vector<IndexRowLabel> labels,
    std::map<std::string, int64_t> positive_counts) {
  Require(dim > 0, "index dimension must be positive");
  Require(vectors.size() == labels.size() * static_cast<size_t>(dim),
          "vector block does not match label count");
  for (size_t row = 0; row < labels.size(); ++row) {
    const float *v = vectors.data() + row * dim;
    double norm2 = 0.0;
    for (int i = 0; i < dim; ++i) norm2 += static_cast<double>(v[i]) * v[i];
    if (!(std::abs(std::sqrt(norm2) - 1.0) <= kUnitNormTolerance)) {
      Fail(ErrorKind::kValidation, "index row " + std::to_string(row) + " (" +
                                       labels[row].mention_id +
                                       ") is not unit norm");
    }
    if (labels[row].entity_id.empty()) {
      Fail(ErrorKind::kValidation, "index row " + std::to_string(row) +
                                       " has an empty entity id");
    }
  }
  MentionIndex index;
  index.dim_ = dim;
  index.vectors_ = std::move(vectors);
  index.labels_ = std::move(labels);
  index.positive_counts_ = std::move(positive_counts);
  return index;
}

int64_t MentionIndex::PositiveCount(const std::string &entity) const {
  auto it = positive_counts_.find(entity);
  return it == positive_counts_.end() ? 0 : it->second;
}

std::vector<Neighbor> MentionIndex::Search(std::span<const float> query,
                                           size_t top_n, int threads) const {
  if (empty()) Fail(ErrorKind::kInvalidArgument, "search over an empty index");
  Require(top_n >= 1, "top_n must be at least 1");
  if (query.size() != static_cast<size_t>(dim_)) {
    Fail(ErrorKind::kInvalidArgument,
         "query dimension " + std::to_string(query.size()) + " != index dimension " +
             std::to_string(dim_));
  }
  const size_t n = size();
  top_n = std::min(top_n, n);
  const int workers = threads > 0 ? threads : ThreadCount();
  // Small scans are not worth the thread start-up.
  const size_t shards = n < 4096 ? 1 : static_cast<size_t>(std::max(1, workers));
  std::vector<std::vector<Neighbor>> partial(shards);
  ParallelFor(
      shards,
      [&](size_t s_begin, size_t s_end) {
        for (size_t s = s_begin; s < s_end; ++s) {
          const size_t begin = n * s / shards;
          const size_t end = n * (s + 1) / shards;
          TopN top(top_n);
          for (size_t row = begin; row < end; ++row) {
            top.Push({static_cast<uint32_t>(row),
                      DotProduct(query.data(), vectors_.data() + row * dim_, dim_)});
          }
          partial[s] = top.Take();
        }
      },
      static_cast<int>(shards));

  std::vector<Neighbor> merged;
  for (auto &p : partial) merged.insert(merged.end(), p.begin(), p.end());
  std::sort(merged.begin(), merged.end(), RanksBefore);
  merged.resize(top_n);
  return merged;
}

IndexContents ParseIndexContents(std::string_view name) {
  if (name == "mentions") return IndexContents::kMentionsOnly;
  if (name == "both" || name == "mentions+descriptions") {
    return IndexContents::kMentionsAndDescriptions;
  }
  if (name == "descriptions-only") return IndexContents::kDescriptionsOnly;
  Fail(ErrorKind::kInvalidArgument,
       "unknown index mode \"" + std::string(name) +
           "\" (expected mentions, both, descriptions-only)");
}

const char *IndexContentsName(IndexContents contents) {
  switch (contents) {
    case IndexContents::kMentionsOnly: return "mentions";
    case IndexContents::kMentionsAndDescriptions: return "both";
    case IndexContents::kDescriptionsOnly: return "descriptions-only";
  }
  return "mentions";
}

MentionIndex BuildIndex(const EncoderParams &params,
                        const std::vector<MentionRecord> &records,
                        IndexContents contents,
                        const FeaturizerOptions &featurizer) {
  std::map<std::string, int64_t> counts;
  std::vector<const MentionRecord *> kept;
  for (const MentionRecord &r : records) {
    if (!r.is_description()) ++counts[r.entity_id];
    const bool keep = r.is_description()
                          ? contents != IndexContents::kMentionsOnly
                          : contents != IndexContents::kDescriptionsOnly;
    if (keep) kept.push_back(&r);
  }
  const int dim = params.output_dim();
  std::vector<float> vectors(kept.size() * dim);
  std::vector<IndexRowLabel> labels(kept.size());
  ParallelFor(kept.size(), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const MentionRecord &r = *kept[i];
      Embedding e;
      try {
        e = Encode(params, Featurize(r, featurizer));
      } catch (const Error &err) {
        Fail(err.kind(), "encoding mention " + r.mention_id + ": " + err.what());
      }
      std::copy(e.begin(), e.end(), vectors.begin() + i * dim);
      labels[i] = {r.mention_id, r.entity_id, r.language, r.source};
    }
  });
  return MentionIndex::FromVectors(dim, std::move(vectors), std::move(labels),
                                   std::move(counts));
}

std::string SerializeIndex(const MentionIndex &index) {
  BinaryWriter w;
  w.WriteMagic("MIDX");
  w.Write<uint32_t>(kIndexVersion);
  w.Write<uint64_t>(index.size());
  w.Write<uint32_t>(static_cast<uint32_t>(index.dim()));
  w.WriteArray(index.vectors());
  for (size_t i = 0; i < index.size(); ++i) w.WriteString(index.label(i).mention_id);
  for (size_t i = 0; i < index.size(); ++i) w.WriteString(index.label(i).entity_id);
  for (size_t i = 0; i < index.size(); ++i) w.WriteString(index.label(i).language);
  for (size_t i = 0; i < index.size(); ++i) {
    w.WriteString(MentionSourceName(index.label(i).source));
  }
  w.Write<uint64_t>(index.entity_positive_counts().size());
  for (const auto &[entity, count] : index.entity_positive_counts()) {
    w.WriteString(entity);
    w.Write<int64_t>(count);
  }
  return w.buffer();
}

MentionIndex ParseIndex(std::string_view bytes, std::string_view source) {
  BinaryReader r(bytes, std::string(source));
  r.ExpectMagic("MIDX");
  const auto version = r.Read<uint32_t>();
  if (version != kIndexVersion) {
    Fail(ErrorKind::kVersionMismatch,
         std::string(source) + ": index version " + std::to_string(version) +
             ", expected " + std::to_string(kIndexVersion));
  }
  const auto n = r.Read<uint64_t>();
  const auto dim = r.Read<uint32_t>();
  if (dim == 0 || dim > (1u << 20) || n > bytes.size() ||
      n * dim * sizeof(float) > bytes.size()) {
    Fail(ErrorKind::kParse, std::string(source) + ": implausible index header");
  }
  std::vector<float> vectors(n * dim);
  r.ReadArray<float>(vectors);
  std::vector<IndexRowLabel> labels(n);
  for (auto &l : labels) l.mention_id = r.ReadString();
  for (auto &l : labels) l.entity_id = r.ReadString();
  for (auto &l : labels) l.language = r.ReadString();
  for (auto &l : labels) l.source = ParseMentionSource(r.ReadString());
  std::map<std::string, int64_t> counts;
  const auto num_counts = r.Read<uint64_t>();
  for (uint64_t i = 0; i < num_counts; ++i) {
    std::string entity = r.ReadString();
    counts[std::move(entity)] = r.Read<int64_t>();
  }
  r.ExpectEnd();
  return MentionIndex::FromVectors(static_cast<int>(dim), std::move(vectors),
                                   std::move(labels), std::move(counts));
}

void SaveIndex(const MentionIndex &index, const std::filesystem::path &path) {
  WriteFileAtomic(path, SerializeIndex(index));
}

MentionIndex LoadIndex(const std::filesystem::path &path) {
  return ParseIndex(ReadFile(path), path.string());
}

}  // namespace mlink
