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

#ifndef MLINK_INFERENCE_H_
#define MLINK_INFERENCE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlink/corpus.h"
#include "mlink/encoder.h"
#include "mlink/exact_index.h"

namespace mlink {

enum class LinkMode { kTopPerEntity, kAllMentions };

const char *LinkModeName(LinkMode mode);
LinkMode ParseLinkMode(std::string_view name);

struct EntityScore {
  std::string entity_id;
  // Ranking score: the vote total for a voting winner, otherwise the best
  // mention score.
  float score = 0.0f;
  float best_score = 0.0f;
  uint32_t best_row = 0;
  std::string mention_id;
  std::string language;

  bool operator==(const EntityScore &) const = default;
};

struct EntityPrediction {
  std::vector<EntityScore> entities;
  LinkMode mode = LinkMode::kTopPerEntity;
  int k = 1;

  bool operator==(const EntityPrediction &) const = default;
};

struct LinkOptions {
  LinkMode mode = LinkMode::kTopPerEntity;
  // Voting neighborhood for kAllMentions.
  int k = 1;
  size_t top_n = 100;
  // Votes weigh each neighbor by its similarity (clamped at zero) instead
  // of counting it once.
  bool weighted_vote = true;

  void Validate() const;
};

// Ranks entities from the query's nearest mentions. Retrieves
// max(4 * top_n, k, 100) neighbors and doubles until top_n entities are
// found or the index is exhausted.
//
// kTopPerEntity orders entities by their best mention (ties by row).
// kAllMentions puts the k-neighbor vote winner first (ties by best mention
// score, then entity id) and the rest by best mention.
EntityPrediction Predict(const Searcher &searcher, std::span<const float> query,
                         const LinkOptions &options);

// Entity ranking from an already retrieved neighbor list, best first.
EntityPrediction RankEntities(const MentionIndex &index, const std::vector<Neighbor> &neighbors,
                              const LinkOptions &options);

struct BatchPrediction {
  EntityPrediction prediction;
  // Empty on success.
  std::string error;

  bool ok() const { return error.empty(); }
};

// Element-wise Predict in parallel; failures are reported per query.
std::vector<BatchPrediction> PredictBatch(const Searcher &searcher,
                                          const std::vector<Embedding> &queries,
                                          const LinkOptions &options);

// A linked query mention with its gold label, if known.
struct LinkedQuery {
  std::string query_id;
  std::string gold_entity;
  std::string language;
  EntityPrediction prediction;
  std::string error;

  bool operator==(const LinkedQuery &) const = default;
};

// Encodes and links each record; the record's entity is the gold label.
std::vector<LinkedQuery> LinkRecords(const EncoderParams &params, const Searcher &searcher,
                                     const std::vector<MentionRecord> &queries,
                                     const FeaturizerOptions &featurizer,
                                     const LinkOptions &options);

// JSONL: {"query_id", "gold_entity"?, "language", "predictions": [{"entity_id",
// "score", "mention_id", "language"}], "k", "mode"} per query, or
// {"query_id", "error"} for failed queries.
std::string SerializePredictionsJsonl(const std::vector<LinkedQuery> &linked);
std::vector<LinkedQuery> ParsePredictionsJsonl(std::string_view contents,
                                               std::string_view source_name);
void SavePredictions(const std::vector<LinkedQuery> &linked,
                     const std::filesystem::path &path);
std::vector<LinkedQuery> LoadPredictions(const std::filesystem::path &path);

}  // namespace mlink

#endif  // MLINK_INFERENCE_H_
