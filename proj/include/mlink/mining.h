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

#ifndef MLINK_MINING_H_
#define MLINK_MINING_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mlink/corpus.h"
#include "mlink/encoder.h"
#include "mlink/exact_index.h"

namespace mlink {

struct MinedExample {
  std::string query_id;
  std::string positive_id;
  std::vector<std::string> negative_ids;

  bool operator==(const MinedExample &) const = default;
};

// A training pair whose query has been encoded under the current model.
struct MiningQuery {
  std::string query_id;
  std::string entity_id;
  std::string positive_id;
  Embedding embedding;
};

// Looks up and encodes each pair's query record. Unknown ids are kNotFound.
std::vector<MiningQuery> PrepareMiningQueries(const EncoderParams &params,
                                              const std::vector<MentionRecord> &records,
                                              const std::vector<MentionPair> &pairs,
                                              const FeaturizerOptions &featurizer);

// How often each entity is the gold entity of a query.
std::map<std::string, int64_t> CountPositives(const std::vector<MiningQuery> &queries);

struct MiningOptions {
  int negatives_per_query = 10;
  int cap_ratio = 10;
};

// Takes the best-scoring retrieved rows whose entity differs from the
// query's. An entity is used as a negative at most cap_ratio times its
// positive count (entities without a count get cap 0). Queries are handled
// in query_id order, so earlier ids get first claim on capped entities; a
// query whose candidates run out is re-searched with twice the pool until
// it is full or the index is exhausted. Output order matches the input.
std::vector<MinedExample> MineHardNegatives(const Searcher &searcher,
                                            const std::vector<MiningQuery> &queries,
                                            const std::map<std::string, int64_t> &positive_counts,
                                            const MiningOptions &options);

// Replaces each positive with the best-scoring indexed mention of the same
// entity and source, never the query itself. Pairs with no such mention keep
// their positive.
std::vector<MentionPair> ResamplePositives(const MentionIndex &index,
                                           const std::vector<MiningQuery> &queries);

// JSONL: {"query_id", "positive_id", "negative_ids": [...]} per line.
std::string SerializeMinedJsonl(const std::vector<MinedExample> &examples);
std::vector<MinedExample> ParseMinedJsonl(std::string_view contents,
                                          std::string_view source_name);
void SaveMined(const std::vector<MinedExample> &examples,
               const std::filesystem::path &path);
std::vector<MinedExample> LoadMined(const std::filesystem::path &path);

}  // namespace mlink

#endif  // MLINK_MINING_H_
