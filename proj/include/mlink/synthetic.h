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


#ifndef MLINK_SYNTHETIC_H_
#define MLINK_SYNTHETIC_H_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mlink/corpus.h"

namespace mlink {

// Entities whose mentions come from several disjoint context-token
// distributions ("clusters"), while each entity's description only covers
// cluster 0.
struct SyntheticConfig {
  int entities = 200;
  int clusters_per_entity = 2;
  // Training mentions per (entity, cluster).
  int mentions_per_cluster = 10;
  // Held-out query mentions per (entity, cluster).
  int queries_per_cluster = 2;
  // Extra entities with a description and cluster-0 queries but no
  // training mentions.
  int zero_shot_entities = 0;
  int tokens_per_cluster = 8;
  int context_length = 16;
  // Distinct token strings; cluster tokens are carved out of this range and
  // the remainder is the shared noise pool.
  int vocab = 8192;
  // Probability that a context token comes from the noise pool.
  double noise = 0.3;
  std::vector<std::string> languages = {"en", "de"};
  uint64_t seed = 0;

  // Throws kInvalidArgument on non-positive sizes or when the vocabulary
  // cannot hold disjoint clusters plus a noise pool.
  void Validate() const;
};

struct SyntheticCorpus {
  std::vector<MentionRecord> train;         // organic training mentions
  std::vector<MentionRecord> descriptions;  // one per entity, zero-shot included
  std::vector<MentionRecord> queries;       // held out
  std::vector<int> query_clusters;          // aligned with queries
  std::set<std::string> zero_shot_entities;
};

// Deterministic for a fixed config. Organic mentions mark one cluster token
// as the span and carry two noise tokens as their page title.
SyntheticCorpus MakeSyntheticCorpus(const SyntheticConfig &config);

// Index of the cluster that generated `mention_id`, or -1 for descriptions
// and foreign ids.
int SyntheticCluster(const std::string &mention_id);

}  // namespace mlink

#endif  // MLINK_SYNTHETIC_H_
