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


#include "mlink/pipeline.h"

#include <unordered_map>

#include <spdlog/spdlog.h>

#include "mlink/errors.h"
#include "mlink/exact_index.h"

namespace mlink {

uint64_t StageSeed(uint64_t seed, Stage stage, uint64_t offset) {
  return seed * 0x9E3779B97F4A7C15ULL + static_cast<uint64_t>(stage) + offset;
}

std::vector<MinedExample> ExamplesFromPairs(const std::vector<MentionPair> &pairs) {
  std::vector<MinedExample> out;
  out.reserve(pairs.size());
  for (const MentionPair &p : pairs) out.push_back({p.query_id, p.positive_id, {}});
  return out;
}

TrainingSet MakeTrainingSet(const std::vector<MentionRecord> &records,
                            const std::vector<MinedExample> &examples,
                            const FeaturizerOptions &featurizer) {
  std::unordered_map<std::string, size_t> by_id;
  for (size_t i = 0; i < records.size(); ++i) by_id.emplace(records[i].mention_id, i);
  std::unordered_map<std::string, int32_t> slot;
  TrainingSet set;
  auto lookup = [&](const std::string &id) {
    auto [it, inserted] = slot.try_emplace(id, static_cast<int32_t>(set.mentions.size()));
    if (inserted) {
      auto rec = by_id.find(id);
      if (rec == by_id.end()) {
        Fail(ErrorKind::kNotFound, "training example references unknown mention \"" + id + "\"");
      }
      set.mentions.push_back(Featurize(records[rec->second], featurizer));
    }
    return it->second;
  };
  for (const MinedExample &ex : examples) {
    TrainingSet::Example out;
    out.query = lookup(ex.query_id);
    out.positive = lookup(ex.positive_id);
    for (const std::string &id : ex.negative_ids) out.negatives.push_back(lookup(id));
    set.examples.push_back(std::move(out));
  }
  return set;
}

std::vector<MentionPair> BuildTrainingPairs(const std::vector<MentionRecord> &records,
                                            int64_t per_entity_pair_cap, uint64_t seed) {
  std::vector<MentionRecord> organic, descriptions;
  for (const MentionRecord &r : records) {
    (r.is_description() ? descriptions : organic).push_back(r);
  }
  std::vector<MentionPair> pairs =
      BuildMentionPairs(organic, per_entity_pair_cap, StageSeed(seed, Stage::kMentionPairs));
  std::vector<MentionPair> desc =
      BuildDescriptionPairs(descriptions, organic, StageSeed(seed, Stage::kDescriptionPairs));
  pairs.insert(pairs.end(), desc.begin(), desc.end());
  return pairs;
}

MiningRound MineRound(const EncoderParams &params, const std::vector<MentionRecord> &records,
                      const std::vector<MentionPair> &pairs, const FeaturizerOptions &featurizer,
                      const MiningOptions &options) {
  const MentionIndex index =
      BuildIndex(params, records, IndexContents::kMentionsAndDescriptions, featurizer);
  std::vector<MiningQuery> queries = PrepareMiningQueries(params, records, pairs, featurizer);
  MiningRound round;
  round.pairs = ResamplePositives(index, queries);
  for (size_t i = 0; i < queries.size(); ++i) queries[i].positive_id = round.pairs[i].positive_id;
  ExactSearcher searcher(index);
  round.examples = MineHardNegatives(searcher, queries, CountPositives(queries), options);
  return round;
}

PipelineResult TrainPipeline(const std::vector<MentionRecord> &records,
                             const PipelineOptions &options) {
  Require(options.mining_rounds >= 0, "mining_rounds must be non-negative");
  PipelineResult result;
  result.pairs = BuildTrainingPairs(records, options.per_entity_pair_cap, options.seed);
  spdlog::info("{} training pairs", result.pairs.size());
  TrainConfig train = options.train;
  train.seed = StageSeed(options.seed, Stage::kTrain);
  TrainResult trained =
      Train(InitializeParams(options.encoder, StageSeed(options.seed, Stage::kInit)),
            MakeTrainingSet(records, ExamplesFromPairs(result.pairs), options.featurizer), train);
  result.loss_curves.push_back(std::move(trained.loss_curve));
  EncoderParams params = std::move(trained.params);
  for (int round = 0; round < options.mining_rounds; ++round) {
    MiningRound mined = MineRound(params, records, result.pairs, options.featurizer, options.mining);
    spdlog::info("mining round {}: {} examples", round + 1, mined.examples.size());
    train.seed = StageSeed(options.seed, Stage::kRetrain, static_cast<uint64_t>(round));
    trained = Train(std::move(params),
                    MakeTrainingSet(records, mined.examples, options.featurizer), train);
    result.loss_curves.push_back(std::move(trained.loss_curve));
    params = std::move(trained.params);
    result.mined = std::move(mined.examples);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace mlink
