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


#ifndef MLINK_PIPELINE_H_
#define MLINK_PIPELINE_H_

#include <cstdint>
#include <vector>

#include "mlink/corpus.h"
#include "mlink/encoder.h"
#include "mlink/mining.h"

namespace mlink {

// Seeded stages of one pipeline run; each draws from its own stream.
enum class Stage : uint64_t {
  kInit = 0,
  kMentionPairs = 1,
  kDescriptionPairs = 2,
  kTrain = 3,
  kSplit = 4,
  kSynthetic = 5,
  kQuantizer = 6,
  kRetrain = 16,  // plus the round number
};

uint64_t StageSeed(uint64_t seed, Stage stage, uint64_t offset = 0);

// Pairs as training examples without negatives.
std::vector<MinedExample> ExamplesFromPairs(const std::vector<MentionPair> &pairs);

// Featurizes every record referenced by `examples` once, in order of first
// reference. Unknown ids are kNotFound.
TrainingSet MakeTrainingSet(const std::vector<MentionRecord> &records,
                            const std::vector<MinedExample> &examples,
                            const FeaturizerOptions &featurizer);

// Mention pairs over organic records plus description pairs, concatenated.
std::vector<MentionPair> BuildTrainingPairs(const std::vector<MentionRecord> &records,
                                            int64_t per_entity_pair_cap, uint64_t seed);

struct MiningRound {
  std::vector<MentionPair> pairs;  // positives resampled
  std::vector<MinedExample> examples;
};

// Indexes `records` (mentions and descriptions) under `params`, resamples
// each pair's positive and mines hard negatives for it with exact search.
MiningRound MineRound(const EncoderParams &params, const std::vector<MentionRecord> &records,
                      const std::vector<MentionPair> &pairs, const FeaturizerOptions &featurizer,
                      const MiningOptions &options);

struct PipelineOptions {
  EncoderConfig encoder;
  TrainConfig train;
  FeaturizerOptions featurizer;
  MiningOptions mining;
  // Mine-then-retrain cycles after the first training run.
  int mining_rounds = 1;
  int64_t per_entity_pair_cap = kDefaultPairCapPerEntity;
  uint64_t seed = 0;
};

struct PipelineResult {
  EncoderParams params;
  std::vector<MentionPair> pairs;
  std::vector<MinedExample> mined;  // from the last round
  std::vector<std::vector<double>> loss_curves;  // one per training run
};

// Pairs, in-batch training from a fresh initialization, then each mining
// round retrains from the current weights on resampled positives plus hard
// negatives. Every seeded step derives from options.seed.
PipelineResult TrainPipeline(const std::vector<MentionRecord> &records,
                             const PipelineOptions &options);

}  // namespace mlink

#endif  // MLINK_PIPELINE_H_
