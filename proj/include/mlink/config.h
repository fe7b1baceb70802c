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


#ifndef MLINK_CONFIG_H_
#define MLINK_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mlink/ann_index.h"
#include "mlink/corpus.h"
#include "mlink/encoder.h"
#include "mlink/exact_index.h"
#include "mlink/inference.h"
#include "mlink/mining.h"
#include "mlink/synthetic.h"

namespace mlink {

// Artifact locations. Relative paths resolve against work_dir.
struct PathConfig {
  std::string work_dir = "mlink_work";
  std::string raw_corpus = "corpus.jsonl";
  std::string train_corpus = "train.jsonl";
  std::string test_corpus = "test.jsonl";
  std::string pairs = "pairs.tsv";
  std::string mined = "mined.jsonl";
  std::string checkpoint = "model.mlmn";
  std::string index = "index.midx";
  std::string quantized_index = "index.mqdx";
  std::string predictions = "predictions.jsonl";
  std::string report = "report.tsv";
  std::string curve = "recall_curve.csv";
  std::string profile = "profile.tsv";

  std::filesystem::path Resolve(const std::string &path) const;
};

struct IndexConfig {
  IndexContents contents = IndexContents::kMentionsAndDescriptions;
  // Build and search the quantized index instead of exact search.
  bool ann = false;
  QuantizerConfig quantizer;
  SearchParams search;
};

struct PipelineConfig {
  uint64_t seed = 0;
  int threads = 0;
  PathConfig paths;
  double test_page_fraction = 0.1;
  int64_t pair_cap = kDefaultPairCapPerEntity;
  EncoderConfig encoder;
  FeaturizerOptions featurizer;
  TrainConfig train;
  MiningOptions mining;
  IndexConfig index;
  LinkOptions link;
  std::vector<size_t> cuts = {1, 10, 100};
  size_t curve_max_k = 100;
  SyntheticConfig synth;

  // Cross-field checks, e.g. featurizer and encoder vocabularies agree.
  void Validate() const;
};

// key = value lines with [section] headers and # comments. Keys are
// addressed as "section.key"; top-level keys (seed, threads) have no
// section. Values may be quoted strings, numbers, true/false, or lists
// written as [a, b] or a,b. Unknown keys and malformed values are
// kInvalidArgument errors naming source:line.
PipelineConfig ParseConfig(std::string_view text, std::string_view source);
PipelineConfig LoadConfig(const std::filesystem::path &path);

// Sets one "section.key" from its textual value.
void ApplySetting(PipelineConfig &config, std::string_view key, std::string_view value);

// Every key with its effective value, in ParseConfig syntax.
std::string SerializeConfig(const PipelineConfig &config);

}  // namespace mlink

#endif  // MLINK_CONFIG_H_
