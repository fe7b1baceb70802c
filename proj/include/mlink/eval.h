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


#ifndef MLINK_EVAL_H_
#define MLINK_EVAL_H_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mlink/inference.h"

namespace mlink {

// Training-mention frequency bins [0,1), [1,10), ..., [10k,+).
inline constexpr int kNumBuckets = 6;

int BucketOf(int64_t count);
// Entities missing from `counts` have count 0.
int BucketOf(const std::string &entity_id, const std::map<std::string, int64_t> &counts);
const char *BucketName(int bucket);

// 1-based rank of the gold entity among the predictions, 0 if absent.
size_t GoldRank(const LinkedQuery &query);

struct RecallResult {
  double recall = 0.0;
  size_t correct = 0;
  size_t total = 0;
  // Queries without a gold label.
  size_t excluded = 0;
};

// Fraction of labeled queries whose gold entity is among the first `cut`
// predicted entities. Failed queries count as misses.
RecallResult RecallAt(const std::vector<LinkedQuery> &queries, size_t cut);

struct SliceRecall {
  std::string name;
  size_t count = 0;
  std::vector<size_t> correct;  // per cut
  std::vector<double> recall;   // per cut
};

struct EvalReport {
  std::vector<size_t> cuts;
  SliceRecall micro;
  std::vector<SliceRecall> per_language;  // sorted by language
  std::vector<SliceRecall> per_bucket;    // all kNumBuckets, possibly empty
  // Unweighted means over non-empty slices, per cut.
  std::vector<double> macro_language;
  std::vector<double> macro_bucket;
  // Among queries with a prediction, those whose top entity's supporting
  // mention is in another language.
  double cross_language_fraction = 0.0;
  size_t cross_language_count = 0;
  size_t predicted_count = 0;
  size_t excluded = 0;
};

// `counts` are organic training-mention counts per entity.
EvalReport BuildReport(const std::vector<LinkedQuery> &queries,
                       const std::map<std::string, int64_t> &counts,
                       std::vector<size_t> cuts = {1, 10, 100});

// slice, cut, recall, n. Slices are micro, macro_language, macro_bucket,
// language:<lang>, bucket:<range>; a final cross_language row carries the
// fraction in the recall column.
std::string ReportTsv(const EvalReport &report);
std::string ReportTable(const EvalReport &report);

// "k,<slice>..." rows for k = 1..max_k: micro, then each language.
std::string RecallCurveCsv(const std::vector<LinkedQuery> &queries, size_t max_k);

}  // namespace mlink

#endif  // MLINK_EVAL_H_
