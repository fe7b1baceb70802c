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

#ifndef MLINK_CORPUS_H_
#define MLINK_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mlink {

enum class MentionSource { kOrganic, kDescription };

const char *MentionSourceName(MentionSource source);
MentionSource ParseMentionSource(std::string_view name);

// Half-open token range [start, end) into a record's context.
struct TokenSpan {
  int32_t start = 0;
  int32_t end = 0;

  int32_t length() const { return end - start; }
  bool operator==(const TokenSpan &) const = default;
};

// One entity-labeled mention in context, or an entity description used as a
// pseudo-mention (no span).
struct MentionRecord {
  std::string mention_id;
  std::string entity_id;
  std::string language;
  std::vector<std::string> title_tokens;
  std::vector<std::string> context_tokens;
  std::optional<TokenSpan> span;
  MentionSource source = MentionSource::kOrganic;

  bool is_description() const { return source == MentionSource::kDescription; }

  // Key used to keep all mentions of one page on the same side of a split.
  std::string PageKey() const;

  bool operator==(const MentionRecord &) const = default;
};

// Throws ErrorKind::kValidation if the record breaks a structural invariant.
void ValidateRecord(const MentionRecord &record);

struct MentionPair {
  std::string query_id;
  std::string positive_id;

  bool operator==(const MentionPair &) const = default;
};

// ---------------------------------------------------------------------------
// JSONL ingestion.

// Parses one JSONL document. Line numbers in errors are 1-based. Records
// without a mention_id get their 0-based position in the file.
std::vector<MentionRecord> ParseCorpusJsonl(std::string_view contents,
                                            std::string_view source_name);
std::vector<MentionRecord> IngestCorpus(const std::filesystem::path &path);

std::string SerializeCorpusJsonl(const std::vector<MentionRecord> &records);

std::string SerializePairsTsv(const std::vector<MentionPair> &pairs);
std::vector<MentionPair> ParsePairsTsv(std::string_view contents,
                                       std::string_view source_name);

// ---------------------------------------------------------------------------
// Splits and pair construction.

struct CorpusSplit {
  std::vector<MentionRecord> train;
  std::vector<MentionRecord> test;
};

// Splits by page key. The number of test pages is
// max(1, round(test_page_fraction * pages)); with a single page everything
// lands in test. Records keep their input order within each side.
CorpusSplit SplitPages(const std::vector<MentionRecord> &records,
                       double test_page_fraction, uint64_t seed);

inline constexpr int64_t kDefaultPairCapPerEntity = 100000;

// For every entity, enumerates the ordered pairs of its distinct organic
// mentions, shuffles them with a per-entity stream, keeps the first `cap`,
// then shuffles the union globally.
std::vector<MentionPair> BuildMentionPairs(
    const std::vector<MentionRecord> &records, int64_t per_entity_pair_cap,
    uint64_t seed);

// Pairs every description with one uniformly drawn organic mention of the same
// entity. The organic mention is the query; the description is the positive.
std::vector<MentionPair> BuildDescriptionPairs(
    const std::vector<MentionRecord> &descriptions,
    const std::vector<MentionRecord> &records, uint64_t seed);

// ---------------------------------------------------------------------------
// Featurization.

inline constexpr int32_t kPadId = 0;
inline constexpr int32_t kSepId = 1;
inline constexpr int32_t kOpenId = 2;
inline constexpr int32_t kCloseId = 3;
inline constexpr int32_t kNumReservedIds = 4;

inline constexpr int32_t kOrganicType = 0;
inline constexpr int32_t kDescriptionType = 1;

struct FeaturizerOptions {
  int max_context = 64;
  // Title tokens plus the separator never take more than this.
  int max_title_budget = 16;
  int32_t vocab_size = 16384;
};

struct FeaturizedMention {
  std::vector<int32_t> token_ids;
  std::vector<int32_t> type_ids;
  int32_t vocab_size = 0;

  size_t size() const { return token_ids.size(); }
  bool operator==(const FeaturizedMention &) const = default;
};

// Whitespace split plus ASCII lowercasing.
std::vector<std::string> Tokenize(std::string_view text);

// Lowercases the token and hashes it into [kNumReservedIds, vocab_size).
int32_t TokenId(std::string_view token, int32_t vocab_size);

// Organic layout: [title][SEP][left][OPEN][span][CLOSE][right].
// Description layout: [title][SEP][description tokens].
// The context budget left after the title is split evenly around the span;
// whatever one side cannot use spills to the other.
FeaturizedMention Featurize(const MentionRecord &record,
                            const FeaturizerOptions &options);

}  // namespace mlink

#endif  // MLINK_CORPUS_H_
