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

#include "mlink/corpus.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mlink/binary_io.h"
#include "mlink/errors.h"
#include "mlink/parallel.h"
#include "mlink/rng.h"

namespace mlink {
namespace {

using Json = nlohmann::ordered_json;

std::vector<std::string> SplitWhitespace(std::string_view text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])))
      ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string Join(const std::vector<std::string> &tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

bool IsBlank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) {
    return std::isspace(c);
  });
}

std::string LinePrefix(std::string_view source, size_t line_number) {
  return std::string(source) + ":" + std::to_string(line_number) + ": ";
}

MentionRecord RecordFromJson(const Json &obj) {
  if (!obj.is_object()) throw std::invalid_argument("line is not an object");
  MentionRecord record;
  if (auto it = obj.find("mention_id"); it != obj.end() && !it->is_null()) {
    record.mention_id = it->get<std::string>();
  }
  record.entity_id = obj.at("entity_id").get<std::string>();
  record.language = obj.at("language").get<std::string>();
  record.title_tokens = SplitWhitespace(obj.at("title").get<std::string>());
  record.context_tokens = obj.at("context").get<std::vector<std::string>>();
  if (auto it = obj.find("source"); it != obj.end()) {
    record.source = ParseMentionSource(it->get<std::string>());
  }
  if (auto it = obj.find("span"); it != obj.end() && !it->is_null()) {
    auto bounds = it->get<std::vector<int64_t>>();
    if (bounds.size() != 2) throw std::invalid_argument("span needs 2 ints");
    if (bounds[0] < INT32_MIN || bounds[0] > INT32_MAX ||
        bounds[1] < INT32_MIN || bounds[1] > INT32_MAX) {
      throw std::invalid_argument("span offset out of range");
    }
    record.span = TokenSpan{static_cast<int32_t>(bounds[0]),
                            static_cast<int32_t>(bounds[1])};
  }
  return record;
}

Json RecordToJson(const MentionRecord &record) {
  Json obj;
  obj["mention_id"] = record.mention_id;
  obj["entity_id"] = record.entity_id;
  obj["language"] = record.language;
  obj["title"] = Join(record.title_tokens);
  obj["context"] = record.context_tokens;
  if (record.span) obj["span"] = {record.span->start, record.span->end};
  obj["source"] = MentionSourceName(record.source);
  return obj;
}

// Picks how many context tokens go left and right of the span.
std::pair<int, int> CenterWindow(int budget, int left_avail, int right_avail) {
  int left = std::min(left_avail, budget / 2);
  int right = std::min(right_avail, budget - budget / 2);
  int spare = budget - left - right;
  const int extra_left = std::min(spare, left_avail - left);
  left += extra_left;
  spare -= extra_left;
  right += std::min(spare, right_avail - right);
  return {left, right};
}

}  // namespace

const char *MentionSourceName(MentionSource source) {
  return source == MentionSource::kDescription ? "description" : "organic";
}

MentionSource ParseMentionSource(std::string_view name) {
  if (name == "organic") return MentionSource::kOrganic;
  if (name == "description") return MentionSource::kDescription;
  Fail(ErrorKind::kParse, "unknown mention source \"" + std::string(name) + "\"");
}

std::string MentionRecord::PageKey() const { return Join(title_tokens); }

void ValidateRecord(const MentionRecord &record) {
  if (record.entity_id.empty()) {
    Fail(ErrorKind::kValidation, "empty entity_id");
  }
  if (record.source == MentionSource::kDescription) {
    if (record.span) {
      Fail(ErrorKind::kValidation, "description record carries a span");
    }
    return;
  }
  if (!record.span) Fail(ErrorKind::kValidation, "organic record lacks a span");
  const auto n = static_cast<int64_t>(record.context_tokens.size());
  const TokenSpan &s = *record.span;
  if (s.start < 0 || s.start >= s.end || s.end > n) {
    Fail(ErrorKind::kValidation,
         "span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
             ") out of bounds for context of " + std::to_string(n) +
             " tokens");
  }
}

std::vector<MentionRecord> ParseCorpusJsonl(std::string_view contents,
                                            std::string_view source_name) {
  std::vector<MentionRecord> records;
  std::unordered_set<std::string> seen_ids;
  std::vector<size_t> line_numbers;
  size_t line_number = 0;
  size_t pos = 0;
  while (pos < contents.size()) {
    size_t eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string_view line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    if (IsBlank(line)) continue;

    MentionRecord record;
    try {
      record = RecordFromJson(Json::parse(line));
    } catch (const Error &e) {
      Fail(ErrorKind::kParse, LinePrefix(source_name, line_number) + e.what());
    } catch (const std::exception &e) {
      Fail(ErrorKind::kParse, LinePrefix(source_name, line_number) + e.what());
    }
    if (record.mention_id.empty()) {
      record.mention_id = std::to_string(records.size());
    }
    try {
      ValidateRecord(record);
    } catch (const Error &e) {
      Fail(ErrorKind::kValidation,
           LinePrefix(source_name, line_number) + e.what());
    }
    if (!seen_ids.insert(record.mention_id).second) {
      Fail(ErrorKind::kValidation, LinePrefix(source_name, line_number) +
                                       "duplicate mention_id \"" +
                                       record.mention_id + "\"");
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<MentionRecord> IngestCorpus(const std::filesystem::path &path) {
  return ParseCorpusJsonl(ReadFile(path), path.string());
}

std::string SerializeCorpusJsonl(const std::vector<MentionRecord> &records) {
  std::string out;
  for (const MentionRecord &record : records) {
    out += RecordToJson(record).dump();
    out += '\n';
  }
  return out;
}

std::string SerializePairsTsv(const std::vector<MentionPair> &pairs) {
  std::string out;
  for (const MentionPair &pair : pairs) {
    out += pair.query_id;
    out += '\t';
    out += pair.positive_id;
    out += '\n';
  }
  return out;
}

std::vector<MentionPair> ParsePairsTsv(std::string_view contents,
                                       std::string_view source_name) {
  std::vector<MentionPair> pairs;
  size_t line_number = 0;
  size_t pos = 0;
  while (pos < contents.size()) {
    size_t eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string_view line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    if (IsBlank(line)) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string_view::npos ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      Fail(ErrorKind::kParse, LinePrefix(source_name, line_number) +
                                  "expected two tab-separated fields");
    }
    pairs.push_back({std::string(line.substr(0, tab)),
                     std::string(line.substr(tab + 1))});
  }
  return pairs;
}

CorpusSplit SplitPages(const std::vector<MentionRecord> &records,
                       double test_page_fraction, uint64_t seed) {
  if (!(test_page_fraction > 0.0 && test_page_fraction < 1.0)) {
    Fail(ErrorKind::kInvalidArgument,
         "test page fraction must lie in (0, 1), got " +
             std::to_string(test_page_fraction));
  }
  std::set<std::string> key_set;
  for (const MentionRecord &r : records) key_set.insert(r.PageKey());
  std::vector<std::string> keys(key_set.begin(), key_set.end());

  CorpusSplit split;
  if (keys.empty()) return split;
  Rng rng(seed);
  rng.Shuffle(keys);
  const auto rounded =
      static_cast<size_t>(std::llround(test_page_fraction * keys.size()));
  const size_t num_test = std::min(keys.size(), std::max<size_t>(1, rounded));
  const std::unordered_set<std::string> test_keys(keys.begin(),
                                                  keys.begin() + num_test);
  for (const MentionRecord &r : records) {
    (test_keys.count(r.PageKey()) ? split.test : split.train).push_back(r);
  }
  return split;
}

std::vector<MentionPair> BuildMentionPairs(
    const std::vector<MentionRecord> &records, int64_t per_entity_pair_cap,
    uint64_t seed) {
  Require(per_entity_pair_cap >= 0, "pair cap must be non-negative");
  std::map<std::string, std::vector<const MentionRecord *>> by_entity;
  for (const MentionRecord &r : records) {
    if (r.source == MentionSource::kOrganic) {
      by_entity[r.entity_id].push_back(&r);
    }
  }
  std::vector<const std::vector<const MentionRecord *> *> groups;
  std::vector<const std::string *> group_keys;
  for (const auto &[entity, mentions] : by_entity) {
    groups.push_back(&mentions);
    group_keys.push_back(&entity);
  }

  std::vector<std::vector<MentionPair>> per_group(groups.size());
  ParallelFor(groups.size(), [&](size_t begin, size_t end) {
    for (size_t g = begin; g < end; ++g) {
      const auto &mentions = *groups[g];
      const uint64_t m = mentions.size();
      if (m < 2) continue;
      const uint64_t total = m * (m - 1);
      const uint64_t take =
          std::min<uint64_t>(total, static_cast<uint64_t>(per_entity_pair_cap));
      // Sparse forward Fisher-Yates over the virtual list of all ordered
      // pairs; its first `take` slots equal a full shuffle truncated.
      Rng rng(MixSeed(seed, Fingerprint(*group_keys[g])));
      std::unordered_map<uint64_t, uint64_t> moved;
      auto slot = [&](uint64_t i) {
        auto it = moved.find(i);
        return it == moved.end() ? i : it->second;
      };
      auto &out = per_group[g];
      out.reserve(take);
      for (uint64_t i = 0; i < take; ++i) {
        const uint64_t j = i + rng.Uniform(total - i);
        const uint64_t picked = slot(j);
        moved[j] = slot(i);
        const uint64_t a = picked / (m - 1);
        const uint64_t r = picked % (m - 1);
        const uint64_t b = r < a ? r : r + 1;
        out.push_back({mentions[a]->mention_id, mentions[b]->mention_id});
      }
    }
  });

  std::vector<MentionPair> pairs;
  for (auto &group : per_group) {
    for (auto &pair : group) pairs.push_back(std::move(pair));
  }
  Rng rng(seed);
  rng.Shuffle(pairs);
  return pairs;
}

std::vector<MentionPair> BuildDescriptionPairs(
    const std::vector<MentionRecord> &descriptions,
    const std::vector<MentionRecord> &records, uint64_t seed) {
  std::unordered_map<std::string, std::vector<const MentionRecord *>> organic;
  for (const MentionRecord &r : records) {
    if (r.source == MentionSource::kOrganic) {
      organic[r.entity_id].push_back(&r);
    }
  }
  std::vector<MentionPair> pairs;
  for (const MentionRecord &d : descriptions) {
    if (d.source != MentionSource::kDescription) continue;
    auto it = organic.find(d.entity_id);
    if (it == organic.end()) continue;
    Rng rng(MixSeed(seed, Fingerprint(d.mention_id)));
    const MentionRecord *partner = it->second[rng.Uniform(it->second.size())];
    pairs.push_back({partner->mention_id, d.mention_id});
  }
  return pairs;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens = SplitWhitespace(text);
  for (std::string &t : tokens) {
    for (char &c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return tokens;
}

int32_t TokenId(std::string_view token, int32_t vocab_size) {
  Require(vocab_size > kNumReservedIds, "vocab_size must exceed reserved ids");
  std::string lowered(token);
  for (char &c : lowered) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  const uint64_t buckets = static_cast<uint64_t>(vocab_size - kNumReservedIds);
  return kNumReservedIds + static_cast<int32_t>(Fingerprint(lowered) % buckets);
}

FeaturizedMention Featurize(const MentionRecord &record,
                            const FeaturizerOptions &options) {
  const int max_context = options.max_context;
  FeaturizedMention out;
  out.vocab_size = options.vocab_size;
  auto push = [&](int32_t id, int32_t type) {
    out.token_ids.push_back(id);
    out.type_ids.push_back(type);
  };
  auto push_token = [&](const std::string &token, int32_t type) {
    push(TokenId(token, options.vocab_size), type);
  };
  const int title_len = static_cast<int>(record.title_tokens.size());

  if (record.is_description()) {
    Require(max_context >= 2, "max_context too small for a description");
    const int title_budget =
        std::min({title_len + 1, options.max_title_budget, max_context});
    for (int i = 0; i + 1 < title_budget; ++i) {
      push_token(record.title_tokens[i], kDescriptionType);
    }
    push(kSepId, kDescriptionType);
    const int room = max_context - title_budget;
    const int body = std::min(room, static_cast<int>(record.context_tokens.size()));
    for (int i = 0; i < body; ++i) {
      push_token(record.context_tokens[i], kDescriptionType);
    }
    return out;
  }

  ValidateRecord(record);
  const TokenSpan span = *record.span;
  if (max_context < span.length() + 4) {
    Fail(ErrorKind::kInvalidArgument,
         "mention " + record.mention_id + ": span of " +
             std::to_string(span.length()) + " tokens cannot fit in " +
             std::to_string(max_context));
  }
  const int title_budget = std::min(
      {title_len + 1, options.max_title_budget, max_context - span.length() - 2});
  const int context_budget = max_context - title_budget - span.length() - 2;
  const int n = static_cast<int>(record.context_tokens.size());
  const auto [left, right] = CenterWindow(context_budget, span.start, n - span.end);

  for (int i = 0; i + 1 < title_budget; ++i) {
    push_token(record.title_tokens[i], kOrganicType);
  }
  push(kSepId, kOrganicType);
  for (int i = span.start - left; i < span.start; ++i) {
    push_token(record.context_tokens[i], kOrganicType);
  }
  push(kOpenId, kOrganicType);
  for (int i = span.start; i < span.end; ++i) {
    push_token(record.context_tokens[i], kOrganicType);
  }
  push(kCloseId, kOrganicType);
  for (int i = span.end; i < span.end + right; ++i) {
    push_token(record.context_tokens[i], kOrganicType);
  }
  return out;
}

}  // namespace mlink
