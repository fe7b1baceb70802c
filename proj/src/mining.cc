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

#include "mlink/mining.h"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mlink/binary_io.h"
#include "mlink/errors.h"
#include "mlink/kernels.h"
#include "mlink/parallel.h"

namespace mlink {
namespace {

using Json = nlohmann::ordered_json;

// Search pool for the first retrieval round.
size_t InitialPool(int negatives_per_query) {
  return std::max<size_t>(32, 4 * static_cast<size_t>(negatives_per_query));
}

}  // namespace

std::vector<MiningQuery> PrepareMiningQueries(const EncoderParams &params,
                                              const std::vector<MentionRecord> &records,
                                              const std::vector<MentionPair> &pairs,
                                              const FeaturizerOptions &featurizer) {
  std::unordered_map<std::string, size_t> by_id;
  for (size_t i = 0; i < records.size(); ++i) by_id.emplace(records[i].mention_id, i);
  std::vector<MiningQuery> queries(pairs.size());
  std::vector<FeaturizedMention> inputs(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    auto it = by_id.find(pairs[i].query_id);
    if (it == by_id.end()) {
      Fail(ErrorKind::kNotFound, "pair query \"" + pairs[i].query_id + "\" not in corpus");
    }
    const MentionRecord &r = records[it->second];
    queries[i].query_id = r.mention_id;
    queries[i].entity_id = r.entity_id;
    queries[i].positive_id = pairs[i].positive_id;
    inputs[i] = Featurize(r, featurizer);
  }
  std::vector<Embedding> embeddings = EncodeAll(params, inputs);
  for (size_t i = 0; i < queries.size(); ++i) queries[i].embedding = std::move(embeddings[i]);
  return queries;
}

std::map<std::string, int64_t> CountPositives(const std::vector<MiningQuery> &queries) {
  std::map<std::string, int64_t> counts;
  for (const MiningQuery &q : queries) ++counts[q.entity_id];
  return counts;
}

std::vector<MinedExample> MineHardNegatives(
    const Searcher &searcher, const std::vector<MiningQuery> &queries,
    const std::map<std::string, int64_t> &positive_counts, const MiningOptions &options) {
  Require(options.negatives_per_query >= 0, "negatives_per_query must be >= 0");
  Require(options.cap_ratio >= 0, "cap_ratio must be >= 0");
  const MentionIndex &index = searcher.index();
  const size_t want = static_cast<size_t>(options.negatives_per_query);
  const size_t first_pool = std::min(index.size(), InitialPool(options.negatives_per_query));

  std::vector<std::vector<Neighbor>> retrieved(queries.size());
  if (want > 0) {
    ParallelFor(queries.size(), [&](size_t begin, size_t end) {
      for (size_t i = begin; i < end; ++i) {
        retrieved[i] = searcher.Search(queries[i].embedding, first_pool);
      }
    });
  }

  std::vector<size_t> order(queries.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return queries[a].query_id < queries[b].query_id;
  });

  std::unordered_map<std::string, int64_t> used;
  auto cap_of = [&](const std::string &entity) -> int64_t {
    auto it = positive_counts.find(entity);
    return it == positive_counts.end() ? 0 : it->second * options.cap_ratio;
  };

  std::vector<MinedExample> out(queries.size());
  for (size_t i : order) {
    const MiningQuery &q = queries[i];
    MinedExample &ex = out[i];
    ex.query_id = q.query_id;
    ex.positive_id = q.positive_id;
    if (want == 0) continue;
    std::unordered_set<uint32_t> seen;
    std::vector<Neighbor> candidates = std::move(retrieved[i]);
    size_t pool = first_pool;
    while (true) {
      for (const Neighbor &nb : candidates) {
        if (ex.negative_ids.size() == want) break;
        if (!seen.insert(nb.row).second) continue;
        const std::string &entity = index.entity_id(nb.row);
        if (entity == q.entity_id) continue;
        int64_t &count = used[entity];
        if (count >= cap_of(entity)) continue;
        ++count;
        ex.negative_ids.push_back(index.mention_id(nb.row));
      }
      if (ex.negative_ids.size() == want || candidates.size() < pool || pool >= index.size()) {
        break;
      }
      pool = std::min(index.size(), pool * 2);
      candidates = searcher.Search(q.embedding, pool);
    }
  }
  return out;
}

std::vector<MentionPair> ResamplePositives(const MentionIndex &index,
                                           const std::vector<MiningQuery> &queries) {
  std::unordered_map<std::string, std::vector<uint32_t>> rows_of;
  std::unordered_map<std::string, uint32_t> row_of_id;
  for (size_t r = 0; r < index.size(); ++r) {
    rows_of[index.entity_id(r)].push_back(static_cast<uint32_t>(r));
    row_of_id.emplace(index.mention_id(r), static_cast<uint32_t>(r));
  }
  std::vector<MentionPair> out(queries.size());
  ParallelFor(queries.size(), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const MiningQuery &q = queries[i];
      out[i] = {q.query_id, q.positive_id};
      auto group = rows_of.find(q.entity_id);
      if (group == rows_of.end()) continue;
      Require(q.embedding.size() == static_cast<size_t>(index.dim()),
              "query embedding dimension does not match the index");
      MentionSource source = MentionSource::kOrganic;
      if (auto p = row_of_id.find(q.positive_id); p != row_of_id.end()) {
        source = index.label(p->second).source;
      }
      bool found = false;
      Neighbor best;
      for (uint32_t r : group->second) {
        const IndexRowLabel &label = index.label(r);
        if (label.source != source || label.mention_id == q.query_id) continue;
        const Neighbor cand{r, DotProduct(q.embedding.data(), index.vector(r).data(),
                                          static_cast<size_t>(index.dim()))};
        if (!found || RanksBefore(cand, best)) best = cand;
        found = true;
      }
      if (found) out[i].positive_id = index.mention_id(best.row);
    }
  });
  return out;
}

std::string SerializeMinedJsonl(const std::vector<MinedExample> &examples) {
  std::string out;
  for (const MinedExample &ex : examples) {
    Json obj;
    obj["query_id"] = ex.query_id;
    obj["positive_id"] = ex.positive_id;
    obj["negative_ids"] = ex.negative_ids;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<MinedExample> ParseMinedJsonl(std::string_view contents,
                                          std::string_view source_name) {
  std::vector<MinedExample> out;
  size_t line_number = 0;
  size_t pos = 0;
  while (pos < contents.size()) {
    size_t eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string_view line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const Json obj = Json::parse(line);
      MinedExample ex;
      ex.query_id = obj.at("query_id").get<std::string>();
      ex.positive_id = obj.at("positive_id").get<std::string>();
      ex.negative_ids = obj.at("negative_ids").get<std::vector<std::string>>();
      out.push_back(std::move(ex));
    } catch (const std::exception &e) {
      Fail(ErrorKind::kParse,
           std::string(source_name) + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
  return out;
}

void SaveMined(const std::vector<MinedExample> &examples,
               const std::filesystem::path &path) {
  WriteFileAtomic(path, SerializeMinedJsonl(examples));
}

std::vector<MinedExample> LoadMined(const std::filesystem::path &path) {
  return ParseMinedJsonl(ReadFile(path), path.string());
}

}  // namespace mlink
