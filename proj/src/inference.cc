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

#include "mlink/inference.h"

#include <algorithm>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mlink/binary_io.h"
#include "mlink/errors.h"
#include "mlink/parallel.h"

namespace mlink {
namespace {

using Json = nlohmann::ordered_json;

size_t CountEntities(const MentionIndex &index, const std::vector<Neighbor> &neighbors) {
  std::unordered_map<std::string_view, char> seen;
  for (const Neighbor &nb : neighbors) seen.emplace(index.entity_id(nb.row), 0);
  return seen.size();
}

}  // namespace

const char *LinkModeName(LinkMode mode) {
  return mode == LinkMode::kAllMentions ? "all_mentions" : "top_per_entity";
}

LinkMode ParseLinkMode(std::string_view name) {
  if (name == "top_per_entity") return LinkMode::kTopPerEntity;
  if (name == "all_mentions") return LinkMode::kAllMentions;
  Fail(ErrorKind::kInvalidArgument, "unknown link mode \"" + std::string(name) +
                                        "\" (expected top_per_entity or all_mentions)");
}

void LinkOptions::Validate() const {
  Require(k >= 1, "k must be at least 1");
  Require(top_n >= 1, "top_n must be at least 1");
}

EntityPrediction RankEntities(const MentionIndex &index, const std::vector<Neighbor> &neighbors,
                              const LinkOptions &options) {
  options.Validate();
  EntityPrediction out;
  out.mode = options.mode;
  out.k = options.k;
  // First appearance in ranked neighbors is each entity's best mention.
  std::unordered_map<std::string_view, size_t> slot;
  for (const Neighbor &nb : neighbors) {
    const IndexRowLabel &label = index.label(nb.row);
    if (!slot.emplace(label.entity_id, out.entities.size()).second) continue;
    out.entities.push_back(
        {label.entity_id, nb.score, nb.score, nb.row, label.mention_id, label.language});
  }
  if (options.mode == LinkMode::kAllMentions && !out.entities.empty()) {
    std::vector<double> votes(out.entities.size(), 0.0);
    const size_t window = std::min(neighbors.size(), static_cast<size_t>(options.k));
    for (size_t i = 0; i < window; ++i) {
      const Neighbor &nb = neighbors[i];
      const double w = options.weighted_vote ? std::max(0.0, static_cast<double>(nb.score)) : 1.0;
      votes[slot.at(index.entity_id(nb.row))] += w;
    }
    size_t winner = 0;
    for (size_t e = 1; e < out.entities.size(); ++e) {
      const EntityScore &a = out.entities[e];
      const EntityScore &b = out.entities[winner];
      if (votes[e] != votes[winner]) {
        if (votes[e] > votes[winner]) winner = e;
      } else if (a.best_score != b.best_score) {
        if (a.best_score > b.best_score) winner = e;
      } else if (a.entity_id < b.entity_id) {
        winner = e;
      }
    }
    EntityScore top = out.entities[winner];
    top.score = static_cast<float>(votes[winner]);
    out.entities.erase(out.entities.begin() + static_cast<std::ptrdiff_t>(winner));
    out.entities.insert(out.entities.begin(), std::move(top));
  }
  if (out.entities.size() > options.top_n) out.entities.resize(options.top_n);
  return out;
}

EntityPrediction Predict(const Searcher &searcher, std::span<const float> query,
                         const LinkOptions &options) {
  options.Validate();
  const MentionIndex &index = searcher.index();
  if (index.empty()) Fail(ErrorKind::kNotFound, "no neighbors retrieved: index is empty");
  size_t fetch = std::max({4 * options.top_n, static_cast<size_t>(options.k), size_t{100}});
  fetch = std::min(fetch, index.size());
  std::vector<Neighbor> neighbors;
  while (true) {
    neighbors = searcher.Search(query, fetch);
    if (neighbors.size() < fetch || fetch >= index.size() ||
        CountEntities(index, neighbors) >= options.top_n) {
      break;
    }
    fetch = std::min(index.size(), fetch * 2);
  }
  if (neighbors.empty()) Fail(ErrorKind::kNotFound, "no neighbors retrieved");
  return RankEntities(index, neighbors, options);
}

std::vector<BatchPrediction> PredictBatch(const Searcher &searcher,
                                          const std::vector<Embedding> &queries,
                                          const LinkOptions &options) {
  options.Validate();
  std::vector<BatchPrediction> out(queries.size());
  ParallelFor(queries.size(), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      try {
        out[i].prediction = Predict(searcher, queries[i], options);
      } catch (const std::exception &e) {
        out[i].error = e.what();
      }
    }
  });
  return out;
}

std::vector<LinkedQuery> LinkRecords(const EncoderParams &params, const Searcher &searcher,
                                     const std::vector<MentionRecord> &queries,
                                     const FeaturizerOptions &featurizer,
                                     const LinkOptions &options) {
  std::vector<FeaturizedMention> inputs;
  inputs.reserve(queries.size());
  for (const MentionRecord &r : queries) inputs.push_back(Featurize(r, featurizer));
  const std::vector<Embedding> embeddings = EncodeAll(params, inputs);
  std::vector<BatchPrediction> predictions = PredictBatch(searcher, embeddings, options);
  std::vector<LinkedQuery> out(queries.size());
  for (size_t i = 0; i < queries.size(); ++i) {
    out[i].query_id = queries[i].mention_id;
    out[i].gold_entity = queries[i].entity_id;
    out[i].language = queries[i].language;
    out[i].prediction = std::move(predictions[i].prediction);
    out[i].error = std::move(predictions[i].error);
  }
  return out;
}

std::string SerializePredictionsJsonl(const std::vector<LinkedQuery> &linked) {
  std::string out;
  for (const LinkedQuery &q : linked) {
    Json obj;
    obj["query_id"] = q.query_id;
    if (!q.error.empty()) {
      obj["error"] = q.error;
    } else {
      if (!q.gold_entity.empty()) obj["gold_entity"] = q.gold_entity;
      obj["language"] = q.language;
      Json preds = Json::array();
      for (const EntityScore &e : q.prediction.entities) {
        Json p;
        p["entity_id"] = e.entity_id;
        p["score"] = e.score;
        p["mention_id"] = e.mention_id;
        p["language"] = e.language;
        preds.push_back(std::move(p));
      }
      obj["predictions"] = std::move(preds);
      obj["k"] = q.prediction.k;
      obj["mode"] = LinkModeName(q.prediction.mode);
    }
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<LinkedQuery> ParsePredictionsJsonl(std::string_view contents,
                                               std::string_view source_name) {
  std::vector<LinkedQuery> out;
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
      LinkedQuery q;
      q.query_id = obj.at("query_id").get<std::string>();
      if (auto it = obj.find("error"); it != obj.end()) {
        q.error = it->get<std::string>();
        out.push_back(std::move(q));
        continue;
      }
      if (auto it = obj.find("gold_entity"); it != obj.end()) {
        q.gold_entity = it->get<std::string>();
      }
      if (auto it = obj.find("language"); it != obj.end()) q.language = it->get<std::string>();
      q.prediction.k = obj.at("k").get<int>();
      q.prediction.mode = ParseLinkMode(obj.at("mode").get<std::string>());
      for (const Json &p : obj.at("predictions")) {
        EntityScore e;
        e.entity_id = p.at("entity_id").get<std::string>();
        e.score = p.at("score").get<float>();
        e.best_score = e.score;
        e.mention_id = p.at("mention_id").get<std::string>();
        e.language = p.at("language").get<std::string>();
        q.prediction.entities.push_back(std::move(e));
      }
      out.push_back(std::move(q));
    } catch (const std::exception &e) {
      Fail(ErrorKind::kParse,
           std::string(source_name) + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
  return out;
}

void SavePredictions(const std::vector<LinkedQuery> &linked,
                     const std::filesystem::path &path) {
  WriteFileAtomic(path, SerializePredictionsJsonl(linked));
}

std::vector<LinkedQuery> LoadPredictions(const std::filesystem::path &path) {
  return ParsePredictionsJsonl(ReadFile(path), path.string());
}

}  // namespace mlink
