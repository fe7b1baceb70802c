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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>

#include "mlink/ann_index.h"
#include "mlink/rng.h"
#include "test_util.h"

namespace mlink {
namespace {

using testutil::KindOf;

constexpr double kPi = 3.14159265358979323846;

MentionIndex Fixture(const std::vector<double> &degrees,
                     const std::vector<std::string> &entities,
                     std::vector<MentionSource> sources = {}) {
  std::vector<float> vectors;
  std::vector<IndexRowLabel> labels;
  for (size_t i = 0; i < degrees.size(); ++i) {
    vectors.push_back(static_cast<float>(std::cos(degrees[i] * kPi / 180)));
    vectors.push_back(static_cast<float>(std::sin(degrees[i] * kPi / 180)));
    IndexRowLabel l;
    l.mention_id = "m" + std::to_string(i);
    l.entity_id = entities[i];
    l.language = "en";
    if (!sources.empty()) l.source = sources[i];
    labels.push_back(l);
  }
  return MentionIndex::FromVectors(2, std::move(vectors), std::move(labels), {});
}

MiningQuery QueryAt(const MentionIndex &index, size_t row, std::string positive = "") {
  MiningQuery q;
  q.query_id = index.mention_id(row);
  q.entity_id = index.entity_id(row);
  q.positive_id = positive;
  auto v = index.vector(row);
  q.embedding.assign(v.begin(), v.end());
  return q;
}

// m0 0deg A, m1 10deg A, m2 30deg B, m3 60deg C, m4 100deg B.
MentionIndex FiveMentions() {
  return Fixture({0, 10, 30, 60, 100}, {"A", "A", "B", "C", "B"});
}

TEST(MiningTest, FiveMentionFixtureMatchesHandScores) {
  const MentionIndex index = FiveMentions();
  ExactSearcher searcher(index);
  // Query m3 first in input order; m0 still claims capped entities first.
  const std::vector<MiningQuery> queries = {QueryAt(index, 3, "m3p"), QueryAt(index, 0, "m1")};
  const std::map<std::string, int64_t> counts = {{"A", 1}, {"B", 1}, {"C", 1}};
  MiningOptions options;
  options.negatives_per_query = 2;
  options.cap_ratio = 1;
  const auto mined = MineHardNegatives(searcher, queries, counts, options);
  ASSERT_EQ(mined.size(), 2u);
  // m0 ranks m1 (same entity), m2, m3, m4: takes B and C.
  EXPECT_EQ(mined[1].query_id, "m0");
  EXPECT_EQ(mined[1].positive_id, "m1");
  EXPECT_EQ(mined[1].negative_ids, (std::vector<std::string>{"m2", "m3"}));
  // m3 ranks m2 (B, capped), m4 (B, capped), m1 (A), m0 (A, capped).
  EXPECT_EQ(mined[0].negative_ids, (std::vector<std::string>{"m1"}));

  options.cap_ratio = 10;
  const auto loose = MineHardNegatives(searcher, queries, counts, options);
  EXPECT_EQ(loose[0].negative_ids, (std::vector<std::string>{"m2", "m4"}));
  EXPECT_EQ(loose[1].negative_ids, (std::vector<std::string>{"m2", "m3"}));
}

TEST(MiningTest, SameEntityTopCandidateExcluded) {
  const MentionIndex index = FiveMentions();
  ExactSearcher searcher(index);
  MiningOptions options;
  options.negatives_per_query = 4;
  const auto mined = MineHardNegatives(searcher, {QueryAt(index, 0)},
                                       {{"A", 5}, {"B", 5}, {"C", 5}}, options);
  // m0 itself and m1 share entity A.
  EXPECT_EQ(mined[0].negative_ids, (std::vector<std::string>{"m2", "m3", "m4"}));
}

TEST(MiningTest, EntityWithoutCountIsNeverNegative) {
  const MentionIndex index = FiveMentions();
  ExactSearcher searcher(index);
  MiningOptions options;
  options.negatives_per_query = 3;
  const auto mined = MineHardNegatives(searcher, {QueryAt(index, 0)}, {{"C", 1}}, options);
  EXPECT_EQ(mined[0].negative_ids, (std::vector<std::string>{"m3"}));
}

TEST(MiningTest, EntityWithThreePositivesCappedAtThirty) {
  // Row 0 is entity "hot"; 200 queries near it each want 10 negatives.
  const int dim = 8;
  std::vector<float> base = testutil::RandomUnitVectors(400, dim, 3);
  std::vector<IndexRowLabel> labels(400);
  for (size_t i = 0; i < labels.size(); ++i) {
    labels[i].mention_id = "m" + std::to_string(i);
    labels[i].entity_id = i < 100 ? "hot" : "e" + std::to_string(i % 37);
    labels[i].language = "en";
  }
  const MentionIndex index = MentionIndex::FromVectors(dim, base, labels, {});
  ExactSearcher searcher(index);
  std::vector<MiningQuery> queries;
  for (size_t i = 0; i < 200; ++i) {
    MiningQuery q = QueryAt(index, i % 100);
    q.query_id = "q" + std::to_string(i);
    q.entity_id = "other" + std::to_string(i % 5);
    queries.push_back(q);
  }
  std::map<std::string, int64_t> counts = {{"hot", 3}};
  for (int e = 0; e < 37; ++e) counts["e" + std::to_string(e)] = 100;
  const auto mined = MineHardNegatives(searcher, queries, counts, MiningOptions{});
  std::map<std::string, int64_t> as_negative;
  for (const auto &ex : mined) {
    EXPECT_EQ(ex.negative_ids.size(), 10u);
    for (const auto &id : ex.negative_ids) {
      ++as_negative[index.entity_id(std::stoul(id.substr(1)))];
    }
  }
  EXPECT_EQ(as_negative["hot"], 30);
  for (const auto &[entity, n] : as_negative) EXPECT_LE(n, 10 * counts[entity]) << entity;
}

TEST(MiningTest, PoolGrowsPastCappedCandidates) {
  // The 60 best rows for the query all belong to a capped-out entity.
  const int dim = 4;
  std::vector<float> vectors;
  std::vector<IndexRowLabel> labels;
  for (int i = 0; i < 100; ++i) {
    const double a = i * 0.01;
    vectors.insert(vectors.end(), {static_cast<float>(std::cos(a)),
                                   static_cast<float>(std::sin(a)), 0.0f, 0.0f});
    IndexRowLabel l;
    l.mention_id = "m" + std::to_string(i);
    l.entity_id = i < 60 ? "capped" : "free" + std::to_string(i);
    labels.push_back(l);
  }
  const MentionIndex index = MentionIndex::FromVectors(dim, vectors, labels, {});
  ExactSearcher searcher(index);
  MiningQuery q;
  q.query_id = "q";
  q.entity_id = "gold";
  q.embedding = {1, 0, 0, 0};
  std::map<std::string, int64_t> counts;
  for (int i = 60; i < 100; ++i) counts["free" + std::to_string(i)] = 1;
  MiningOptions options;
  options.negatives_per_query = 5;
  const auto mined = MineHardNegatives(searcher, {q}, counts, options);
  EXPECT_EQ(mined[0].negative_ids,
            (std::vector<std::string>{"m60", "m61", "m62", "m63", "m64"}));
}

// Greedy over the full exact ranking, queries in id order.
std::vector<MinedExample> OracleMine(const MentionIndex &index,
                                     const std::vector<MiningQuery> &queries,
                                     const std::map<std::string, int64_t> &counts,
                                     const MiningOptions &options) {
  std::vector<size_t> order(queries.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return queries[a].query_id < queries[b].query_id;
  });
  std::map<std::string, int64_t> used;
  std::vector<MinedExample> out(queries.size());
  for (size_t i : order) {
    out[i].query_id = queries[i].query_id;
    out[i].positive_id = queries[i].positive_id;
    std::vector<Neighbor> all;
    for (size_t r = 0; r < index.size(); ++r) {
      float s = 0;
      // Same accumulation as the shared kernel is not needed: ties are absent.
      for (int j = 0; j < index.dim(); ++j) s += queries[i].embedding[j] * index.vector(r)[j];
      all.push_back({static_cast<uint32_t>(r), s});
    }
    std::sort(all.begin(), all.end(), RanksBefore);
    for (const Neighbor &nb : all) {
      if (out[i].negative_ids.size() == static_cast<size_t>(options.negatives_per_query)) break;
      const std::string &e = index.entity_id(nb.row);
      if (e == queries[i].entity_id) continue;
      auto it = counts.find(e);
      const int64_t cap = it == counts.end() ? 0 : it->second * options.cap_ratio;
      if (used[e] >= cap) continue;
      ++used[e];
      out[i].negative_ids.push_back(index.mention_id(nb.row));
    }
  }
  return out;
}

TEST(MiningTest, MatchesBruteForceGreedyOracle) {
  const int dim = 8;
  const MentionIndex index = testutil::IndexOf(testutil::RandomUnitVectors(300, dim, 5), dim, 20);
  ExactSearcher searcher(index);
  Rng rng(9);
  std::map<std::string, int64_t> counts;
  for (int e = 0; e < 20; ++e) counts["e" + std::to_string(e)] = static_cast<int64_t>(rng.Uniform(4));
  const std::vector<float> qv = testutil::RandomUnitVectors(60, dim, 6);
  std::vector<MiningQuery> queries;
  for (int i = 0; i < 60; ++i) {
    MiningQuery q;
    q.query_id = "q" + std::to_string((i * 37) % 60);
    q.entity_id = "e" + std::to_string(rng.Uniform(20));
    q.embedding.assign(qv.begin() + i * dim, qv.begin() + (i + 1) * dim);
    queries.push_back(q);
  }
  MiningOptions options;
  options.negatives_per_query = 5;
  options.cap_ratio = 2;
  EXPECT_EQ(MineHardNegatives(searcher, queries, counts, options),
            OracleMine(index, queries, counts, options));
}

TEST(MiningTest, InvariantsHoldUnderApproximateSearch) {
  const int dim = 16;
  auto index = std::make_shared<const MentionIndex>(
      testutil::IndexOf(testutil::RandomUnitVectors(2000, dim, 7), dim, 50));
  QuantizerConfig config;
  config.num_leaves = 20;
  const QuantizedIndex q = QuantizedIndex::Train(index, config);
  SearchParams params;
  params.leaves_to_probe = 4;
  AnnSearcher searcher(q, params);
  std::vector<MiningQuery> queries;
  for (size_t r = 0; r < 300; ++r) queries.push_back(QueryAt(*index, r));
  const auto counts = CountPositives(queries);
  const auto mined = MineHardNegatives(searcher, queries, counts, MiningOptions{});
  std::map<std::string, int64_t> as_negative;
  for (size_t i = 0; i < mined.size(); ++i) {
    std::set<std::string> unique(mined[i].negative_ids.begin(), mined[i].negative_ids.end());
    EXPECT_EQ(unique.size(), mined[i].negative_ids.size());
    EXPECT_LE(mined[i].negative_ids.size(), 10u);
    for (const auto &id : mined[i].negative_ids) {
      const std::string &e = index->entity_id(std::stoul(id.substr(1)));
      EXPECT_NE(e, queries[i].entity_id);
      ++as_negative[e];
    }
  }
  for (const auto &[entity, n] : as_negative) {
    EXPECT_LE(n, 10 * counts.at(entity)) << entity;
  }
}

TEST(MiningTest, RejectsNegativeOptions) {
  const MentionIndex index = FiveMentions();
  ExactSearcher searcher(index);
  MiningOptions options;
  options.cap_ratio = -1;
  EXPECT_EQ(KindOf([&] { MineHardNegatives(searcher, {}, {}, options); }),
            ErrorKind::kInvalidArgument);
}

TEST(ResampleTest, TwoMentionEntityTakesTheOther) {
  const MentionIndex index = FiveMentions();
  const auto pairs = ResamplePositives(index, {QueryAt(index, 0, "stale")});
  EXPECT_EQ(pairs[0], (MentionPair{"m0", "m1"}));
}

TEST(ResampleTest, PicksArgmaxAmongThree) {
  // Entity X at 0, 50, 20 degrees; query m1 (50deg) is closest to m2 (20deg).
  const MentionIndex index = Fixture({0, 50, 20, 90}, {"X", "X", "X", "Y"});
  const auto pairs = ResamplePositives(index, {QueryAt(index, 1, "m0")});
  EXPECT_EQ(pairs[0].positive_id, "m2");
  const auto again = ResamplePositives(index, {QueryAt(index, 1, "m0")});
  EXPECT_EQ(again, pairs);
}

TEST(ResampleTest, SingleMentionKeepsOriginalAndNeverSelf) {
  const MentionIndex index = FiveMentions();
  const auto pairs = ResamplePositives(index, {QueryAt(index, 3, "orig")});
  EXPECT_EQ(pairs[0].positive_id, "orig");
  const MentionIndex many = testutil::IndexOf(testutil::RandomUnitVectors(200, 8, 2), 8, 7);
  std::vector<MiningQuery> queries;
  for (size_t r = 0; r < many.size(); ++r) queries.push_back(QueryAt(many, r, "x"));
  for (const MentionPair &p : ResamplePositives(many, queries)) {
    EXPECT_NE(p.query_id, p.positive_id);
    EXPECT_EQ(many.entity_id(std::stoul(p.positive_id.substr(1))),
              many.entity_id(std::stoul(p.query_id.substr(1))));
  }
}

TEST(ResampleTest, DescriptionPositiveStaysDescription) {
  const MentionIndex index =
      Fixture({0, 5, 80}, {"A", "A", "A"},
              {MentionSource::kOrganic, MentionSource::kOrganic, MentionSource::kDescription});
  // Positive m2 is the description; m1 is closer but organic.
  EXPECT_EQ(ResamplePositives(index, {QueryAt(index, 0, "m2")})[0].positive_id, "m2");
  EXPECT_EQ(ResamplePositives(index, {QueryAt(index, 0, "m1")})[0].positive_id, "m1");
}

TEST(MinedJsonlTest, RoundTripAndLineErrors) {
  const std::vector<MinedExample> examples = {{"q1", "p1", {"n1", "n2"}}, {"q2", "p2", {}}};
  const std::string text = SerializeMinedJsonl(examples);
  EXPECT_EQ(text,
            "{\"query_id\":\"q1\",\"positive_id\":\"p1\",\"negative_ids\":[\"n1\",\"n2\"]}\n"
            "{\"query_id\":\"q2\",\"positive_id\":\"p2\",\"negative_ids\":[]}\n");
  EXPECT_EQ(ParseMinedJsonl(text, "x"), examples);
  try {
    ParseMinedJsonl(text + "\n{\"query_id\":1}\n", "mined.jsonl");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find("mined.jsonl:4"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace mlink
