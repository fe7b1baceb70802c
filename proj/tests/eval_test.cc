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


#include "mlink/eval.h"

#include <gtest/gtest.h>

#include <set>

#include "mlink/synthetic.h"
#include "test_util.h"

namespace mlink {
namespace {

// Prediction list of `n` entities "x0".."x<n-1>" with the gold entity placed
// at 1-based `rank` (0 leaves it out).
LinkedQuery Ranked(const std::string &id, const std::string &gold, size_t rank, size_t n = 120,
                   const std::string &language = "en") {
  LinkedQuery q;
  q.query_id = id;
  q.gold_entity = gold;
  q.language = language;
  for (size_t i = 1; i <= n; ++i) {
    EntityScore e;
    e.entity_id = i == rank ? gold : "x" + std::to_string(i);
    e.score = 1.0f - 0.001f * static_cast<float>(i);
    e.language = language;
    q.prediction.entities.push_back(e);
  }
  return q;
}

std::vector<LinkedQuery> FourQueries() {
  return {Ranked("q1", "A", 1), Ranked("q2", "B", 2), Ranked("q3", "C", 11),
          Ranked("q4", "D", 0)};
}

TEST(RecallTest, FourQueryFixture) {
  const auto queries = FourQueries();
  EXPECT_EQ(RecallAt(queries, 1).recall, 0.25);
  EXPECT_EQ(RecallAt(queries, 10).recall, 0.5);
  // Rank 11 is inside the first 100.
  EXPECT_EQ(RecallAt(queries, 100).recall, 0.75);
  EXPECT_EQ(RecallAt(queries, 100).total, 4u);
}

TEST(RecallTest, RankThreeCountsForTenNotOne) {
  const std::vector<LinkedQuery> q = {Ranked("q", "G", 3)};
  EXPECT_EQ(RecallAt(q, 1).correct, 0u);
  EXPECT_EQ(RecallAt(q, 10).correct, 1u);
}

TEST(RecallTest, AllTopOneGivesOneEverywhere) {
  const std::vector<LinkedQuery> q = {Ranked("a", "A", 1), Ranked("b", "B", 1)};
  const EvalReport r = BuildReport(q, {});
  for (double v : r.micro.recall) EXPECT_EQ(v, 1.0);
}

TEST(RecallTest, MissingGoldExcludedAndTallied) {
  std::vector<LinkedQuery> q = FourQueries();
  q.push_back(Ranked("q5", "", 1));
  const RecallResult r = RecallAt(q, 1);
  EXPECT_EQ(r.excluded, 1u);
  EXPECT_EQ(r.total, 4u);
  EXPECT_EQ(BuildReport(q, {}).excluded, 1u);
}

TEST(RecallTest, FailedQueryIsMiss) {
  LinkedQuery failed;
  failed.query_id = "f";
  failed.gold_entity = "A";
  failed.error = "boom";
  const std::vector<LinkedQuery> q = {Ranked("a", "A", 1), failed};
  EXPECT_EQ(RecallAt(q, 1).recall, 0.5);
}

TEST(BucketTest, Edges) {
  EXPECT_EQ(BucketOf(int64_t{0}), 0);
  EXPECT_EQ(BucketOf(int64_t{1}), 1);
  EXPECT_EQ(BucketOf(int64_t{5}), 1);
  EXPECT_EQ(BucketOf(int64_t{9}), 1);
  EXPECT_EQ(BucketOf(int64_t{10}), 2);
  EXPECT_EQ(BucketOf(int64_t{99}), 2);
  EXPECT_EQ(BucketOf(int64_t{100}), 3);
  EXPECT_EQ(BucketOf(int64_t{999}), 3);
  EXPECT_EQ(BucketOf(int64_t{1000}), 4);
  EXPECT_EQ(BucketOf(int64_t{9999}), 4);
  EXPECT_EQ(BucketOf(int64_t{10000}), 5);
  EXPECT_EQ(BucketOf(int64_t{1} << 40), 5);
  EXPECT_STREQ(BucketName(BucketOf(int64_t{5})), "[1,10)");
  EXPECT_STREQ(BucketName(BucketOf(int64_t{10000})), "[10k,+)");
  EXPECT_EQ(BucketOf("unseen", {{"seen", 4}}), 0);
}

TEST(BucketTest, TotalAndConsistentWithEdges) {
  const int64_t lo[kNumBuckets] = {0, 1, 10, 100, 1000, 10000};
  for (int64_t c = 0; c < 30000; ++c) {
    const int b = BucketOf(c);
    ASSERT_GE(c, lo[b]);
    if (b + 1 < kNumBuckets) ASSERT_LT(c, lo[b + 1]);
  }
}

TEST(ReportTest, EqualLanguageCountsMicroEqualsMacro) {
  const std::vector<LinkedQuery> q = {Ranked("a", "A", 1, 5, "en"), Ranked("b", "B", 0, 5, "de")};
  const EvalReport r = BuildReport(q, {}, {1});
  EXPECT_EQ(r.micro.recall[0], 0.5);
  EXPECT_EQ(r.macro_language[0], 0.5);
}

TEST(ReportTest, UnequalLanguageCountsMicroDiffersFromMacro) {
  std::vector<LinkedQuery> q;
  for (int i = 0; i < 9; ++i) q.push_back(Ranked("en" + std::to_string(i), "A", 1, 5, "en"));
  q.push_back(Ranked("de", "B", 0, 5, "de"));
  const EvalReport r = BuildReport(q, {}, {1});
  EXPECT_DOUBLE_EQ(r.micro.recall[0], 0.9);
  EXPECT_DOUBLE_EQ(r.macro_language[0], 0.5);
}

TEST(ReportTest, FourQueryFixtureSlices) {
  // A and B are head entities, C is rare, D unseen.
  const std::map<std::string, int64_t> counts = {{"A", 12000}, {"B", 50}, {"C", 3}};
  const EvalReport r = BuildReport(FourQueries(), counts);
  EXPECT_EQ(r.micro.recall, (std::vector<double>{0.25, 0.5, 0.75}));
  EXPECT_EQ(r.per_bucket[5].recall, (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(r.per_bucket[2].recall, (std::vector<double>{0, 1, 1}));
  EXPECT_EQ(r.per_bucket[1].recall, (std::vector<double>{0, 0, 1}));
  EXPECT_EQ(r.per_bucket[0].recall, (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(r.per_bucket[3].count, 0u);
  // Four non-empty buckets: (1+0+0+0)/4, (1+1+0+0)/4, (1+1+1+0)/4.
  EXPECT_EQ(r.macro_bucket, (std::vector<double>{0.25, 0.5, 0.75}));
  EXPECT_EQ(r.cross_language_fraction, 0.0);
}

TEST(ReportTest, CrossLanguageFraction) {
  std::vector<LinkedQuery> q = {Ranked("a", "A", 1, 3, "en"), Ranked("b", "B", 1, 3, "en")};
  q[1].prediction.entities[0].language = "de";
  const EvalReport r = BuildReport(q, {});
  EXPECT_EQ(r.cross_language_fraction, 0.5);
  EXPECT_EQ(r.cross_language_count, 1u);
}

TEST(ReportPropertyTest, MonotoneAndMicroMatchesSliceSums) {
  Rng rng(5);
  std::vector<LinkedQuery> q;
  std::map<std::string, int64_t> counts;
  const char *langs[] = {"en", "de", "fr"};
  for (int i = 0; i < 500; ++i) {
    const std::string gold = "g" + std::to_string(i % 37);
    counts[gold] = static_cast<int64_t>(rng.Uniform(20000));
    q.push_back(Ranked("q" + std::to_string(i), gold, rng.Uniform(130), 120,
                       langs[rng.Uniform(3)]));
  }
  const EvalReport r = BuildReport(q, counts);
  auto check = [&](const SliceRecall &s) {
    for (size_t c = 1; c < r.cuts.size(); ++c) EXPECT_LE(s.recall[c - 1], s.recall[c]);
  };
  check(r.micro);
  for (const auto &s : r.per_language) check(s);
  for (const auto &s : r.per_bucket) check(s);
  for (size_t c = 0; c < r.cuts.size(); ++c) {
    size_t lang_correct = 0, lang_total = 0, bucket_correct = 0, bucket_total = 0;
    for (const auto &s : r.per_language) lang_correct += s.correct[c], lang_total += s.count;
    for (const auto &s : r.per_bucket) bucket_correct += s.correct[c], bucket_total += s.count;
    const double micro = static_cast<double>(lang_correct) / static_cast<double>(lang_total);
    EXPECT_EQ(r.micro.recall[c], micro);
    EXPECT_EQ(r.micro.recall[c], RecallAt(q, r.cuts[c]).recall);
    EXPECT_EQ(bucket_correct, lang_correct);
    EXPECT_EQ(bucket_total, lang_total);
  }
}

TEST(ReportTest, TsvAndCurve) {
  const std::string tsv = ReportTsv(BuildReport(FourQueries(), {}));
  EXPECT_EQ(tsv.rfind("slice\tcut\trecall\tn\nmicro\t1\t0.250000\t4\n", 0), 0u);
  EXPECT_NE(tsv.find("micro\t100\t0.750000\t4\n"), std::string::npos);
  EXPECT_NE(tsv.find("bucket:[0,1)\t10\t0.500000\t4\n"), std::string::npos);
  EXPECT_NE(tsv.find("cross_language\t1\t0.000000\t4\n"), std::string::npos);
  EXPECT_NE(ReportTable(BuildReport(FourQueries(), {})).find("micro"), std::string::npos);

  const std::string csv = RecallCurveCsv(FourQueries(), 12);
  EXPECT_EQ(csv.rfind("k,micro,language:en\n1,0.250000,0.250000\n2,0.500000", 0), 0u);
  EXPECT_NE(csv.find("\n11,0.750000,0.750000\n"), std::string::npos);
}

TEST(SyntheticTest, Counts) {
  SyntheticConfig config;
  config.entities = 2;
  config.clusters_per_entity = 2;
  config.mentions_per_cluster = 10;
  config.queries_per_cluster = 3;
  const SyntheticCorpus c = MakeSyntheticCorpus(config);
  EXPECT_EQ(c.train.size(), 40u);
  EXPECT_EQ(c.descriptions.size(), 2u);
  EXPECT_EQ(c.queries.size(), 12u);
  EXPECT_EQ(c.query_clusters.size(), 12u);
  for (const auto &r : c.train) ValidateRecord(r);
  for (const auto &r : c.descriptions) {
    ValidateRecord(r);
    EXPECT_TRUE(r.is_description());
  }
}

TEST(SyntheticTest, ClustersDisjointAndDescriptionsFromClusterZero) {
  SyntheticConfig config;
  config.entities = 20;
  config.clusters_per_entity = 3;
  config.noise = 0.0;
  const SyntheticCorpus c = MakeSyntheticCorpus(config);
  std::map<std::pair<std::string, int>, std::set<std::string>> vocab;
  for (const auto &r : c.train) {
    const int cluster = SyntheticCluster(r.mention_id);
    ASSERT_GE(cluster, 0);
    vocab[{r.entity_id, cluster}].insert(r.context_tokens.begin(), r.context_tokens.end());
  }
  for (const auto &[a, ta] : vocab) {
    for (const auto &[b, tb] : vocab) {
      if (a == b) continue;
      for (const auto &t : ta) EXPECT_EQ(tb.count(t), 0u);
    }
  }
  for (const auto &d : c.descriptions) {
    EXPECT_EQ(SyntheticCluster(d.mention_id), -1);
    for (const auto &t : d.context_tokens) {
      EXPECT_EQ(vocab.at({d.entity_id, 0}).count(t), 1u) << t;
    }
  }
  for (size_t i = 0; i < c.queries.size(); ++i) {
    EXPECT_EQ(SyntheticCluster(c.queries[i].mention_id), c.query_clusters[i]);
  }
}

TEST(SyntheticTest, ZeroShotEntitiesHaveNoTrainingMentions) {
  SyntheticConfig config;
  config.entities = 5;
  config.zero_shot_entities = 3;
  const SyntheticCorpus c = MakeSyntheticCorpus(config);
  EXPECT_EQ(c.zero_shot_entities.size(), 3u);
  EXPECT_EQ(c.descriptions.size(), 8u);
  for (const auto &r : c.train) EXPECT_EQ(c.zero_shot_entities.count(r.entity_id), 0u);
  size_t zero_shot_queries = 0;
  for (const auto &q : c.queries) zero_shot_queries += c.zero_shot_entities.count(q.entity_id);
  EXPECT_EQ(zero_shot_queries, 3u * config.queries_per_cluster);
}

TEST(SyntheticTest, DeterministicBySeed) {
  SyntheticConfig config;
  config.entities = 10;
  const SyntheticCorpus a = MakeSyntheticCorpus(config);
  const SyntheticCorpus b = MakeSyntheticCorpus(config);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.queries, b.queries);
  config.seed = 1;
  EXPECT_NE(MakeSyntheticCorpus(config).train, a.train);
}

TEST(SyntheticTest, VocabTooSmallIsError) {
  SyntheticConfig config;
  config.entities = 100;
  config.clusters_per_entity = 2;
  config.tokens_per_cluster = 8;
  config.vocab = 1600;
  EXPECT_EQ(testutil::KindOf([&] { MakeSyntheticCorpus(config); }),
            ErrorKind::kInvalidArgument);
  config.vocab = 1601;
  EXPECT_NO_THROW(MakeSyntheticCorpus(config));
}

}  // namespace
}  // namespace mlink
