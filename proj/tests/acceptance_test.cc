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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "mlink/ann_index.h"
#include "mlink/binary_io.h"
#include "mlink/encoder.h"
#include "mlink/eval.h"
#include "mlink/exact_index.h"
#include "mlink/inference.h"
#include "mlink/mining.h"
#include "mlink/pipeline.h"
#include "mlink/rng.h"
#include "mlink/synthetic.h"
#include "test_util.h"

namespace mlink {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

int failures = 0;

void Verdict(const std::string &name, bool pass, const std::string &detail) {
  std::printf("%s  %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

// Every report built here is checked for recall monotone in the cut.
std::vector<EvalReport> all_reports;

EvalReport Report(const std::vector<LinkedQuery> &linked,
                  const std::map<std::string, int64_t> &counts) {
  all_reports.push_back(BuildReport(linked, counts));
  return all_reports.back();
}

// ---------------------------------------------------------------------------
// Gradients against central differences.

FeaturizedMention RandomInput(Rng &rng, int32_t vocab) {
  FeaturizedMention fm;
  fm.vocab_size = vocab;
  const int len = 1 + static_cast<int>(rng.Uniform(6));
  const int32_t type = static_cast<int32_t>(rng.Uniform(2));
  for (int i = 0; i < len; ++i) {
    fm.token_ids.push_back(1 + static_cast<int32_t>(rng.Uniform(vocab - 1)));
    fm.type_ids.push_back(type);
  }
  return fm;
}

double MaxRelativeError(EncoderParams params, const TrainBatch &batch,
                        LossAndGradients (*loss)(const EncoderParams &, const TrainBatch &)) {
  constexpr double kStep = 1e-4;
  const LossAndGradients analytic = loss(params, batch);
  std::vector<double> grads;
  analytic.gradients.ForEachTensor([&](std::string_view, std::span<const double> v, bool) {
    grads.insert(grads.end(), v.begin(), v.end());
  });
  std::vector<double *> slots;
  params.ForEachTensor([&](std::string_view, std::span<double> v, bool) {
    for (double &x : v) slots.push_back(&x);
  });
  double worst = 0.0;
  for (size_t i = 0; i < slots.size(); ++i) {
    const double saved = *slots[i];
    *slots[i] = saved + kStep;
    const double up = loss(params, batch).loss;
    *slots[i] = saved - kStep;
    const double down = loss(params, batch).loss;
    *slots[i] = saved;
    const double numeric = (up - down) / (2 * kStep);
    const double scale = std::max(std::abs(numeric), std::abs(grads[i]));
    if (scale < 1e-7) continue;
    worst = std::max(worst, std::abs(numeric - grads[i]) / scale);
  }
  return worst;
}

void CheckGradients() {
  const auto start = Clock::now();
  double worst_inbatch = 0.0, worst_hard = 0.0;
  constexpr int kConfigs = 6;
  for (int t = 0; t < kConfigs; ++t) {
    Rng rng(7000 + t);
    EncoderConfig config;
    config.vocab_size = 24;
    config.embedding_dim = 3 + static_cast<int>(rng.Uniform(4));
    config.hidden_dim = 3 + static_cast<int>(rng.Uniform(5));
    config.output_dim = 4 + static_cast<int>(rng.Uniform(13));  // <= 16
    EncoderParams params = InitializeParams(config, t);
    params.ForEachTensor([&](std::string_view, std::span<double> v, bool) {
      for (double &x : v) x = rng.Normal(0.0, 0.5);
    });
    params.temperature = 0.2 + 0.8 * rng.UniformDouble();
    const int b = 2 + static_cast<int>(rng.Uniform(7));  // <= 8
    TrainBatch batch;
    for (int i = 0; i < b; ++i) {
      batch.queries.push_back(RandomInput(rng, config.vocab_size));
      batch.positives.push_back(RandomInput(rng, config.vocab_size));
      auto &negs = batch.hard_negatives.emplace_back();
      const int k = 1 + static_cast<int>(rng.Uniform(3));
      for (int j = 0; j < k; ++j) negs.push_back(RandomInput(rng, config.vocab_size));
    }
    worst_inbatch = std::max(worst_inbatch, MaxRelativeError(params, batch, InBatchLoss));
    worst_hard = std::max(worst_hard, MaxRelativeError(params, batch, HardNegativeLoss));
  }
  const double elapsed = Seconds(start);
  Verdict("gradient correctness",
          worst_inbatch < 1e-4 && worst_hard < 1e-4 && elapsed < 10.0,
          fmt::format("max rel err in-batch {:.2e}, hard-negative {:.2e} over {} configs "
                      "(need < 1e-4), {:.1f}s (need < 10s)",
                      worst_inbatch, worst_hard, kConfigs, elapsed));
}

// ---------------------------------------------------------------------------
// Synthetic benchmark shared by the end-task criteria.

struct Benchmark {
  SyntheticCorpus corpus;
  std::vector<MentionRecord> records;  // training mentions plus descriptions
  PipelineOptions options;
  EncoderParams params;
  double train_seconds = 0.0;
};

Benchmark TrainBenchmark() {
  Benchmark b;
  SyntheticConfig sc;
  sc.entities = 1000;
  sc.clusters_per_entity = 2;
  sc.mentions_per_cluster = 10;
  sc.queries_per_cluster = 2;
  sc.zero_shot_entities = 40;
  sc.tokens_per_cluster = 8;
  sc.vocab = 40000;
  sc.noise = 0.5;
  sc.seed = 11;
  b.corpus = MakeSyntheticCorpus(sc);
  b.records = b.corpus.train;
  b.records.insert(b.records.end(), b.corpus.descriptions.begin(), b.corpus.descriptions.end());
  b.options.train.steps = 300;
  b.options.train.batch_size = 128;
  b.options.mining_rounds = 0;
  b.options.seed = 11;
  const auto start = Clock::now();
  b.params = TrainPipeline(b.records, b.options).params;
  b.train_seconds = Seconds(start);
  return b;
}

// Queries selected by `keep(i)`.
std::vector<MentionRecord> Queries(const Benchmark &b, const std::function<bool(size_t)> &keep) {
  std::vector<MentionRecord> out;
  for (size_t i = 0; i < b.corpus.queries.size(); ++i) {
    if (keep(i)) out.push_back(b.corpus.queries[i]);
  }
  return out;
}

bool IsZeroShot(const Benchmark &b, size_t i) {
  return b.corpus.zero_shot_entities.count(b.corpus.queries[i].entity_id) > 0;
}

std::vector<LinkedQuery> Link(const Benchmark &b, const Searcher &s,
                              const std::vector<MentionRecord> &queries,
                              LinkOptions options = LinkOptions{}) {
  return LinkRecords(b.params, s, queries, b.options.featurizer, options);
}

void CheckClusterGap(const Benchmark &b) {
  const auto start = Clock::now();
  const auto second_cluster = Queries(b, [&](size_t i) {
    return b.corpus.query_clusters[i] == 1 && !IsZeroShot(b, i);
  });
  const MentionIndex mentions =
      BuildIndex(b.params, b.records, IndexContents::kMentionsOnly, b.options.featurizer);
  const MentionIndex descriptions =
      BuildIndex(b.params, b.records, IndexContents::kDescriptionsOnly, b.options.featurizer);
  const auto m = Report(Link(b, ExactSearcher(mentions), second_cluster),
                        mentions.entity_positive_counts());
  const auto d = Report(Link(b, ExactSearcher(descriptions), second_cluster),
                        descriptions.entity_positive_counts());
  const double gap = 100.0 * (m.micro.recall[0] - d.micro.recall[0]);
  const double elapsed = b.train_seconds + Seconds(start);
  Verdict("mention index beats descriptions on unseen context mode",
          gap >= 10.0 && elapsed < 300.0,
          fmt::format("cluster-2 R@1 mentions {:.4f} vs descriptions-only {:.4f} over {} queries, "
                      "gap {:.1f} points (need >= 10), {:.0f}s incl. training (need < 300s)",
                      m.micro.recall[0], d.micro.recall[0], second_cluster.size(), gap, elapsed));
}

void CheckZeroShot(const Benchmark &b) {
  const auto unseen = Queries(b, [&](size_t i) { return IsZeroShot(b, i); });
  const MentionIndex mentions =
      BuildIndex(b.params, b.records, IndexContents::kMentionsOnly, b.options.featurizer);
  const MentionIndex both = BuildIndex(b.params, b.records,
                                       IndexContents::kMentionsAndDescriptions,
                                       b.options.featurizer);
  const auto m = Report(Link(b, ExactSearcher(mentions), unseen), mentions.entity_positive_counts());
  const auto d = Report(Link(b, ExactSearcher(both), unseen), both.entity_positive_counts());
  bool zero = true;
  for (double r : m.micro.recall) zero &= r == 0.0;
  // Every unseen entity falls in the [0,1) bucket.
  const bool bucketed = m.per_bucket[0].count == unseen.size();
  Verdict("zero-shot contract", zero && bucketed && d.micro.recall[1] > 0.0,
          fmt::format("{} held-out-entity queries: mentions-only R@1/10/100 = {}/{}/{} (need 0); "
                      "with descriptions R@10 = {:.4f} (need > 0)",
                      unseen.size(), m.micro.recall[0], m.micro.recall[1], m.micro.recall[2],
                      d.micro.recall[1]));
}

// ---------------------------------------------------------------------------
// Negative cap.

// Largest negative-to-positive ratio minus the cap; <= 0 when respected.
// `binding` counts entities used exactly up to their cap.
bool CapHolds(const std::vector<MinedExample> &mined,
              const std::map<std::string, std::string> &entity_of,
              const std::map<std::string, int64_t> &positives, int cap_ratio, size_t &binding,
              size_t &checked) {
  std::map<std::string, int64_t> negatives;
  for (const MinedExample &ex : mined) {
    for (const std::string &id : ex.negative_ids) ++negatives[entity_of.at(id)];
  }
  bool ok = true;
  for (const auto &[entity, count] : negatives) {
    auto it = positives.find(entity);
    const int64_t cap = it == positives.end() ? 0 : cap_ratio * it->second;
    ok &= count <= cap;
    binding += count == cap;
    ++checked;
  }
  return ok;
}

void CheckNegativeCap(const Benchmark &b) {
  bool ok = true;
  size_t binding = 0, checked = 0, sets = 0;
  MiningOptions options;  // cap_ratio 10

  // Mined with the trained benchmark model over a slice of its pairs.
  {
    std::vector<MentionPair> pairs = BuildTrainingPairs(b.records, 4, 3);
    const MiningRound round = MineRound(b.params, b.records, pairs, b.options.featurizer, options);
    std::map<std::string, std::string> entity_of;
    for (const auto &r : b.records) entity_of[r.mention_id] = r.entity_id;
    std::map<std::string, int64_t> positives;
    for (const auto &p : round.pairs) ++positives[entity_of.at(p.query_id)];
    ok &= CapHolds(round.examples, entity_of, positives, options.cap_ratio, binding, checked);
    ++sets;
  }
  // Skewed random fixtures where popular entities have few positives.
  for (int t = 0; t < 20; ++t) {
    Rng rng(900 + t);
    const int dim = 8;
    const size_t n = 600;
    std::vector<IndexRowLabel> labels(n);
    std::map<std::string, std::string> entity_of;
    for (size_t i = 0; i < n; ++i) {
      labels[i].mention_id = "m" + std::to_string(i);
      labels[i].entity_id = "e" + std::to_string(rng.Uniform(2) ? rng.Uniform(4) : rng.Uniform(80));
      labels[i].language = "en";
      entity_of[labels[i].mention_id] = labels[i].entity_id;
    }
    const MentionIndex index =
        MentionIndex::FromVectors(dim, testutil::RandomUnitVectors(n, dim, 50 + t), labels, {});
    std::vector<MiningQuery> queries;
    for (size_t i = 0; i < 150; ++i) {
      const size_t row = rng.Uniform(n);
      MiningQuery q;
      q.query_id = "q" + std::to_string(i);
      q.entity_id = index.entity_id(row);
      q.positive_id = index.mention_id(row);
      auto v = index.vector(row);
      q.embedding.assign(v.begin(), v.end());
      queries.push_back(std::move(q));
    }
    // Positive counts deliberately small for the popular entities.
    std::map<std::string, int64_t> positives;
    for (int e = 0; e < 80; ++e) positives["e" + std::to_string(e)] = 1 + static_cast<int64_t>(rng.Uniform(3));
    const auto mined = MineHardNegatives(ExactSearcher(index), queries, positives, options);
    ok &= CapHolds(mined, entity_of, positives, options.cap_ratio, binding, checked);
    ++sets;
  }
  Verdict("negative cap invariant", ok && binding > 0,
          fmt::format("{} mined sets, {} (set, entity) totals all <= 10 x positives; "
                      "{} reach the cap exactly",
                      sets, checked, binding));
}

// ---------------------------------------------------------------------------
// Approximate search.

void CheckAnnFidelity(const Benchmark &b) {
  const auto start = Clock::now();
  const int d = 64;
  const size_t n = 100000;
  auto base = std::make_shared<const MentionIndex>(
      testutil::IndexOf(testutil::RandomUnitVectors(n, d, 1), d));
  QuantizerConfig qc;
  qc.num_leaves = 1000;
  qc.spill = 5;
  qc.seed = 3;
  const QuantizedIndex quantized = QuantizedIndex::Train(base, qc);
  SearchParams sp;
  sp.leaves_to_probe = 100;  // 10% of leaves
  sp.rescore_count = 500;
  sp.final_count = 10;

  const size_t nq = 1000;
  const std::vector<float> flat = testutil::RandomUnitVectors(nq, d, 2);
  std::vector<Embedding> queries;
  for (size_t i = 0; i < nq; ++i) queries.emplace_back(flat.begin() + i * d, flat.begin() + (i + 1) * d);

  std::vector<std::vector<Neighbor>> approx(nq), exact(nq);
  for (size_t i = 0; i < nq; ++i) {
    approx[i] = quantized.Search(queries[i], sp);
    exact[i] = base->Search(queries[i], 10, 1);
  }
  const double recall10 = RecallVsExact(approx, exact, 10);

  // Interleaved single-threaded rounds; the median ratio damps host noise.
  ExactSearcher exact_searcher(*base, 1);
  AnnSearcher ann(quantized, sp);
  std::vector<double> ratios;
  double exact_ms = 0.0, ann_ms = 0.0;
  size_t sink = 0;
  for (int round = 0; round < 7; ++round) {
    auto t0 = Clock::now();
    for (size_t i = 0; i < 200; ++i) sink += exact_searcher.Search(queries[i], 10).size();
    const double te = Seconds(t0);
    t0 = Clock::now();
    for (size_t i = 0; i < 200; ++i) sink += ann.Search(queries[i], 10).size();
    const double ta = Seconds(t0);
    ratios.push_back(te / ta);
    exact_ms += te * 1000.0 / 200 / 7;
    ann_ms += ta * 1000.0 / 200 / 7;
  }
  std::sort(ratios.begin(), ratios.end());
  const double speedup = ratios[ratios.size() / 2];

  // End task on the synthetic benchmark.
  const auto labeled = Queries(b, [&](size_t i) { return !IsZeroShot(b, i); });
  auto mention_index = std::make_shared<const MentionIndex>(BuildIndex(
      b.params, b.records, IndexContents::kMentionsAndDescriptions, b.options.featurizer));
  QuantizerConfig tc;
  tc.num_leaves = static_cast<int>(mention_index->size() / 100);
  tc.seed = 3;
  const QuantizedIndex task_quantized = QuantizedIndex::Train(mention_index, tc);
  SearchParams tp;
  tp.leaves_to_probe = std::max(1, tc.num_leaves / 10);
  tp.rescore_count = 500;
  const auto counts = mention_index->entity_positive_counts();
  const double exact_r1 =
      Report(Link(b, ExactSearcher(*mention_index), labeled), counts).micro.recall[0];
  const double ann_r1 =
      Report(Link(b, AnnSearcher(task_quantized, tp), labeled), counts).micro.recall[0];
  const double drop = 100.0 * (exact_r1 - ann_r1);
  const double elapsed = Seconds(start);

  Verdict("ANN fidelity and speed",
          recall10 >= 0.95 && drop <= 0.5 && speedup >= 5.0 && elapsed < 600.0 && sink > 0,
          fmt::format("recall@10 vs exact {:.4f} (need >= 0.95); end-task R@1 exact {:.4f} ann "
                      "{:.4f}, drop {:.2f} points (need <= 0.5); median speedup {:.2f}x "
                      "[{:.2f}..{:.2f}] ({:.3f} vs {:.3f} ms/query, need >= 5x); {:.0f}s "
                      "(need < 600s)",
                      recall10, exact_r1, ann_r1, drop, speedup, ratios.front(), ratios.back(),
                      exact_ms, ann_ms, elapsed));
}

void CheckExhaustiveEquivalence() {
  const int d = 16;
  auto base = std::make_shared<const MentionIndex>(
      testutil::IndexOf(testutil::SignVectors(2000, d, 21), d));
  QuantizerConfig qc;
  qc.num_leaves = 20;
  qc.seed = 4;
  const QuantizedIndex quantized = QuantizedIndex::Train(base, qc);
  SearchParams sp;
  sp.leaves_to_probe = quantized.num_leaves();
  sp.rescore_count = base->size();
  sp.final_count = 50;
  const size_t nq = 150;
  const std::vector<float> queries = testutil::SignVectors(nq, d, 22);
  size_t identical = 0;
  for (size_t i = 0; i < nq; ++i) {
    std::span<const float> q(queries.data() + i * d, d);
    identical += quantized.Search(q, sp) == base->Search(q, sp.final_count);
  }
  Verdict("exhaustive-degeneracy equivalence", identical == nq,
          fmt::format("{}/{} queries return identical top-{} lists (all leaves, full rescoring)",
                      identical, nq, sp.final_count));
}

// ---------------------------------------------------------------------------

void CheckVoting(const Benchmark &b) {
  const auto labeled = Queries(b, [&](size_t i) { return !IsZeroShot(b, i); });
  const MentionIndex index = BuildIndex(b.params, b.records,
                                        IndexContents::kMentionsAndDescriptions,
                                        b.options.featurizer);
  ExactSearcher searcher(index);
  LinkOptions top;
  LinkOptions k1;
  k1.mode = LinkMode::kAllMentions;
  k1.k = 1;
  LinkOptions k5 = k1;
  k5.k = 5;
  const auto top_linked = Link(b, searcher, labeled, top);
  const auto k1_linked = Link(b, searcher, labeled, k1);
  const auto k5_linked = Link(b, searcher, labeled, k5);
  size_t same = 0;
  for (size_t i = 0; i < labeled.size(); ++i) {
    same += !top_linked[i].prediction.entities.empty() &&
            top_linked[i].prediction.entities[0].entity_id ==
                k1_linked[i].prediction.entities[0].entity_id;
  }
  const auto counts = index.entity_positive_counts();
  const double acc1 = Report(k1_linked, counts).micro.recall[0];
  const double acc5 = Report(k5_linked, counts).micro.recall[0];
  Verdict("k-NN voting", acc5 >= acc1 && same == labeled.size(),
          fmt::format("top-1 accuracy k=5 {:.4f} vs k=1 {:.4f} (need k=5 >= k=1); k=1 vote "
                      "equals top_per_entity on {}/{} queries",
                      acc5, acc1, same, labeled.size()));
}

LinkedQuery Ranked(const std::string &gold, size_t rank, const std::string &language) {
  LinkedQuery q;
  q.query_id = "q";
  q.gold_entity = gold;
  q.language = language;
  for (size_t i = 1; i <= 120; ++i) {
    EntityScore e;
    e.entity_id = i == rank ? gold : "x" + std::to_string(i);
    e.language = language;
    q.prediction.entities.push_back(e);
  }
  return q;
}

void CheckMetrics() {
  std::vector<std::string> wrong;
  auto expect = [&](bool ok, const std::string &what) {
    if (!ok) wrong.push_back(what);
  };
  // Gold ranks 1, 2, 11 and absent.
  const std::vector<LinkedQuery> four = {Ranked("A", 1, "en"), Ranked("B", 2, "en"),
                                         Ranked("C", 11, "en"), Ranked("D", 0, "en")};
  expect(RecallAt(four, 1).recall == 0.25, "R@1");
  expect(RecallAt(four, 10).recall == 0.5, "R@10");
  expect(RecallAt(four, 100).recall == 0.75, "R@100");
  const EvalReport fr = Report(four, {{"A", 12000}, {"B", 50}, {"C", 3}});
  expect(fr.micro.recall == std::vector<double>{0.25, 0.5, 0.75}, "micro");
  expect(fr.macro_bucket == std::vector<double>{0.25, 0.5, 0.75}, "macro over buckets");
  expect(fr.cross_language_fraction == 0.0, "cross-language");
  expect(BucketOf(int64_t{5}) == 1 && BucketOf(int64_t{0}) == 0 && BucketOf(int64_t{10000}) == 5,
         "bucket edges");
  const EvalReport even =
      Report({Ranked("A", 1, "en"), Ranked("B", 0, "de")}, {});
  expect(even.micro.recall[0] == 0.5 && even.macro_language[0] == 0.5, "equal-count macro");
  std::vector<LinkedQuery> skew(9, Ranked("A", 1, "en"));
  skew.push_back(Ranked("B", 0, "de"));
  const EvalReport sr = Report(skew, {});
  expect(std::abs(sr.micro.recall[0] - 0.9) < 1e-15 && sr.macro_language[0] == 0.5,
         "9:1 micro/macro");

  size_t slices = 0;
  bool monotone = true;
  for (const EvalReport &r : all_reports) {
    std::vector<const SliceRecall *> all = {&r.micro};
    for (const auto &s : r.per_language) all.push_back(&s);
    for (const auto &s : r.per_bucket) all.push_back(&s);
    for (const SliceRecall *s : all) {
      ++slices;
      for (size_t c = 1; c < s->recall.size(); ++c) monotone &= s->recall[c - 1] <= s->recall[c];
    }
  }
  std::string detail = fmt::format(
      "4-query fixture R@1/10/100 = {}/{}/{} (hand: 0.25/0.5/0.75), buckets, micro/macro {}; "
      "recall monotone over {} slices of {} reports",
      RecallAt(four, 1).recall, RecallAt(four, 10).recall, RecallAt(four, 100).recall,
      wrong.empty() ? "match" : "mismatch", slices, all_reports.size());
  for (const auto &w : wrong) detail += "; wrong: " + w;
  Verdict("metric correctness", wrong.empty() && monotone, detail);
}

// ---------------------------------------------------------------------------

int RunCli(const std::filesystem::path &work, const std::string &args) {
  const std::string cmd = std::string(MLINK_CLI_PATH) + " -q --work-dir " + work.string() + " " +
                          args + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void CheckDeterminism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("mlink_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string settings =
      " --seed 17 --set synth.entities=80 --set synth.zero_shot_entities=5"
      " --set train.steps=80 --set train.batch_size=64 --set corpus.pair_cap=20"
      " --set index.ann=true --set index.num_leaves=20 --set index.leaves_to_probe=4";
  bool ran = true;
  for (const char *run : {"a", "b"}) {
    const std::string threads = std::string(run) == "a" ? " --threads 1" : " --threads 4";
    for (const char *step : {"synth", "pairs", "train", "mine", "train --mined", "build-index",
                             "link", "evaluate"}) {
      ran &= RunCli(root / run, std::string(step) + settings + threads) == 0;
    }
  }
  std::vector<std::string> differing;
  const char *files[] = {"model.mlmn", "index.midx", "index.mqdx", "mined.jsonl",
                         "predictions.jsonl", "report.tsv"};
  for (const char *name : files) {
    if (!ran || ReadFile(root / "a" / name) != ReadFile(root / "b" / name)) {
      differing.push_back(name);
    }
  }
  fs::remove_all(root);
  Verdict("determinism", ran && differing.empty(),
          ran ? fmt::format("two full CLI runs (1 vs 4 threads): {} of {} artifacts "
                            "byte-identical{}",
                            std::size(files) - differing.size(), std::size(files),
                            differing.empty() ? "" : " (differ: " + fmt::format("{}", fmt::join(differing, ", ")) + ")")
              : "pipeline command failed");
}

}  // namespace
}  // namespace mlink

int main() {
  using namespace mlink;
  spdlog::set_level(spdlog::level::warn);
  CheckGradients();
  CheckExhaustiveEquivalence();
  const Benchmark benchmark = TrainBenchmark();
  CheckClusterGap(benchmark);
  CheckZeroShot(benchmark);
  CheckNegativeCap(benchmark);
  CheckAnnFidelity(benchmark);
  CheckVoting(benchmark);
  CheckMetrics();
  CheckDeterminism();
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
