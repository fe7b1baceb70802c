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


// mlink: train, index, link and evaluate an instance-based entity linker.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mlink/ann_index.h"
#include "mlink/binary_io.h"
#include "mlink/config.h"
#include "mlink/corpus.h"
#include "mlink/encoder.h"
#include "mlink/errors.h"
#include "mlink/eval.h"
#include "mlink/exact_index.h"
#include "mlink/inference.h"
#include "mlink/mining.h"
#include "mlink/parallel.h"
#include "mlink/pipeline.h"
#include "mlink/synthetic.h"

namespace mlink {
namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNotFound = 3;
constexpr int kExitVersion = 4;

struct GlobalFlags {
  std::string config_path;
  std::vector<std::string> settings;
  std::optional<int> threads;
  std::optional<uint64_t> seed;
  std::string work_dir;
  bool verbose = false;
  bool quiet = false;
};

struct Flags {
  std::string input;
  std::string index_mode;
  std::string predictions;
  std::string report;
  std::string queries;
  bool mined = false;
  int round = 0;
  size_t profile_queries = 1000;
  int repetitions = 3;
  std::vector<int> probes;
};

PipelineConfig ResolveConfig(const GlobalFlags &g) {
  PipelineConfig config = g.config_path.empty() ? PipelineConfig{} : LoadConfig(g.config_path);
  for (const std::string &s : g.settings) {
    const size_t eq = s.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorKind::kInvalidArgument, "--set expects key=value, got \"" + s + "\"");
    }
    ApplySetting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  if (g.threads) config.threads = *g.threads;
  if (g.seed) config.seed = *g.seed;
  if (!g.work_dir.empty()) config.paths.work_dir = g.work_dir;
  config.Validate();
  return config;
}

std::vector<MentionRecord> LoadCorpus(const std::filesystem::path &path) {
  return ParseCorpusJsonl(ReadFile(path), path.string());
}

void WriteCorpus(const std::vector<MentionRecord> &records, const std::filesystem::path &path) {
  WriteFileAtomic(path, SerializeCorpusJsonl(records));
  spdlog::info("wrote {} records to {}", records.size(), path.string());
}

std::vector<MentionRecord> Organic(const std::vector<MentionRecord> &records) {
  std::vector<MentionRecord> out;
  for (const MentionRecord &r : records) {
    if (!r.is_description()) out.push_back(r);
  }
  return out;
}

std::map<std::string, int64_t> TrainingCounts(const std::vector<MentionRecord> &records) {
  std::map<std::string, int64_t> counts;
  for (const MentionRecord &r : records) {
    if (!r.is_description()) ++counts[r.entity_id];
  }
  return counts;
}

QuantizerConfig SeededQuantizer(const PipelineConfig &c) {
  QuantizerConfig q = c.index.quantizer;
  q.seed = StageSeed(c.seed, Stage::kQuantizer);
  return q;
}

// Exact or quantized searcher over one index, owning both.
struct LoadedSearcher {
  std::shared_ptr<const MentionIndex> index;
  std::unique_ptr<QuantizedIndex> quantized;
  std::unique_ptr<Searcher> searcher;
};

LoadedSearcher MakeSearcher(const PipelineConfig &c, MentionIndex index, bool load_quantized) {
  LoadedSearcher s;
  s.index = std::make_shared<const MentionIndex>(std::move(index));
  if (c.index.ann) {
    const auto path = c.paths.Resolve(c.paths.quantized_index);
    s.quantized = std::make_unique<QuantizedIndex>(
        load_quantized ? LoadQuantizedIndex(path, s.index)
                       : QuantizedIndex::Train(s.index, SeededQuantizer(c)));
    s.searcher = std::make_unique<AnnSearcher>(*s.quantized, c.index.search);
  } else {
    s.searcher = std::make_unique<ExactSearcher>(*s.index, 1);
  }
  return s;
}

int RunIngest(const PipelineConfig &c, const Flags &f) {
  const auto input = f.input.empty() ? c.paths.Resolve(c.paths.raw_corpus)
                                     : std::filesystem::path(f.input);
  const std::vector<MentionRecord> records = IngestCorpus(input);
  const CorpusSplit split =
      SplitPages(records, c.test_page_fraction, StageSeed(c.seed, Stage::kSplit));
  WriteCorpus(split.train, c.paths.Resolve(c.paths.train_corpus));
  WriteCorpus(split.test, c.paths.Resolve(c.paths.test_corpus));
  return 0;
}

int RunSynth(const PipelineConfig &c, const Flags &) {
  SyntheticConfig sc = c.synth;
  sc.seed = StageSeed(c.seed, Stage::kSynthetic);
  SyntheticCorpus corpus = MakeSyntheticCorpus(sc);
  std::vector<MentionRecord> train = std::move(corpus.train);
  train.insert(train.end(), corpus.descriptions.begin(), corpus.descriptions.end());
  WriteCorpus(train, c.paths.Resolve(c.paths.train_corpus));
  WriteCorpus(corpus.queries, c.paths.Resolve(c.paths.test_corpus));
  return 0;
}

int RunPairs(const PipelineConfig &c, const Flags &) {
  const auto records = LoadCorpus(c.paths.Resolve(c.paths.train_corpus));
  const auto pairs = BuildTrainingPairs(records, c.pair_cap, c.seed);
  WriteFileAtomic(c.paths.Resolve(c.paths.pairs), SerializePairsTsv(pairs));
  spdlog::info("wrote {} pairs", pairs.size());
  return 0;
}

std::vector<MentionPair> LoadPairs(const PipelineConfig &c) {
  const auto path = c.paths.Resolve(c.paths.pairs);
  return ParsePairsTsv(ReadFile(path), path.string());
}

int RunTrain(const PipelineConfig &c, const Flags &f) {
  const auto records = LoadCorpus(c.paths.Resolve(c.paths.train_corpus));
  const auto checkpoint = c.paths.Resolve(c.paths.checkpoint);
  TrainConfig train = c.train;
  TrainingSet data;
  EncoderParams params;
  if (f.mined) {
    // Retraining continues from the current checkpoint.
    params = LoadCheckpoint(checkpoint);
    data = MakeTrainingSet(records, LoadMined(c.paths.Resolve(c.paths.mined)), c.featurizer);
    train.seed = StageSeed(c.seed, Stage::kRetrain, static_cast<uint64_t>(f.round));
  } else {
    params = InitializeParams(c.encoder, StageSeed(c.seed, Stage::kInit));
    data = MakeTrainingSet(records, ExamplesFromPairs(LoadPairs(c)), c.featurizer);
    train.seed = StageSeed(c.seed, Stage::kTrain);
  }
  spdlog::info("training on {} examples over {} mentions", data.examples.size(),
               data.mentions.size());
  TrainResult result = Train(std::move(params), data, train);
  if (!result.loss_curve.empty()) {
    spdlog::info("loss {:.5f} -> {:.5f}", result.loss_curve.front(), result.loss_curve.back());
  }
  SaveCheckpoint(result.params, checkpoint);
  spdlog::info("wrote {}", checkpoint.string());
  return 0;
}

int RunMine(const PipelineConfig &c, const Flags &) {
  const auto records = LoadCorpus(c.paths.Resolve(c.paths.train_corpus));
  const EncoderParams params = LoadCheckpoint(c.paths.Resolve(c.paths.checkpoint));
  const MiningRound round = MineRound(params, records, LoadPairs(c), c.featurizer, c.mining);
  SaveMined(round.examples, c.paths.Resolve(c.paths.mined));
  spdlog::info("wrote {} mined examples", round.examples.size());
  return 0;
}

IndexContents ContentsFor(const PipelineConfig &c, const Flags &f) {
  return f.index_mode.empty() ? c.index.contents : ParseIndexContents(f.index_mode);
}

int RunBuildIndex(const PipelineConfig &c, const Flags &f) {
  const auto records = LoadCorpus(c.paths.Resolve(c.paths.train_corpus));
  const EncoderParams params = LoadCheckpoint(c.paths.Resolve(c.paths.checkpoint));
  auto index = std::make_shared<const MentionIndex>(
      BuildIndex(params, records, ContentsFor(c, f), c.featurizer));
  SaveIndex(*index, c.paths.Resolve(c.paths.index));
  spdlog::info("indexed {} rows", index->size());
  if (c.index.ann) {
    const QuantizedIndex q = QuantizedIndex::Train(index, SeededQuantizer(c));
    SaveQuantizedIndex(q, c.paths.Resolve(c.paths.quantized_index));
    spdlog::info("quantized into {} leaves", q.num_leaves());
  }
  return 0;
}

std::vector<LinkedQuery> LinkQueries(const PipelineConfig &c, const Flags &f,
                                     const EncoderParams &params, const Searcher &searcher) {
  const auto queries_path = f.queries.empty() ? c.paths.Resolve(c.paths.test_corpus)
                                              : std::filesystem::path(f.queries);
  std::vector<MentionRecord> queries = Organic(LoadCorpus(queries_path));
  auto linked = LinkRecords(params, searcher, queries, c.featurizer, c.link);
  size_t failed = 0;
  for (const auto &q : linked) failed += !q.error.empty();
  if (failed > 0) spdlog::warn("{} of {} queries failed", failed, linked.size());
  return linked;
}

int RunLink(const PipelineConfig &c, const Flags &f) {
  const EncoderParams params = LoadCheckpoint(c.paths.Resolve(c.paths.checkpoint));
  LoadedSearcher s = MakeSearcher(c, LoadIndex(c.paths.Resolve(c.paths.index)), true);
  const auto linked = LinkQueries(c, f, params, *s.searcher);
  SavePredictions(linked, c.paths.Resolve(c.paths.predictions));
  spdlog::info("linked {} queries", linked.size());
  return 0;
}

int RunEvaluate(const PipelineConfig &c, const Flags &f) {
  std::vector<LinkedQuery> linked;
  std::map<std::string, int64_t> counts;
  if (!f.predictions.empty()) {
    linked = LoadPredictions(f.predictions);
    counts = TrainingCounts(LoadCorpus(c.paths.Resolve(c.paths.train_corpus)));
  } else {
    const EncoderParams params = LoadCheckpoint(c.paths.Resolve(c.paths.checkpoint));
    MentionIndex index;
    bool from_disk = false;
    if (f.index_mode.empty()) {
      index = LoadIndex(c.paths.Resolve(c.paths.index));
      from_disk = true;
    } else {
      const auto records = LoadCorpus(c.paths.Resolve(c.paths.train_corpus));
      index = BuildIndex(params, records, ParseIndexContents(f.index_mode), c.featurizer);
    }
    counts = index.entity_positive_counts();
    LoadedSearcher s = MakeSearcher(c, std::move(index), from_disk);
    linked = LinkQueries(c, f, params, *s.searcher);
  }
  const EvalReport report = BuildReport(linked, counts, c.cuts);
  const auto report_path = f.report.empty() ? c.paths.Resolve(c.paths.report)
                                            : std::filesystem::path(f.report);
  WriteFileAtomic(report_path, ReportTsv(report));
  WriteFileAtomic(c.paths.Resolve(c.paths.curve), RecallCurveCsv(linked, c.curve_max_k));
  std::cout << ReportTable(report);
  return 0;
}

int RunProfile(const PipelineConfig &c, const Flags &f) {
  const EncoderParams params = LoadCheckpoint(c.paths.Resolve(c.paths.checkpoint));
  auto index = std::make_shared<const MentionIndex>(LoadIndex(c.paths.Resolve(c.paths.index)));
  std::vector<MentionRecord> records = Organic(LoadCorpus(c.paths.Resolve(c.paths.test_corpus)));
  if (records.size() > f.profile_queries) records.resize(f.profile_queries);
  std::vector<FeaturizedMention> inputs;
  for (const auto &r : records) inputs.push_back(Featurize(r, c.featurizer));
  const std::vector<Embedding> queries = EncodeAll(params, inputs);

  const auto qpath = c.paths.Resolve(c.paths.quantized_index);
  const QuantizedIndex quantized = std::filesystem::exists(qpath)
                                       ? LoadQuantizedIndex(qpath, index)
                                       : QuantizedIndex::Train(index, SeededQuantizer(c));
  std::string tsv = ProfileTsvHeader();
  ExactSearcher exact(*index, 1);
  tsv += ProfileTsvRow(Profile(exact, queries, f.repetitions, "exact"));
  std::vector<int> probes = f.probes;
  if (probes.empty()) probes.push_back(c.index.search.leaves_to_probe);
  for (int p : probes) {
    SearchParams sp = c.index.search;
    sp.leaves_to_probe = p;
    AnnSearcher ann(quantized, sp);
    tsv += ProfileTsvRow(Profile(ann, queries, f.repetitions,
                                 fmt::format("ann probe={} rescore={}", p, sp.rescore_count)));
  }
  WriteFileAtomic(c.paths.Resolve(c.paths.profile), tsv);
  std::cout << tsv;
  return 0;
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNotFound:
      return kExitNotFound;
    case ErrorKind::kVersionMismatch:
      return kExitVersion;
    default:
      return 1;
  }
}

int Main(int argc, char **argv) {
  CLI::App app{"Instance-based entity linking: train a mention encoder, index labeled "
               "mentions, link and evaluate."};
  app.require_subcommand(1);
  // Global flags may follow the subcommand.
  app.fallthrough();
  GlobalFlags g;
  Flags f;
  app.add_option("-c,--config", g.config_path, "Config file (key = value with [sections])")
      ->check(CLI::ExistingFile);
  app.add_option("--set", g.settings, "Override one config key, e.g. --set train.steps=100");
  app.add_option("--threads", g.threads, "Worker thread cap (0 = all cores)");
  app.add_option("--seed", g.seed, "Seed for every randomized stage");
  app.add_option("--work-dir", g.work_dir, "Directory for relative artifact paths");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");
  app.add_flag("-q,--quiet", g.quiet, "Warnings and errors only");

  struct Command {
    const char *name;
    const char *help;
    int (*run)(const PipelineConfig &, const Flags &);
    CLI::App *app = nullptr;
  };
  std::vector<Command> commands = {
      {"ingest", "Validate a raw corpus and split it into train and test by page", RunIngest},
      {"synth", "Write a synthetic multi-cluster corpus as train and test files", RunSynth},
      {"pairs", "Build mention and description training pairs", RunPairs},
      {"train", "Train the encoder on pairs, or retrain on mined examples", RunTrain},
      {"mine", "Resample positives and mine hard negatives with the current model",
       RunMine},
      {"build-index", "Encode the training corpus into a mention index", RunBuildIndex},
      {"link", "Link test queries against the index", RunLink},
      {"evaluate", "Link test queries and write a recall report", RunEvaluate},
      {"profile", "Measure exact and quantized search speed and recall", RunProfile},
  };
  for (Command &cmd : commands) cmd.app = app.add_subcommand(cmd.name, cmd.help);
  auto sub = [&](const char *name) {
    for (Command &cmd : commands) {
      if (std::string_view(cmd.name) == name) return cmd.app;
    }
    return static_cast<CLI::App *>(nullptr);
  };
  sub("ingest")->add_option("--input", f.input, "Raw corpus JSONL (default paths.raw_corpus)");
  sub("train")->add_flag("--mined", f.mined,
                         "Continue from the checkpoint on mined examples");
  sub("train")->add_option("--round", f.round, "Mining round number, for seeding");
  for (const char *name : {"build-index", "evaluate"}) {
    sub(name)->add_option("--index-mode", f.index_mode,
                          "mentions, both or descriptions-only (default index.contents)");
  }
  for (const char *name : {"link", "evaluate"}) {
    sub(name)->add_option("--queries", f.queries, "Query corpus (default paths.test_corpus)");
  }
  sub("evaluate")->add_option("--predictions", f.predictions,
                              "Evaluate this predictions file instead of linking");
  sub("evaluate")->add_option("--report", f.report, "Report path (default paths.report)");
  sub("profile")->add_option("--queries", f.profile_queries, "Number of test queries to time");
  sub("profile")->add_option("--repetitions", f.repetitions, "Timed passes over the queries");
  sub("profile")->add_option("--probes", f.probes, "Leaves to probe, one row each")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  auto logger = spdlog::stderr_color_mt("mlink");
  spdlog::set_default_logger(logger);
  spdlog::set_level(g.verbose ? spdlog::level::debug
                    : g.quiet ? spdlog::level::warn
                              : spdlog::level::info);
  try {
    const PipelineConfig config = ResolveConfig(g);
    if (config.threads > 0) SetThreadCount(config.threads);
    std::filesystem::create_directories(config.paths.work_dir);
    for (const Command &cmd : commands) {
      if (cmd.app->parsed()) return cmd.run(config, f);
    }
    return kExitUsage;
  } catch (const Error &e) {
    spdlog::error("{}", e.what());
    return ExitCodeFor(e.kind());
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

}  // namespace
}  // namespace mlink

int main(int argc, char **argv) { return mlink::Main(argc, argv); }
