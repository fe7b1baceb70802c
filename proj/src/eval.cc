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

#include <algorithm>
#include <map>

#include <spdlog/fmt/fmt.h>

#include "mlink/errors.h"

namespace mlink {
namespace {

constexpr const char *kBucketNames[kNumBuckets] = {"[0,1)",     "[1,10)",    "[10,100)",
                                                   "[100,1k)", "[1k,10k)", "[10k,+)"};

void Tally(SliceRecall &slice, size_t rank, const std::vector<size_t> &cuts) {
  ++slice.count;
  for (size_t c = 0; c < cuts.size(); ++c) {
    if (rank != 0 && rank <= cuts[c]) ++slice.correct[c];
  }
}

SliceRecall EmptySlice(std::string name, size_t cuts) {
  SliceRecall s;
  s.name = std::move(name);
  s.correct.assign(cuts, 0);
  s.recall.assign(cuts, 0.0);
  return s;
}

void Finish(SliceRecall &slice) {
  for (size_t c = 0; c < slice.correct.size(); ++c) {
    slice.recall[c] = slice.count == 0 ? 0.0
                                       : static_cast<double>(slice.correct[c]) /
                                             static_cast<double>(slice.count);
  }
}

std::vector<double> MacroOf(const std::vector<SliceRecall> &slices, size_t cuts) {
  std::vector<double> out(cuts, 0.0);
  size_t used = 0;
  for (const SliceRecall &s : slices) {
    if (s.count == 0) continue;
    ++used;
    for (size_t c = 0; c < cuts; ++c) out[c] += s.recall[c];
  }
  if (used > 0) {
    for (double &v : out) v /= static_cast<double>(used);
  }
  return out;
}

}  // namespace

int BucketOf(int64_t count) {
  if (count < 1) return 0;
  int bucket = 1;
  for (int64_t edge = 10; bucket < kNumBuckets - 1 && count >= edge; edge *= 10) ++bucket;
  return bucket;
}

int BucketOf(const std::string &entity_id, const std::map<std::string, int64_t> &counts) {
  auto it = counts.find(entity_id);
  return BucketOf(it == counts.end() ? 0 : it->second);
}

const char *BucketName(int bucket) {
  Require(bucket >= 0 && bucket < kNumBuckets, "bucket out of range");
  return kBucketNames[bucket];
}

size_t GoldRank(const LinkedQuery &query) {
  const auto &entities = query.prediction.entities;
  for (size_t i = 0; i < entities.size(); ++i) {
    if (entities[i].entity_id == query.gold_entity) return i + 1;
  }
  return 0;
}

RecallResult RecallAt(const std::vector<LinkedQuery> &queries, size_t cut) {
  RecallResult r;
  for (const LinkedQuery &q : queries) {
    if (q.gold_entity.empty()) {
      ++r.excluded;
      continue;
    }
    ++r.total;
    const size_t rank = q.error.empty() ? GoldRank(q) : 0;
    if (rank != 0 && rank <= cut) ++r.correct;
  }
  if (r.total > 0) r.recall = static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

EvalReport BuildReport(const std::vector<LinkedQuery> &queries,
                       const std::map<std::string, int64_t> &counts, std::vector<size_t> cuts) {
  Require(!cuts.empty(), "report needs at least one cut");
  for (size_t c = 0; c < cuts.size(); ++c) {
    Require(cuts[c] >= 1 && (c == 0 || cuts[c] > cuts[c - 1]),
            "cuts must be positive and increasing");
  }
  EvalReport report;
  report.cuts = std::move(cuts);
  const size_t nc = report.cuts.size();
  report.micro = EmptySlice("micro", nc);
  std::map<std::string, SliceRecall> languages;
  for (int b = 0; b < kNumBuckets; ++b) report.per_bucket.push_back(EmptySlice(kBucketNames[b], nc));

  for (const LinkedQuery &q : queries) {
    if (q.gold_entity.empty()) {
      ++report.excluded;
      continue;
    }
    const size_t rank = q.error.empty() ? GoldRank(q) : 0;
    Tally(report.micro, rank, report.cuts);
    auto [it, inserted] = languages.try_emplace(q.language);
    if (inserted) it->second = EmptySlice(q.language, nc);
    Tally(it->second, rank, report.cuts);
    Tally(report.per_bucket[BucketOf(q.gold_entity, counts)], rank, report.cuts);
    if (q.error.empty() && !q.prediction.entities.empty()) {
      ++report.predicted_count;
      if (q.prediction.entities.front().language != q.language) ++report.cross_language_count;
    }
  }
  Finish(report.micro);
  for (auto &[lang, slice] : languages) {
    Finish(slice);
    report.per_language.push_back(std::move(slice));
  }
  for (SliceRecall &s : report.per_bucket) Finish(s);
  report.macro_language = MacroOf(report.per_language, nc);
  report.macro_bucket = MacroOf(report.per_bucket, nc);
  if (report.predicted_count > 0) {
    report.cross_language_fraction = static_cast<double>(report.cross_language_count) /
                                     static_cast<double>(report.predicted_count);
  }
  return report;
}

std::string ReportTsv(const EvalReport &report) {
  std::string out = "slice\tcut\trecall\tn\n";
  auto row = [&](std::string_view name, size_t cut, double value, size_t n) {
    out += fmt::format("{}\t{}\t{:.6f}\t{}\n", name, cut, value, n);
  };
  auto slice_rows = [&](std::string_view prefix, const SliceRecall &s) {
    for (size_t c = 0; c < report.cuts.size(); ++c) {
      row(fmt::format("{}{}", prefix, s.name), report.cuts[c], s.recall[c], s.count);
    }
  };
  slice_rows("", report.micro);
  size_t languages = 0, buckets = 0;
  for (const auto &s : report.per_language) languages += s.count > 0;
  for (const auto &s : report.per_bucket) buckets += s.count > 0;
  for (size_t c = 0; c < report.cuts.size(); ++c) {
    row("macro_language", report.cuts[c], report.macro_language[c], languages);
  }
  for (size_t c = 0; c < report.cuts.size(); ++c) {
    row("macro_bucket", report.cuts[c], report.macro_bucket[c], buckets);
  }
  for (const auto &s : report.per_language) slice_rows("language:", s);
  for (const auto &s : report.per_bucket) slice_rows("bucket:", s);
  row("cross_language", 1, report.cross_language_fraction, report.predicted_count);
  return out;
}

std::string ReportTable(const EvalReport &report) {
  std::string header = fmt::format("{:<22}{:>8}", "slice", "n");
  for (size_t cut : report.cuts) header += fmt::format("{:>9}", fmt::format("R@{}", cut));
  std::string out = header + "\n" + std::string(header.size(), '-') + "\n";
  auto line = [&](std::string_view name, size_t n, const std::vector<double> &values) {
    out += fmt::format("{:<22}{:>8}", name, n);
    for (double v : values) out += fmt::format("{:>9.4f}", v);
    out += "\n";
  };
  size_t buckets = 0;
  for (const auto &s : report.per_bucket) buckets += s.count > 0;
  line("micro", report.micro.count, report.micro.recall);
  line("macro (languages)", report.per_language.size(), report.macro_language);
  line("macro (buckets)", buckets, report.macro_bucket);
  for (const auto &s : report.per_language) line("lang " + s.name, s.count, s.recall);
  for (const auto &s : report.per_bucket) {
    if (s.count > 0) line("freq " + s.name, s.count, s.recall);
  }
  out += fmt::format("cross-language top-1: {:.4f} ({} of {})\n", report.cross_language_fraction,
                     report.cross_language_count, report.predicted_count);
  if (report.excluded > 0) out += fmt::format("excluded (no gold label): {}\n", report.excluded);
  return out;
}

std::string RecallCurveCsv(const std::vector<LinkedQuery> &queries, size_t max_k) {
  Require(max_k >= 1, "max_k must be at least 1");
  // hits[slice][k - 1] counts gold ranks equal to k; prefix sums give recall.
  std::map<std::string, std::pair<size_t, std::vector<size_t>>> by_language;
  std::pair<size_t, std::vector<size_t>> micro{0, std::vector<size_t>(max_k, 0)};
  for (const LinkedQuery &q : queries) {
    if (q.gold_entity.empty()) continue;
    auto &lang = by_language.try_emplace(q.language, 0, std::vector<size_t>(max_k, 0))
                     .first->second;
    const size_t rank = q.error.empty() ? GoldRank(q) : 0;
    for (auto *slice : {&micro, &lang}) {
      ++slice->first;
      if (rank != 0 && rank <= max_k) ++slice->second[rank - 1];
    }
  }
  std::string out = "k,micro";
  for (const auto &[lang, unused] : by_language) out += ",language:" + lang;
  out += "\n";
  std::vector<size_t> running(by_language.size() + 1, 0);
  for (size_t k = 1; k <= max_k; ++k) {
    out += std::to_string(k);
    size_t i = 0;
    auto emit = [&](const std::pair<size_t, std::vector<size_t>> &slice) {
      running[i] += slice.second[k - 1];
      const double r = slice.first == 0 ? 0.0
                                        : static_cast<double>(running[i]) /
                                              static_cast<double>(slice.first);
      out += fmt::format(",{:.6f}", r);
      ++i;
    };
    emit(micro);
    for (const auto &[lang, slice] : by_language) emit(slice);
    out += "\n";
  }
  return out;
}

}  // namespace mlink
