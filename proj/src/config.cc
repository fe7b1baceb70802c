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


#include "mlink/config.h"

#include <charconv>
#include <functional>
#include <type_traits>

#include <spdlog/fmt/fmt.h>

#include "mlink/binary_io.h"
#include "mlink/errors.h"

namespace mlink {
namespace {

std::string_view Trim(std::string_view s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string Unquote(std::string_view v) {
  v = Trim(v);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return std::string(v.substr(1, v.size() - 2));
  }
  return std::string(v);
}

std::vector<std::string> SplitList(std::string_view v) {
  v = Trim(v);
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<std::string> out;
  while (!Trim(v).empty()) {
    const size_t comma = v.find(',');
    out.push_back(Unquote(v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v = v.substr(comma + 1);
  }
  return out;
}

template <typename T>
T ParseValue(std::string_view key, std::string_view raw) {
  const std::string text = Unquote(raw);
  auto bad = [&]() -> T {
    Fail(ErrorKind::kInvalidArgument,
         "bad value \"" + text + "\" for " + std::string(key));
  };
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    return bad();
  } else if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else if constexpr (std::is_floating_point_v<T>) {
    // from_chars for double is unavailable on older toolchains.
    try {
      size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) return bad();
      return static_cast<T>(v);
    } catch (const std::exception &) {
      return bad();
    }
  } else {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) return bad();
    return v;
  }
}

template <typename T>
std::string FormatValue(const T &v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::string>) {
    return "\"" + v + "\"";
  } else {
    return fmt::format("{}", v);
  }
}

struct Field {
  std::string key;
  std::function<void(PipelineConfig &, std::string_view)> set;
  std::function<std::string(const PipelineConfig &)> get;
};

template <typename T, typename Access>
Field Bind(std::string key, Access access) {
  Field f;
  f.key = key;
  f.set = [key, access](PipelineConfig &c, std::string_view v) {
    access(c) = ParseValue<T>(key, v);
  };
  f.get = [access](const PipelineConfig &c) {
    return FormatValue(access(const_cast<PipelineConfig &>(c)));
  };
  return f;
}

#define MLINK_FIELD(key, member) \
  Bind<std::remove_reference_t<decltype(std::declval<PipelineConfig &>().member)>>( \
      key, [](PipelineConfig &c) -> auto & { return c.member; })

const std::vector<Field> &Fields() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f = {
        MLINK_FIELD("seed", seed),
        MLINK_FIELD("threads", threads),
        MLINK_FIELD("paths.work_dir", paths.work_dir),
        MLINK_FIELD("paths.raw_corpus", paths.raw_corpus),
        MLINK_FIELD("paths.train_corpus", paths.train_corpus),
        MLINK_FIELD("paths.test_corpus", paths.test_corpus),
        MLINK_FIELD("paths.pairs", paths.pairs),
        MLINK_FIELD("paths.mined", paths.mined),
        MLINK_FIELD("paths.checkpoint", paths.checkpoint),
        MLINK_FIELD("paths.index", paths.index),
        MLINK_FIELD("paths.quantized_index", paths.quantized_index),
        MLINK_FIELD("paths.predictions", paths.predictions),
        MLINK_FIELD("paths.report", paths.report),
        MLINK_FIELD("paths.curve", paths.curve),
        MLINK_FIELD("paths.profile", paths.profile),
        MLINK_FIELD("corpus.test_page_fraction", test_page_fraction),
        MLINK_FIELD("corpus.pair_cap", pair_cap),
        MLINK_FIELD("featurizer.max_context", featurizer.max_context),
        MLINK_FIELD("featurizer.max_title_budget", featurizer.max_title_budget),
        MLINK_FIELD("encoder.embedding_dim", encoder.embedding_dim),
        MLINK_FIELD("encoder.hidden_dim", encoder.hidden_dim),
        MLINK_FIELD("encoder.output_dim", encoder.output_dim),
        MLINK_FIELD("encoder.initial_temperature", encoder.initial_temperature),
        MLINK_FIELD("train.batch_size", train.batch_size),
        MLINK_FIELD("train.steps", train.steps),
        MLINK_FIELD("train.learning_rate", train.learning_rate),
        MLINK_FIELD("train.warmup_fraction", train.warmup_fraction),
        MLINK_FIELD("train.weight_decay", train.adam.weight_decay),
        MLINK_FIELD("train.hard_negative_weight", train.hard_negative_weight),
        MLINK_FIELD("train.min_temperature", train.min_temperature),
        MLINK_FIELD("train.max_temperature", train.max_temperature),
        MLINK_FIELD("train.log_every", train.log_every),
        MLINK_FIELD("mining.negatives_per_query", mining.negatives_per_query),
        MLINK_FIELD("mining.cap_ratio", mining.cap_ratio),
        MLINK_FIELD("index.ann", index.ann),
        MLINK_FIELD("index.num_leaves", index.quantizer.num_leaves),
        MLINK_FIELD("index.block_dim", index.quantizer.block_dim),
        MLINK_FIELD("index.kmeans_iterations", index.quantizer.kmeans_iterations),
        MLINK_FIELD("index.num_top_clusters", index.quantizer.num_top_clusters),
        MLINK_FIELD("index.anisotropic_weight", index.quantizer.anisotropic_weight),
        MLINK_FIELD("index.spill", index.quantizer.spill),
        MLINK_FIELD("index.leaves_to_probe", index.search.leaves_to_probe),
        MLINK_FIELD("index.rescore_count", index.search.rescore_count),
        MLINK_FIELD("index.top_clusters_to_probe", index.search.top_clusters_to_probe),
        MLINK_FIELD("inference.k", link.k),
        MLINK_FIELD("inference.top_n", link.top_n),
        MLINK_FIELD("inference.weighted_vote", link.weighted_vote),
        MLINK_FIELD("eval.curve_max_k", curve_max_k),
        MLINK_FIELD("synth.entities", synth.entities),
        MLINK_FIELD("synth.clusters_per_entity", synth.clusters_per_entity),
        MLINK_FIELD("synth.mentions_per_cluster", synth.mentions_per_cluster),
        MLINK_FIELD("synth.queries_per_cluster", synth.queries_per_cluster),
        MLINK_FIELD("synth.zero_shot_entities", synth.zero_shot_entities),
        MLINK_FIELD("synth.tokens_per_cluster", synth.tokens_per_cluster),
        MLINK_FIELD("synth.context_length", synth.context_length),
        MLINK_FIELD("synth.vocab", synth.vocab),
        MLINK_FIELD("synth.noise", synth.noise),
    };
    // Fields whose text form is not a plain scalar.
    Field vocab;
    vocab.key = "encoder.vocab_size";
    vocab.set = [](PipelineConfig &c, std::string_view v) {
      c.encoder.vocab_size = ParseValue<int32_t>("encoder.vocab_size", v);
      c.featurizer.vocab_size = c.encoder.vocab_size;
    };
    vocab.get = [](const PipelineConfig &c) { return FormatValue(c.encoder.vocab_size); };
    f.push_back(vocab);

    Field contents;
    contents.key = "index.contents";
    contents.set = [](PipelineConfig &c, std::string_view v) {
      c.index.contents = ParseIndexContents(Unquote(v));
    };
    contents.get = [](const PipelineConfig &c) {
      return FormatValue(std::string(IndexContentsName(c.index.contents)));
    };
    f.push_back(contents);

    Field mode;
    mode.key = "inference.mode";
    mode.set = [](PipelineConfig &c, std::string_view v) {
      c.link.mode = ParseLinkMode(Unquote(v));
    };
    mode.get = [](const PipelineConfig &c) {
      return FormatValue(std::string(LinkModeName(c.link.mode)));
    };
    f.push_back(mode);

    Field cuts;
    cuts.key = "eval.cuts";
    cuts.set = [](PipelineConfig &c, std::string_view v) {
      c.cuts.clear();
      for (const std::string &item : SplitList(v)) {
        c.cuts.push_back(ParseValue<size_t>("eval.cuts", item));
      }
    };
    cuts.get = [](const PipelineConfig &c) { return fmt::format("[{}]", fmt::join(c.cuts, ", ")); };
    f.push_back(cuts);

    Field languages;
    languages.key = "synth.languages";
    languages.set = [](PipelineConfig &c, std::string_view v) {
      c.synth.languages = SplitList(v);
    };
    languages.get = [](const PipelineConfig &c) {
      std::vector<std::string> quoted;
      for (const auto &l : c.synth.languages) quoted.push_back(FormatValue(l));
      return fmt::format("[{}]", fmt::join(quoted, ", "));
    };
    f.push_back(languages);
    return f;
  }();
  return fields;
}

#undef MLINK_FIELD

}  // namespace

std::filesystem::path PathConfig::Resolve(const std::string &path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : std::filesystem::path(work_dir) / p;
}

void PipelineConfig::Validate() const {
  Require(featurizer.vocab_size == encoder.vocab_size,
          "featurizer and encoder vocabularies differ");
  Require(threads >= 0, "threads must be non-negative");
  Require(test_page_fraction >= 0.0 && test_page_fraction < 1.0,
          "corpus.test_page_fraction must be in [0, 1)");
  Require(pair_cap >= 1, "corpus.pair_cap must be positive");
  Require(!cuts.empty() && curve_max_k >= 1, "eval needs cuts and curve_max_k >= 1");
  link.Validate();
  index.search.Validate();
}

void ApplySetting(PipelineConfig &config, std::string_view key, std::string_view value) {
  for (const Field &f : Fields()) {
    if (f.key == key) {
      f.set(config, value);
      return;
    }
  }
  Fail(ErrorKind::kInvalidArgument, "unknown config key \"" + std::string(key) + "\"");
}

PipelineConfig ParseConfig(std::string_view text, std::string_view source) {
  PipelineConfig config;
  std::string section;
  size_t line_number = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    // Comments start at '#' outside quotes.
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_number) + ": ";
    if (line.front() == '[' && line.back() == ']') {
      section = std::string(Trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      Fail(ErrorKind::kInvalidArgument, where + "expected key = value");
    }
    const std::string key = std::string(Trim(line.substr(0, eq)));
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      ApplySetting(config, full, Trim(line.substr(eq + 1)));
    } catch (const Error &e) {
      Fail(e.kind(), where + e.what());
    }
  }
  config.Validate();
  return config;
}

PipelineConfig LoadConfig(const std::filesystem::path &path) {
  return ParseConfig(ReadFile(path), path.string());
}

std::string SerializeConfig(const PipelineConfig &config) {
  std::string out;
  std::string section;
  for (const Field &f : Fields()) {
    const size_t dot = f.key.find('.');
    const std::string s = dot == std::string::npos ? "" : f.key.substr(0, dot);
    const std::string k = dot == std::string::npos ? f.key : f.key.substr(dot + 1);
    if (s != section) {
      out += "\n[" + s + "]\n";
      section = s;
    }
    out += k + " = " + f.get(config) + "\n";
  }
  return out;
}

}  // namespace mlink
