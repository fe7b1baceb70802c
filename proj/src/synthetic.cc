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


#include "mlink/synthetic.h"

#include <charconv>

#include "mlink/errors.h"
#include "mlink/rng.h"

namespace mlink {
namespace {

std::string TokenName(int64_t id) { return "w" + std::to_string(id); }

class Generator {
 public:
  explicit Generator(const SyntheticConfig &config)
      : config_(config),
        rng_(config.seed),
        cluster_tokens_(static_cast<int64_t>(config.entities + config.zero_shot_entities) *
                        config.clusters_per_entity * config.tokens_per_cluster) {}

  std::string Language() {
    return config_.languages[rng_.Uniform(config_.languages.size())];
  }

  std::string Noise() {
    return TokenName(cluster_tokens_ +
                     static_cast<int64_t>(rng_.Uniform(config_.vocab - cluster_tokens_)));
  }

  std::string ClusterToken(int entity, int cluster) {
    const int64_t base = (static_cast<int64_t>(entity) * config_.clusters_per_entity + cluster) *
                         config_.tokens_per_cluster;
    return TokenName(base + static_cast<int64_t>(rng_.Uniform(config_.tokens_per_cluster)));
  }

  std::vector<std::string> Context(int entity, int cluster) {
    std::vector<std::string> out;
    out.reserve(config_.context_length);
    for (int i = 0; i < config_.context_length; ++i) {
      out.push_back(rng_.UniformDouble() < config_.noise ? Noise() : ClusterToken(entity, cluster));
    }
    return out;
  }

  MentionRecord Mention(int entity, int cluster, const std::string &suffix) {
    MentionRecord r;
    r.entity_id = "E" + std::to_string(entity);
    r.mention_id = r.entity_id + "/c" + std::to_string(cluster) + "/" + suffix;
    r.language = Language();
    r.title_tokens = {Noise(), Noise()};
    r.context_tokens = Context(entity, cluster);
    const int32_t at = config_.context_length / 2;
    r.context_tokens[at] = ClusterToken(entity, cluster);
    r.span = TokenSpan{at, at + 1};
    return r;
  }

  MentionRecord Description(int entity) {
    MentionRecord r;
    r.entity_id = "E" + std::to_string(entity);
    r.mention_id = r.entity_id + "/desc";
    r.language = Language();
    r.title_tokens = {"entity" + std::to_string(entity)};
    r.context_tokens = Context(entity, 0);
    r.source = MentionSource::kDescription;
    return r;
  }

 private:
  const SyntheticConfig &config_;
  Rng rng_;
  int64_t cluster_tokens_;
};

}  // namespace

void SyntheticConfig::Validate() const {
  Require(entities >= 1 && clusters_per_entity >= 1 && mentions_per_cluster >= 1 &&
              queries_per_cluster >= 0 && zero_shot_entities >= 0 && tokens_per_cluster >= 1 &&
              context_length >= 1 && vocab >= 1,
          "synthetic corpus sizes must be positive");
  Require(noise >= 0.0 && noise <= 1.0, "noise must be in [0, 1]");
  Require(!languages.empty(), "synthetic corpus needs at least one language");
  const int64_t needed = static_cast<int64_t>(entities + zero_shot_entities) *
                         clusters_per_entity * tokens_per_cluster;
  if (needed >= vocab) {
    Fail(ErrorKind::kInvalidArgument,
         "vocab " + std::to_string(vocab) + " too small for " + std::to_string(needed) +
             " disjoint cluster tokens plus a noise pool");
  }
}

SyntheticCorpus MakeSyntheticCorpus(const SyntheticConfig &config) {
  config.Validate();
  Generator gen(config);
  SyntheticCorpus out;
  for (int e = 0; e < config.entities; ++e) {
    for (int c = 0; c < config.clusters_per_entity; ++c) {
      for (int i = 0; i < config.mentions_per_cluster; ++i) {
        out.train.push_back(gen.Mention(e, c, "m" + std::to_string(i)));
      }
      for (int i = 0; i < config.queries_per_cluster; ++i) {
        out.queries.push_back(gen.Mention(e, c, "q" + std::to_string(i)));
        out.query_clusters.push_back(c);
      }
    }
    out.descriptions.push_back(gen.Description(e));
  }
  for (int z = 0; z < config.zero_shot_entities; ++z) {
    const int e = config.entities + z;
    out.descriptions.push_back(gen.Description(e));
    out.zero_shot_entities.insert(out.descriptions.back().entity_id);
    for (int i = 0; i < config.queries_per_cluster; ++i) {
      out.queries.push_back(gen.Mention(e, 0, "q" + std::to_string(i)));
      out.query_clusters.push_back(0);
    }
  }
  return out;
}

int SyntheticCluster(const std::string &mention_id) {
  const size_t at = mention_id.find("/c");
  if (at == std::string::npos) return -1;
  const char *begin = mention_id.data() + at + 2;
  const char *end = mention_id.data() + mention_id.size();
  int cluster = -1;
  auto [ptr, ec] = std::from_chars(begin, end, cluster);
  if (ec != std::errc() || ptr == begin || ptr == end || *ptr != '/') return -1;
  return cluster;
}

}  // namespace mlink
