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

#include "mlink/ann_index.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "mlink/binary_io.h"
#include "mlink/errors.h"
#include "mlink/kernels.h"
#include "mlink/kmeans.h"
#include "mlink/parallel.h"
#include "mlink/rng.h"
#include "fast_scan.h"

namespace mlink {
namespace {

std::atomic<bool> warned_probe_clamp{false};

struct ScoredId {
  uint32_t id;
  float score;
};

// Best `count` ids; ordered by score descending, id ascending when `sorted`.
std::vector<uint32_t> RankByDot(std::span<const float> query,
                                const std::vector<float> &centroids, int dim,
                                const std::vector<uint32_t> &ids, size_t count,
                                bool sorted = true) {
  std::vector<ScoredId> scored;
  scored.reserve(ids.size());
  for (uint32_t id : ids) {
    scored.push_back({id, DotProduct(query.data(),
                                     centroids.data() + static_cast<size_t>(id) * dim, dim)});
  }
  auto better = [](const ScoredId &a, const ScoredId &b) {
    return a.score > b.score || (a.score == b.score && a.id < b.id);
  };
  count = std::min(count, scored.size());
  if (count < scored.size()) {
    std::nth_element(scored.begin(), scored.begin() + count, scored.end(), better);
  }
  if (sorted) std::sort(scored.begin(), scored.begin() + count, better);
  std::vector<uint32_t> out(count);
  for (size_t i = 0; i < count; ++i) out[i] = scored[i].id;
  return out;
}

// Squared error of a block under `codeword`, and its projection on u.
void BlockError(const float *residual, const float *codeword, const float *u,
                int g, double &sq, double &proj) {
  sq = 0.0;
  proj = 0.0;
  for (int j = 0; j < g; ++j) {
    const double e = static_cast<double>(residual[j]) - codeword[j];
    sq += e * e;
    proj += e * u[j];
  }
}

// `spill` leaves per point, nearest first.
std::vector<uint32_t> SpillAssignments(std::span<const float> points,
                                       const std::vector<float> &centroids,
                                       int dim, int spill, double orthogonality) {
  if (spill == 1) return AssignNearest(points, centroids, dim);
  const int leaves = static_cast<int>(centroids.size() / dim);
  const int pool = std::min(leaves, 4 * spill);
  const std::vector<uint32_t> near = NearestCentroids(points, centroids, dim, pool);
  const size_t n = points.size() / dim;
  std::vector<uint32_t> out(n * spill);
  ParallelFor(n, [&](size_t begin, size_t end) {
    std::vector<double> r(dim);
    std::vector<std::pair<double, uint32_t>> scored;
    for (size_t i = begin; i < end; ++i) {
      const float *x = points.data() + i * dim;
      const uint32_t *cand = near.data() + i * pool;
      const float *c0 = centroids.data() + static_cast<size_t>(cand[0]) * dim;
      double rn2 = 0.0;
      for (int j = 0; j < dim; ++j) {
        r[j] = static_cast<double>(x[j]) - c0[j];
        rn2 += r[j] * r[j];
      }
      scored.clear();
      for (int k = 1; k < pool; ++k) {
        const float *c = centroids.data() + static_cast<size_t>(cand[k]) * dim;
        double sq = 0.0, dot = 0.0;
        for (int j = 0; j < dim; ++j) {
          const double e = static_cast<double>(x[j]) - c[j];
          sq += e * e;
          dot += e * r[j];
        }
        const double loss = rn2 > 0.0 ? sq + orthogonality * dot * dot / rn2 : sq;
        scored.push_back({loss, cand[k]});
      }
      std::partial_sort(scored.begin(), scored.begin() + (spill - 1), scored.end());
      out[i * spill] = cand[0];
      for (int k = 1; k < spill; ++k) out[i * spill + k] = scored[k - 1].second;
    }
  });
  return out;
}

// Larger key ranks first: score bits flipped to sort as unsigned, then the
// complemented row. Finite scores only; -0 is folded into +0.
uint64_t RankKey(const Neighbor &n) {
  const uint32_t bits = std::bit_cast<uint32_t>(n.score + 0.0f);
  const uint32_t ordered = (bits & 0x80000000u) ? ~bits : bits | 0x80000000u;
  return (static_cast<uint64_t>(ordered) << 32) | ~n.row;
}

Neighbor FromRankKey(uint64_t key) {
  const auto ordered = static_cast<uint32_t>(key >> 32);
  const uint32_t bits = (ordered & 0x80000000u) ? ordered & 0x7FFFFFFFu : ~ordered;
  return {~static_cast<uint32_t>(key), std::bit_cast<float>(bits)};
}

// Keeps the best-scoring candidate per row, in first-seen order. `where`
// maps rows to output slots and is left all-empty again on return.
std::vector<Neighbor> BestPerRow(const std::vector<Neighbor> &candidates,
                                 std::vector<uint32_t> &where) {
  constexpr uint32_t kEmpty = std::numeric_limits<uint32_t>::max();
  std::vector<Neighbor> out(candidates.size());
  uint32_t n = 0;
  for (const Neighbor &c : candidates) {
    const uint32_t at = where[c.row];
    const bool fresh = at == kEmpty;
    const uint32_t slot = fresh ? n : at;
    where[c.row] = slot;
    const float prev = out[slot].score;
    out[slot].row = c.row;
    out[slot].score = fresh ? c.score : std::max(prev, c.score);
    n += fresh;
  }
  out.resize(n);
  for (const Neighbor &o : out) where[o.row] = kEmpty;
  return out;
}

}  // namespace

void SearchParams::Validate() const {
  Require(leaves_to_probe >= 1, "leaves_to_probe must be at least 1");
  Require(final_count >= 1, "final_count must be at least 1");
  Require(final_count <= rescore_count,
          "final_count must not exceed rescore_count");
  Require(top_clusters_to_probe >= 0, "top_clusters_to_probe must be >= 0");
}

void QuantizeInt8(std::span<const float> v, std::span<int8_t> out,
                  float &max_abs) {
  max_abs = 0.0f;
  for (float x : v) max_abs = std::max(max_abs, std::fabs(x));
  for (size_t i = 0; i < v.size(); ++i) {
    if (max_abs == 0.0f) {
      out[i] = 0;
      continue;
    }
    const long q = std::lround(static_cast<double>(v[i]) * 127.0 / max_abs);
    out[i] = static_cast<int8_t>(std::clamp<long>(q, -127, 127));
  }
}

float DequantizeInt8(int8_t q, float max_abs) {
  return static_cast<float>(q * (static_cast<double>(max_abs) / 127.0));
}

QuantizedIndex QuantizedIndex::Train(std::shared_ptr<const MentionIndex> base,
                                     const QuantizerConfig &config) {
  Require(base != nullptr && !base->empty(), "cannot quantize an empty index");
  const int d = base->dim();
  const size_t n = base->size();
  Require(config.block_dim >= 1 && d % config.block_dim == 0,
          "block_dim " + std::to_string(config.block_dim) +
              " must divide the index dimension " + std::to_string(d));
  Require(config.num_leaves >= 1, "num_leaves must be at least 1");
  Require(config.num_top_clusters >= 0, "num_top_clusters must be >= 0");
  Require(config.anisotropic_weight > 0.0, "anisotropic_weight must be positive");

  QuantizedIndex q;
  q.base_ = base;
  q.dim_ = d;
  q.block_dim_ = config.block_dim;
  q.num_leaves_ = config.num_leaves;
  if (static_cast<size_t>(q.num_leaves_) > n) {
    spdlog::warn("num_leaves {} exceeds index size {}; using {}",
                 q.num_leaves_, n, n);
    q.num_leaves_ = static_cast<int>(n);
  }
  const auto vectors = base->vectors();

  KMeansOptions leaf_opts;
  leaf_opts.num_clusters = q.num_leaves_;
  leaf_opts.iterations = config.kmeans_iterations;
  leaf_opts.seed = config.seed;
  leaf_opts.max_points_per_cluster = config.max_points_per_cluster;
  KMeansResult leaves = KMeans(vectors, d, leaf_opts);
  q.leaf_centroids_ = std::move(leaves.centroids);
  Require(config.spill >= 1, "spill must be at least 1");
  Require(config.spill_orthogonality >= 0.0, "spill_orthogonality must be >= 0");
  q.spill_ = std::min(config.spill, q.num_leaves_);
  const std::vector<uint32_t> nearest =
      SpillAssignments(vectors, q.leaf_centroids_, d, q.spill_,
                       config.spill_orthogonality);
  q.leaf_of_.resize(n);
  for (size_t i = 0; i < n; ++i) q.leaf_of_[i] = nearest[i * q.spill_];

  // Leaf-major entries, rows ascending within each leaf.
  q.leaf_offsets_.assign(q.num_leaves_ + 1, 0);
  for (uint32_t leaf : nearest) ++q.leaf_offsets_[leaf + 1];
  for (int l = 0; l < q.num_leaves_; ++l) q.leaf_offsets_[l + 1] += q.leaf_offsets_[l];
  const size_t entries = nearest.size();
  q.entry_rows_.resize(entries);
  std::vector<uint32_t> entry_leaf(entries);
  {
    std::vector<uint64_t> cursor(q.leaf_offsets_.begin(), q.leaf_offsets_.end() - 1);
    for (size_t i = 0; i < n; ++i) {
      for (int j = 0; j < q.spill_; ++j) {
        const uint32_t leaf = nearest[i * q.spill_ + j];
        const uint64_t e = cursor[leaf]++;
        q.entry_rows_[e] = static_cast<uint32_t>(i);
        entry_leaf[e] = leaf;
      }
    }
  }
  auto residual = [&](size_t e, int j) {
    return vectors[static_cast<size_t>(q.entry_rows_[e]) * d + j] -
           q.leaf_centroids_[static_cast<size_t>(entry_leaf[e]) * d + j];
  };

  if (config.num_top_clusters > 0) {
    q.num_top_ = std::min(config.num_top_clusters, q.num_leaves_);
    KMeansOptions top_opts = leaf_opts;
    top_opts.num_clusters = q.num_top_;
    top_opts.seed = MixSeed(config.seed, 0x746f70);
    KMeansResult top = KMeans(q.leaf_centroids_, d, top_opts);
    q.top_centroids_ = std::move(top.centroids);
    q.leaf_parent_ = AssignNearest(q.leaf_centroids_, q.top_centroids_, d);
  }

  const int g = q.block_dim_;
  const int blocks = d / g;
  q.codebooks_.assign(static_cast<size_t>(blocks) * kCodebookSize * g, 0.0f);
  std::vector<uint8_t> codes(entries * blocks);
  std::vector<float> sub(entries * g);
  for (int b = 0; b < blocks; ++b) {
    for (size_t e = 0; e < entries; ++e) {
      for (int j = 0; j < g; ++j) sub[e * g + j] = residual(e, b * g + j);
    }
    KMeansOptions cb_opts;
    cb_opts.num_clusters = static_cast<int>(std::min<size_t>(kCodebookSize, entries));
    cb_opts.iterations = config.kmeans_iterations;
    cb_opts.seed = MixSeed(config.seed, static_cast<uint64_t>(b) + 1);
    cb_opts.max_points_per_cluster = 256;
    KMeansResult cb = KMeans(sub, g, cb_opts);
    float *book = q.codebooks_.data() + static_cast<size_t>(b) * kCodebookSize * g;
    std::copy(cb.centroids.begin(), cb.centroids.end(), book);
    // Pad short codebooks with the last codeword; ties never select padding.
    for (int c = cb_opts.num_clusters; c < kCodebookSize; ++c) {
      std::copy_n(cb.centroids.end() - g, g, book + c * g);
    }
    const std::vector<uint32_t> assigned =
        AssignNearest(sub, std::span<const float>(book, kCodebookSize * g), g);
    for (size_t e = 0; e < entries; ++e) {
      codes[e * blocks + b] = static_cast<uint8_t>(assigned[e]);
    }
  }

  if (config.anisotropic_weight != 1.0) {
    // Coordinate descent on ||e||^2 + (w - 1) (e . u)^2 per row, where e is
    // the residual error and u the unit datapoint direction.
    const double extra = config.anisotropic_weight - 1.0;
    ParallelFor(entries, [&](size_t begin, size_t end) {
      std::vector<double> block_sq(blocks), block_proj(blocks);
      std::vector<float> res(d);
      for (size_t i = begin; i < end; ++i) {
        for (int j = 0; j < d; ++j) res[j] = residual(i, j);
        const float *r = res.data();
        const float *x = vectors.data() + static_cast<size_t>(q.entry_rows_[i]) * d;
        double norm = std::sqrt(static_cast<double>(DotProduct(x, x, d)));
        if (norm == 0.0) continue;
        std::vector<float> u(x, x + d);
        for (float &v : u) v = static_cast<float>(v / norm);
        uint8_t *row_codes = codes.data() + i * blocks;
        double proj = 0.0;
        for (int b = 0; b < blocks; ++b) {
          BlockError(r + b * g, q.codeword(b, row_codes[b]).data(), u.data() + b * g,
                     g, block_sq[b], block_proj[b]);
          proj += block_proj[b];
        }
        for (int pass = 0; pass < config.anisotropic_passes; ++pass) {
          bool changed = false;
          for (int b = 0; b < blocks; ++b) {
            const double rest = proj - block_proj[b];
            double best = block_sq[b] + extra * (rest + block_proj[b]) * (rest + block_proj[b]);
            int best_c = row_codes[b];
            double best_sq = block_sq[b], best_proj = block_proj[b];
            for (int c = 0; c < kCodebookSize; ++c) {
              double sq, pr;
              BlockError(r + b * g, q.codeword(b, c).data(), u.data() + b * g, g, sq, pr);
              const double loss = sq + extra * (rest + pr) * (rest + pr);
              if (loss < best) {
                best = loss;
                best_c = c;
                best_sq = sq;
                best_proj = pr;
              }
            }
            if (best_c != row_codes[b]) {
              changed = true;
              row_codes[b] = static_cast<uint8_t>(best_c);
              block_sq[b] = best_sq;
              block_proj[b] = best_proj;
              proj = rest + best_proj;
            }
          }
          if (!changed) break;
        }
      }
    });
  }

  q.IndexEntries();
  q.group_codes_.assign(q.leaf_group_offsets_.back() * blocks * 16, 0);
  for (int l = 0; l < q.num_leaves_; ++l) {
    for (uint64_t e = q.leaf_offsets_[l]; e < q.leaf_offsets_[l + 1]; ++e) {
      for (int b = 0; b < blocks; ++b) q.SetEntryCode(l, e, b, codes[e * blocks + b]);
    }
  }

  q.int8_vectors_.resize(n * d);
  q.row_max_abs_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    QuantizeInt8(base->vector(i), {q.int8_vectors_.data() + i * d, static_cast<size_t>(d)},
                 q.row_max_abs_[i]);
  }
  return q;
}

uint8_t QuantizedIndex::entry_code(size_t entry, int block) const {
  const auto it = std::upper_bound(leaf_offsets_.begin(), leaf_offsets_.end(), entry);
  const auto leaf = static_cast<size_t>(it - leaf_offsets_.begin()) - 1;
  const uint64_t pos = entry - leaf_offsets_[leaf];
  const uint64_t group = leaf_group_offsets_[leaf] + pos / kScanGroup;
  const int lane = static_cast<int>(pos % kScanGroup);
  const uint8_t byte =
      group_codes_[(group * num_blocks() + block) * 16 + lane % 16];
  return lane < 16 ? (byte & 0x0F) : (byte >> 4);
}

void QuantizedIndex::SetEntryCode(uint32_t leaf, uint64_t entry, int block,
                                  uint8_t code) {
  const uint64_t pos = entry - leaf_offsets_[leaf];
  const uint64_t group = leaf_group_offsets_[leaf] + pos / kScanGroup;
  const int lane = static_cast<int>(pos % kScanGroup);
  uint8_t &byte = group_codes_[(group * num_blocks() + block) * 16 + lane % 16];
  byte |= lane < 16 ? code : static_cast<uint8_t>(code << 4);
}

void QuantizedIndex::IndexEntries() {
  leaf_group_offsets_.assign(num_leaves_ + 1, 0);
  for (int l = 0; l < num_leaves_; ++l) {
    const uint64_t count = leaf_offsets_[l + 1] - leaf_offsets_[l];
    leaf_group_offsets_[l + 1] = leaf_group_offsets_[l] + (count + kScanGroup - 1) / kScanGroup;
  }
  constexpr uint64_t kMissing = std::numeric_limits<uint64_t>::max();
  primary_entry_.assign(leaf_of_.size(), kMissing);
  for (int l = 0; l < num_leaves_; ++l) {
    for (uint64_t e = leaf_offsets_[l]; e < leaf_offsets_[l + 1]; ++e) {
      const uint32_t row = entry_rows_[e];
      if (leaf_of_[row] == static_cast<uint32_t>(l)) primary_entry_[row] = e;
    }
  }
  for (size_t row = 0; row < primary_entry_.size(); ++row) {
    if (primary_entry_[row] == kMissing) {
      Fail(ErrorKind::kParse, "row " + std::to_string(row) + " is missing from its leaf");
    }
  }
}

std::vector<uint32_t> QuantizedIndex::ProbedLeaves(
    std::span<const float> query, const SearchParams &params) const {
  return SelectLeaves(query, params, true);
}

std::vector<uint32_t> QuantizedIndex::SelectLeaves(std::span<const float> query,
                                                   const SearchParams &params,
                                                   bool sorted) const {
  params.Validate();
  Require(query.size() == static_cast<size_t>(dim_),
          "query dimension " + std::to_string(query.size()) +
              " does not match index dimension " + std::to_string(dim_));
  size_t probe = static_cast<size_t>(params.leaves_to_probe);
  if (probe > static_cast<size_t>(num_leaves_)) {
    if (!warned_probe_clamp.exchange(true)) {
      spdlog::warn("leaves_to_probe {} exceeds {} leaves; probing all",
                   probe, num_leaves_);
    }
    probe = num_leaves_;
  }
  std::vector<uint32_t> candidates;
  if (num_top_ > 0) {
    std::vector<uint32_t> tops(num_top_);
    std::iota(tops.begin(), tops.end(), 0u);
    size_t top_probe = params.top_clusters_to_probe == 0
                           ? tops.size()
                           : std::min<size_t>(params.top_clusters_to_probe, tops.size());
    std::vector<uint32_t> picked = RankByDot(query, top_centroids_, dim_, tops, top_probe);
    std::vector<char> keep(num_top_, 0);
    for (uint32_t t : picked) keep[t] = 1;
    for (int l = 0; l < num_leaves_; ++l) {
      if (keep[leaf_parent_[l]]) candidates.push_back(l);
    }
  } else {
    candidates.resize(num_leaves_);
    std::iota(candidates.begin(), candidates.end(), 0u);
  }
  return RankByDot(query, leaf_centroids_, dim_, candidates, probe, sorted);
}

std::vector<Neighbor> QuantizedIndex::Search(std::span<const float> query,
                                             const SearchParams &params) const {
  const std::vector<uint32_t> leaves = SelectLeaves(query, params, false);
  const int g = block_dim_;
  const int blocks = num_blocks();
  // Per-query uint8 tables on a shared step so lane sums stay comparable.
  const int qmax = std::min(255, 65535 / std::max(blocks, 1));
  std::vector<float> block_lut(static_cast<size_t>(blocks) * kCodebookSize);
  double bias = 0.0;
  float widest = 0.0f;
  for (int b = 0; b < blocks; ++b) {
    float *t = block_lut.data() + b * kCodebookSize;
    for (int c = 0; c < kCodebookSize; ++c) {
      t[c] = DotProduct(query.data() + b * g, codeword(b, c).data(), g);
    }
    const auto [mn, mx] = std::minmax_element(t, t + kCodebookSize);
    bias += *mn;
    widest = std::max(widest, *mx - *mn);
    const float low = *mn;
    for (int c = 0; c < kCodebookSize; ++c) t[c] -= low;
  }
  const float step = widest > 0.0f ? widest / qmax : 1.0f;
  std::vector<uint8_t> lut(block_lut.size());
  for (size_t i = 0; i < lut.size(); ++i) {
    // Entries are >= 0, so adding a half and truncating rounds to nearest.
    lut[i] = static_cast<uint8_t>(std::min(static_cast<int>(block_lut[i] / step + 0.5f), qmax));
  }

  const size_t cap = params.rescore_count * static_cast<size_t>(spill_);
  const size_t probed = leaves.size();
  std::vector<float> bases(probed);
  std::vector<size_t> starts(probed + 1, 0);
  float lo = std::numeric_limits<float>::infinity();
  float hi = -lo;
  size_t total = 0;
  for (size_t k = 0; k < probed; ++k) {
    const uint32_t leaf = leaves[k];
    bases[k] = static_cast<float>(
        DotProduct(query.data(), leaf_centroid(leaf).data(), dim_) + bias);
    lo = std::min(lo, bases[k]);
    hi = std::max(hi, bases[k]);
    starts[k + 1] = starts[k] + (leaf_group_offsets_[leaf + 1] - leaf_group_offsets_[leaf]) *
                                    static_cast<size_t>(kScanGroup);
    total += leaf_offsets_[leaf + 1] - leaf_offsets_[leaf];
  }
  // Fully written by the scan.
  std::unique_ptr<uint16_t[]> sums(new uint16_t[starts[probed]]);
  for (size_t k = 0; k < probed; ++k) {
    const uint64_t g0 = leaf_group_offsets_[leaves[k]];
    ScanGroups(group_codes_.data() + g0 * blocks * 16, leaf_group_offsets_[leaves[k] + 1] - g0,
               blocks, lut.data(), sums.get() + starts[k]);
  }

  // Keys count whole steps above the lowest base, so key <= score / step is
  // off by less than one. A histogram over keys gives a cut that the top
  // `cap` entries clear; `margin` absorbs float rounding in the scores.
  const double key_span = (static_cast<double>(hi) - lo) / step + 65536.0;
  const double margin =
      1.0 + std::ceil(1e-5 * (1.0 + std::fabs(lo) + std::fabs(hi)) / step);
  constexpr int64_t kNoCut = std::numeric_limits<int64_t>::min();
  std::vector<int64_t> key_base(probed);
  for (size_t k = 0; k < probed; ++k) {
    key_base[k] = static_cast<int64_t>(std::floor((static_cast<double>(bases[k]) - lo) / step));
  }
  // Highest cut with at least `want` of every `stride`-th entry at or above it.
  auto cut_for = [&](size_t stride, size_t want) -> int64_t {
    int64_t kmin = std::numeric_limits<int64_t>::max();
    int64_t kmax = std::numeric_limits<int64_t>::min();
    for (size_t k = 0; k < probed; ++k) {
      const uint16_t *sk = sums.get() + starts[k];
      const size_t count = leaf_offsets_[leaves[k] + 1] - leaf_offsets_[leaves[k]];
      if (count == 0) continue;
      uint16_t smin = 0xFFFF, smax = 0;
      for (size_t i = 0; i < count; i += stride) {
        smin = std::min(smin, sk[i]);
        smax = std::max(smax, sk[i]);
      }
      kmin = std::min(kmin, key_base[k] + smin);
      kmax = std::max(kmax, key_base[k] + smax);
    }
    if (kmin > kmax) return kNoCut;
    constexpr int kBins = 2048;
    int shift = 0;
    while (((kmax - kmin) >> shift) >= kBins) ++shift;
    std::vector<uint32_t> counts(4 * kBins, 0);
    uint32_t *c = counts.data();
    // Keys outside the sampled range land in the end bins.
    auto bin = [&](int64_t key) {
      return static_cast<size_t>(std::clamp<int64_t>((key - kmin) >> shift, 0, kBins - 1));
    };
    for (size_t k = 0; k < probed; ++k) {
      const uint16_t *sk = sums.get() + starts[k];
      const int64_t kb = key_base[k];
      const size_t count = leaf_offsets_[leaves[k] + 1] - leaf_offsets_[leaves[k]];
      size_t i = 0;
      // Four interleaved sub-histograms keep runs of equal bins from serializing.
      for (; i + 3 * stride < count; i += 4 * stride) {
        ++c[bin(kb + sk[i])];
        ++c[kBins + bin(kb + sk[i + stride])];
        ++c[2 * kBins + bin(kb + sk[i + 2 * stride])];
        ++c[3 * kBins + bin(kb + sk[i + 3 * stride])];
      }
      for (; i < count; i += stride) ++c[bin(kb + sk[i])];
    }
    size_t above = 0;
    for (int b = kBins - 1; b >= 0; --b) {
      above += c[b] + c[kBins + b] + c[2 * kBins + b] + c[3 * kBins + b];
      if (above >= want) {
        return kmin + (static_cast<int64_t>(b) << shift) - static_cast<int64_t>(margin);
      }
    }
    return kNoCut;
  };

  std::vector<Neighbor> approx;
  approx.reserve(std::min(total, 2 * cap + 64));
  std::vector<uint32_t> picked;
  // Returns how many selected entries clear the cut by the full margin.
  const auto slack = static_cast<int64_t>(margin);
  auto select = [&](int64_t threshold) {
    approx.clear();
    size_t clear = 0;
    for (size_t k = 0; k < probed; ++k) {
      const uint32_t leaf = leaves[k];
      const uint64_t begin = leaf_offsets_[leaf];
      const size_t count = leaf_offsets_[leaf + 1] - begin;
      const uint16_t *sk = sums.get() + starts[k];
      const int64_t raw = threshold == kNoCut ? 0 : threshold - key_base[k];
      const int64_t need = std::max<int64_t>(0, raw);
      if (need > 65535) continue;
      picked.resize(count + 8);
      const size_t n = SelectAtLeast(sk, count, static_cast<uint16_t>(need), picked.data());
      for (size_t j = 0; j < n; ++j) {
        approx.push_back({entry_rows_[begin + picked[j]], bases[k] + step * sk[picked[j]]});
        clear += sk[picked[j]] >= raw + slack;
      }
    }
    return clear;
  };
  if (total <= cap || key_span + margin >= 1e9) {
    select(kNoCut);
  } else {
    // A cut estimated from every 8th entry, padded by a quarter, usually
    // admits `cap` entries; when it does not, count them all.
    constexpr size_t kStride = 8;
    if (select(cut_for(kStride, (cap + cap / 4) / kStride + 1)) < cap) select(cut_for(1, cap));
  }
  // A row can appear once per probed leaf; keep its best entry. The cut
  // admits every entry of the top `cap`, which covers the best entry of each
  // of the top rescore_count rows.
  if (spill_ > 1) {
    thread_local std::vector<uint32_t> where;
    if (where.size() < size()) where.assign(size(), std::numeric_limits<uint32_t>::max());
    approx = BestPerRow(approx, where);
  }
  const auto ranks = [](const Neighbor &x, const Neighbor &y) { return RanksBefore(x, y); };
  if (approx.size() > params.rescore_count) {
    // Packed keys order like RanksBefore and select without a comparator.
    std::vector<uint64_t> keys(approx.size());
    for (size_t i = 0; i < approx.size(); ++i) keys[i] = RankKey(approx[i]);
    std::nth_element(keys.begin(), keys.begin() + params.rescore_count, keys.end(),
                     std::greater<>());
    approx.resize(params.rescore_count);
    for (size_t i = 0; i < approx.size(); ++i) approx[i] = FromRankKey(keys[i]);
  }

  std::vector<float> buffer(dim_);
  for (const Neighbor &nb : approx) {
    __builtin_prefetch(int8_vectors_.data() + static_cast<size_t>(nb.row) * dim_);
    __builtin_prefetch(row_max_abs_.data() + nb.row);
  }
  for (Neighbor &nb : approx) {
    DequantizeInto(nb.row, buffer.data());
    nb.score = DotProduct(query.data(), buffer.data(), dim_);
  }
  const size_t keep = std::min(params.final_count, approx.size());
  std::partial_sort(approx.begin(), approx.begin() + keep, approx.end(), ranks);
  approx.resize(keep);
  return approx;
}

void QuantizedIndex::DequantizeInto(size_t row, float *out) const {
  const int8_t *q = int8_vectors_.data() + row * dim_;
  DequantizeInt8Row(q, static_cast<double>(row_max_abs_[row]) / 127.0, dim_, out);
}

std::vector<float> QuantizedIndex::Dequantize(size_t row) const {
  std::vector<float> out(dim_);
  DequantizeInto(row, out.data());
  return out;
}

std::vector<float> QuantizedIndex::Reconstruct(size_t row) const {
  std::span<const float> c = leaf_centroid(leaf_of_[row]);
  std::vector<float> out(c.begin(), c.end());
  for (int b = 0; b < num_blocks(); ++b) {
    std::span<const float> w = codeword(b, code(row, b));
    for (int j = 0; j < block_dim_; ++j) out[b * block_dim_ + j] += w[j];
  }
  return out;
}

float QuantizedIndex::ApproximateScore(std::span<const float> query,
                                       size_t row) const {
  float s = DotProduct(query.data(), leaf_centroid(leaf_of_[row]).data(), dim_);
  for (int b = 0; b < num_blocks(); ++b) {
    s += DotProduct(query.data() + b * block_dim_, codeword(b, code(row, b)).data(),
                    block_dim_);
  }
  return s;
}

bool QuantizedIndex::SameQuantization(const QuantizedIndex &o) const {
  return dim_ == o.dim_ && num_leaves_ == o.num_leaves_ && num_top_ == o.num_top_ &&
         block_dim_ == o.block_dim_ && top_centroids_ == o.top_centroids_ &&
         leaf_parent_ == o.leaf_parent_ && leaf_centroids_ == o.leaf_centroids_ &&
         leaf_of_ == o.leaf_of_ && spill_ == o.spill_ && leaf_offsets_ == o.leaf_offsets_ &&
         entry_rows_ == o.entry_rows_ && group_codes_ == o.group_codes_ &&
         codebooks_ == o.codebooks_ &&
         int8_vectors_ == o.int8_vectors_ && row_max_abs_ == o.row_max_abs_;
}

std::vector<Neighbor> AnnSearcher::Search(std::span<const float> query,
                                          size_t top_n) const {
  SearchParams p = params_;
  p.final_count = top_n;
  p.rescore_count = std::max(p.rescore_count, top_n);
  return index_.Search(query, p);
}

// ---------------------------------------------------------------------------

std::string SerializeQuantizedIndex(const QuantizedIndex &q) {
  BinaryWriter w;
  w.WriteMagic("MQDX");
  w.Write<uint32_t>(kQuantizedIndexVersion);
  w.Write<uint64_t>(q.size());
  w.Write<uint32_t>(q.dim_);
  w.Write<uint32_t>(q.num_leaves_);
  w.Write<uint32_t>(q.block_dim_);
  w.Write<uint32_t>(q.num_top_);
  w.Write<uint32_t>(q.spill_);
  w.Write<uint64_t>(q.num_entries());
  w.WriteArray<float>(q.top_centroids_);
  w.WriteArray<uint32_t>(q.leaf_parent_);
  w.WriteArray<float>(q.leaf_centroids_);
  w.WriteArray<uint32_t>(q.leaf_of_);
  w.WriteArray<uint64_t>(q.leaf_offsets_);
  w.WriteArray<uint32_t>(q.entry_rows_);
  w.WriteArray<float>(q.codebooks_);
  w.WriteArray<uint8_t>(q.group_codes_);
  w.WriteArray<int8_t>(q.int8_vectors_);
  w.WriteArray<float>(q.row_max_abs_);
  return w.buffer();
}

QuantizedIndex ParseQuantizedIndex(std::string_view bytes,
                                   std::string_view source,
                                   std::shared_ptr<const MentionIndex> base) {
  Require(base != nullptr, "quantized index needs its base index");
  BinaryReader r(bytes, std::string(source));
  r.ExpectMagic("MQDX");
  const auto version = r.Read<uint32_t>();
  if (version != kQuantizedIndexVersion) {
    Fail(ErrorKind::kVersionMismatch,
         std::string(source) + ": quantized index version " + std::to_string(version) +
             ", expected " + std::to_string(kQuantizedIndexVersion));
  }
  const auto n = r.Read<uint64_t>();
  const auto d = r.Read<uint32_t>();
  if (n != base->size() || d != static_cast<uint32_t>(base->dim())) {
    Fail(ErrorKind::kValidation,
         std::string(source) + ": quantized index covers " + std::to_string(n) + "x" +
             std::to_string(d) + " but base index is " + std::to_string(base->size()) +
             "x" + std::to_string(base->dim()));
  }
  QuantizedIndex q;
  q.base_ = base;
  q.dim_ = static_cast<int>(d);
  q.num_leaves_ = static_cast<int>(r.Read<uint32_t>());
  q.block_dim_ = static_cast<int>(r.Read<uint32_t>());
  q.num_top_ = static_cast<int>(r.Read<uint32_t>());
  q.spill_ = static_cast<int>(r.Read<uint32_t>());
  const auto entries = r.Read<uint64_t>();
  if (q.num_leaves_ < 1 || static_cast<uint64_t>(q.num_leaves_) > n ||
      q.block_dim_ < 1 || d % q.block_dim_ != 0 || q.num_top_ < 0 ||
      q.num_top_ > q.num_leaves_ || q.spill_ < 1 || q.spill_ > q.num_leaves_ ||
      entries != n * static_cast<uint64_t>(q.spill_)) {
    Fail(ErrorKind::kParse, std::string(source) + ": inconsistent quantized index header");
  }
  const int blocks = q.num_blocks();
  q.top_centroids_.resize(static_cast<size_t>(q.num_top_) * d);
  q.leaf_parent_.resize(q.num_top_ > 0 ? q.num_leaves_ : 0);
  q.leaf_centroids_.resize(static_cast<size_t>(q.num_leaves_) * d);
  q.leaf_of_.resize(n);
  q.leaf_offsets_.resize(q.num_leaves_ + 1);
  q.entry_rows_.resize(entries);
  q.codebooks_.resize(static_cast<size_t>(blocks) * kCodebookSize * q.block_dim_);
  q.int8_vectors_.resize(n * d);
  q.row_max_abs_.resize(n);
  r.ReadArray<float>(q.top_centroids_);
  r.ReadArray<uint32_t>(q.leaf_parent_);
  r.ReadArray<float>(q.leaf_centroids_);
  r.ReadArray<uint32_t>(q.leaf_of_);
  r.ReadArray<uint64_t>(q.leaf_offsets_);
  r.ReadArray<uint32_t>(q.entry_rows_);
  r.ReadArray<float>(q.codebooks_);
  if (q.leaf_offsets_.front() != 0 || q.leaf_offsets_.back() != entries ||
      !std::is_sorted(q.leaf_offsets_.begin(), q.leaf_offsets_.end())) {
    Fail(ErrorKind::kParse, std::string(source) + ": bad leaf offsets");
  }
  for (uint32_t row : q.entry_rows_) {
    if (row >= n) Fail(ErrorKind::kParse, std::string(source) + ": entry row out of range");
  }
  try {
    q.IndexEntries();
  } catch (const Error &e) {
    Fail(ErrorKind::kParse, std::string(source) + ": " + e.what());
  }
  q.group_codes_.resize(q.leaf_group_offsets_.back() * blocks * 16);
  r.ReadArray<uint8_t>(q.group_codes_);
  r.ReadArray<int8_t>(q.int8_vectors_);
  r.ReadArray<float>(q.row_max_abs_);
  r.ExpectEnd();
  for (uint32_t leaf : q.leaf_of_) {
    if (leaf >= static_cast<uint32_t>(q.num_leaves_)) {
      Fail(ErrorKind::kParse, std::string(source) + ": row assigned to missing leaf");
    }
  }
  for (uint32_t parent : q.leaf_parent_) {
    if (parent >= static_cast<uint32_t>(q.num_top_)) {
      Fail(ErrorKind::kParse, std::string(source) + ": leaf has missing parent");
    }
  }
  return q;
}

void SaveQuantizedIndex(const QuantizedIndex &index,
                        const std::filesystem::path &path) {
  WriteFileAtomic(path, SerializeQuantizedIndex(index));
}

QuantizedIndex LoadQuantizedIndex(const std::filesystem::path &path,
                                  std::shared_ptr<const MentionIndex> base) {
  return ParseQuantizedIndex(ReadFile(path), path.string(), std::move(base));
}

// ---------------------------------------------------------------------------

double RecallVsExact(const std::vector<std::vector<Neighbor>> &approx,
                     const std::vector<std::vector<Neighbor>> &exact, size_t k) {
  Require(approx.size() == exact.size(), "recall needs matching query lists");
  if (exact.empty()) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < exact.size(); ++i) {
    const size_t ke = std::min(k, exact[i].size());
    if (ke == 0) continue;
    std::vector<uint32_t> truth;
    for (size_t j = 0; j < ke; ++j) truth.push_back(exact[i][j].row);
    std::sort(truth.begin(), truth.end());
    size_t hits = 0;
    for (size_t j = 0; j < std::min(k, approx[i].size()); ++j) {
      hits += std::binary_search(truth.begin(), truth.end(), approx[i][j].row);
    }
    total += static_cast<double>(hits) / static_cast<double>(ke);
  }
  return total / static_cast<double>(exact.size());
}

ProfileResult Profile(const Searcher &searcher, std::span<const Embedding> queries,
                      int repetitions, std::string config_label,
                      size_t timed_top_n) {
  Require(!queries.empty(), "profiling needs at least one query");
  Require(repetitions >= 1, "repetitions must be at least 1");
  using Clock = std::chrono::steady_clock;
  ProfileResult result;
  result.config = std::move(config_label);
  const size_t nq = queries.size();

  std::vector<std::vector<Neighbor>> approx(nq), exact(nq);
  ParallelFor(nq, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      approx[i] = searcher.Search(queries[i], 100);
      exact[i] = searcher.index().Search(queries[i], 100, 1);
    }
  });
  result.recall_at_1 = RecallVsExact(approx, exact, 1);
  result.recall_at_10 = RecallVsExact(approx, exact, 10);
  result.recall_at_100 = RecallVsExact(approx, exact, 100);

  std::atomic<size_t> sink{0};
  auto start = Clock::now();
  for (int rep = 0; rep < repetitions; ++rep) {
    ParallelFor(nq, [&](size_t begin, size_t end) {
      size_t local = 0;
      for (size_t i = begin; i < end; ++i) local += searcher.Search(queries[i], timed_top_n).size();
      sink += local;
    });
  }
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  result.qps = static_cast<double>(nq * repetitions) / std::max(wall, 1e-9);

  start = Clock::now();
  for (size_t i = 0; i < nq; ++i) sink += searcher.Search(queries[i], timed_top_n).size();
  const double serial = std::chrono::duration<double>(Clock::now() - start).count();
  result.mean_latency_ms = 1000.0 * serial / static_cast<double>(nq);
  return result;
}

std::string ProfileTsvHeader() {
  return "config\tqps\tmean_latency_ms\trecall@1\trecall@10\trecall@100\n";
}

std::string ProfileTsvRow(const ProfileResult &r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "\t%.2f\t%.4f\t%.4f\t%.4f\t%.4f\n", r.qps,
                r.mean_latency_ms, r.recall_at_1, r.recall_at_10, r.recall_at_100);
  return r.config + buf;
}

}  // namespace mlink
