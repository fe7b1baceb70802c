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

#ifndef MLINK_ANN_INDEX_H_
#define MLINK_ANN_INDEX_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlink/encoder.h"
#include "mlink/exact_index.h"

namespace mlink {

// Cache-line aligned storage, so a 64-dim int8 row is one line.
template <typename T>
struct CacheAlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  CacheAlignedAllocator() = default;
  template <typename U>
  CacheAlignedAllocator(const CacheAlignedAllocator<U> &) {}
  T *allocate(size_t n) { return static_cast<T *>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T *p, size_t) { ::operator delete(p, kAlign); }
  bool operator==(const CacheAlignedAllocator &) const { return true; }
};

inline constexpr int kCodebookSize = 16;  // 4-bit codes

struct QuantizerConfig {
  int num_leaves = 1000;
  // Dimensions per 4-bit code; must divide the index dimension.
  int block_dim = 2;
  int kmeans_iterations = 10;
  uint64_t seed = 0;
  size_t max_points_per_cluster = 64;
  // When positive, leaf centroids are themselves clustered into this many
  // top-level nodes, giving a two-level tree.
  int num_top_clusters = 0;
  // Weight on the residual error component parallel to the datapoint when
  // choosing codes. 1 is plain nearest-codeword encoding.
  double anisotropic_weight = 1.0;
  int anisotropic_passes = 3;
  // Number of nearest leaves each row is stored in. Values above 1 trade
  // scan cost for partition recall.
  int spill = 1;
  // Secondary leaves minimize ||r'||^2 + w (r' . r / ||r||)^2, where r is the
  // residual under the nearest leaf, chosen among the 4 * spill nearest.
  double spill_orthogonality = 1.0;
};

struct SearchParams {
  int leaves_to_probe = 1;
  size_t rescore_count = 100;
  size_t final_count = 10;
  // Two-level trees only; 0 probes every top-level node.
  int top_clusters_to_probe = 0;

  // Throws unless 1 <= final_count <= rescore_count and leaves_to_probe >= 1.
  void Validate() const;
};

// Partition tree over the rows of a MentionIndex plus 4-bit residual codes
// for approximate scoring and int8 copies for rescoring. Immutable after
// training; concurrent searches are safe.
class QuantizedIndex {
 public:
  static QuantizedIndex Train(std::shared_ptr<const MentionIndex> base,
                              const QuantizerConfig &config);

  // Probe leaves, score their members through per-query uint8 lookup
  // tables, rescore the best rescore_count rows with int8 vectors, return
  // the best final_count. Ties go to the lower row.
  std::vector<Neighbor> Search(std::span<const float> query,
                               const SearchParams &params) const;

  // Leaves visited for `query`, best first. leaves_to_probe is clamped to the
  // number of leaves (with a warning).
  std::vector<uint32_t> ProbedLeaves(std::span<const float> query,
                                     const SearchParams &params) const;

  const MentionIndex &base() const { return *base_; }
  std::shared_ptr<const MentionIndex> shared_base() const { return base_; }
  size_t size() const { return leaf_of_.size(); }
  int dim() const { return dim_; }
  int num_leaves() const { return num_leaves_; }
  int num_top_clusters() const { return num_top_; }
  int block_dim() const { return block_dim_; }
  int num_blocks() const { return dim_ / block_dim_; }

  int spill() const { return spill_; }
  size_t num_entries() const { return entry_rows_.size(); }

  // Nearest leaf of `row`; its codes are relative to this leaf's centroid.
  uint32_t leaf_of(size_t row) const { return leaf_of_[row]; }
  // Rows stored in `leaf`, ascending.
  std::span<const uint32_t> leaf_rows(uint32_t leaf) const {
    return {entry_rows_.data() + leaf_offsets_[leaf],
            leaf_offsets_[leaf + 1] - leaf_offsets_[leaf]};
  }
  std::span<const float> leaf_centroid(uint32_t leaf) const {
    return {leaf_centroids_.data() + static_cast<size_t>(leaf) * dim_,
            static_cast<size_t>(dim_)};
  }
  uint8_t entry_code(size_t entry, int block) const;
  // Code of `row` under its nearest leaf.
  uint8_t code(size_t row, int block) const {
    return entry_code(primary_entry_[row], block);
  }
  std::span<const float> codeword(int block, int c) const {
    return {codebooks_.data() +
                (static_cast<size_t>(block) * kCodebookSize + c) * block_dim_,
            static_cast<size_t>(block_dim_)};
  }
  std::span<const int8_t> int8_row(size_t row) const {
    return {int8_vectors_.data() + row * dim_, static_cast<size_t>(dim_)};
  }
  // Per-row max |x_i|; dequantized value is q * (max_abs / 127).
  float row_max_abs(size_t row) const { return row_max_abs_[row]; }

  // Leaf centroid plus decoded residual.
  std::vector<float> Reconstruct(size_t row) const;
  std::vector<float> Dequantize(size_t row) const;
  // Score of the codebook stage: q . centroid + sum of block lookups.
  float ApproximateScore(std::span<const float> query, size_t row) const;

  friend std::string SerializeQuantizedIndex(const QuantizedIndex &index);
  friend QuantizedIndex ParseQuantizedIndex(
      std::string_view bytes, std::string_view source,
      std::shared_ptr<const MentionIndex> base);

  bool SameQuantization(const QuantizedIndex &other) const;

 private:
  void IndexEntries();
  std::vector<uint32_t> SelectLeaves(std::span<const float> query, const SearchParams &params,
                                     bool sorted) const;
  void SetEntryCode(uint32_t leaf, uint64_t entry, int block, uint8_t code);
  void DequantizeInto(size_t row, float *out) const;

  std::shared_ptr<const MentionIndex> base_;
  int dim_ = 0;
  int num_leaves_ = 0;
  int num_top_ = 0;
  int block_dim_ = 0;
  std::vector<float> top_centroids_;   // num_top x dim
  std::vector<uint32_t> leaf_parent_;  // num_leaves, empty for one level
  std::vector<float> leaf_centroids_;  // num_leaves x dim
  std::vector<uint32_t> leaf_of_;      // N
  int spill_ = 1;
  // Leaf-major entries: leaf l owns [leaf_offsets_[l], leaf_offsets_[l + 1]).
  std::vector<uint64_t> leaf_offsets_;
  std::vector<uint32_t> entry_rows_;
  // Codes in groups of 32 entries per leaf (last group zero-padded), each
  // group num_blocks x 16 bytes; see ScanGroups.
  std::vector<uint8_t> group_codes_;
  std::vector<uint64_t> leaf_group_offsets_;  // derived
  std::vector<uint64_t> primary_entry_;       // N, derived
  std::vector<float> codebooks_;  // num_blocks x 16 x block_dim
  std::vector<int8_t, CacheAlignedAllocator<int8_t>> int8_vectors_;
  std::vector<float> row_max_abs_;
};

// Symmetric max-abs int8 quantization of one vector.
void QuantizeInt8(std::span<const float> v, std::span<int8_t> out, float &max_abs);
float DequantizeInt8(int8_t q, float max_abs);

class AnnSearcher : public Searcher {
 public:
  AnnSearcher(const QuantizedIndex &index, SearchParams params)
      : index_(index), params_(params) {}

  // final_count follows top_n; rescore_count is raised to top_n if needed.
  std::vector<Neighbor> Search(std::span<const float> query,
                               size_t top_n) const override;
  const MentionIndex &index() const override { return index_.base(); }

 private:
  const QuantizedIndex &index_;
  SearchParams params_;
};

// "MQDX", u32 version, u64 N, u32 d, u32 leaves, u32 block_dim, u32 top
// clusters, u32 spill, u64 entries, then top centroids, leaf parents, leaf
// centroids, row leaves, leaf offsets, entry rows, codebooks, grouped codes,
// int8 vectors, row max-abs values. The base index
// is stored separately (MIDX) and must match N and d.
inline constexpr uint32_t kQuantizedIndexVersion = 1;

std::string SerializeQuantizedIndex(const QuantizedIndex &index);
QuantizedIndex ParseQuantizedIndex(std::string_view bytes,
                                   std::string_view source,
                                   std::shared_ptr<const MentionIndex> base);
void SaveQuantizedIndex(const QuantizedIndex &index,
                        const std::filesystem::path &path);
QuantizedIndex LoadQuantizedIndex(const std::filesystem::path &path,
                                  std::shared_ptr<const MentionIndex> base);

// ---------------------------------------------------------------------------
// Profiling.

struct ProfileResult {
  std::string config;
  double qps = 0.0;
  double mean_latency_ms = 0.0;
  double recall_at_1 = 0.0;
  double recall_at_10 = 0.0;
  double recall_at_100 = 0.0;
};

// Throughput is measured across ThreadCount() workers, latency one query at a
// time on the calling thread. Recall@k is the mean overlap between the
// searcher's top k and the exact top k.
ProfileResult Profile(const Searcher &searcher,
                      std::span<const Embedding> queries, int repetitions,
                      std::string config_label, size_t timed_top_n = 10);

// Mean |approx top-k ∩ exact top-k| / k over queries.
double RecallVsExact(const std::vector<std::vector<Neighbor>> &approx,
                     const std::vector<std::vector<Neighbor>> &exact, size_t k);

std::string ProfileTsvHeader();
std::string ProfileTsvRow(const ProfileResult &r);

}  // namespace mlink

#endif  // MLINK_ANN_INDEX_H_
