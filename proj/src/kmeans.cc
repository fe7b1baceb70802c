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

#include "mlink/kmeans.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include "mlink/errors.h"
#include "mlink/kernels.h"
#include "mlink/parallel.h"
#include "mlink/rng.h"

namespace mlink {
namespace {

struct Assignment {
  std::vector<uint32_t> cluster;
  std::vector<float> distance;
};

Assignment Assign(std::span<const float> points,
                  std::span<const float> centroids, int dim) {
  const size_t n = points.size() / dim;
  const size_t k = centroids.size() / dim;
  Assignment a;
  a.cluster.resize(n);
  a.distance.resize(n);
  ParallelFor(n, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const float *p = points.data() + i * dim;
      float best = std::numeric_limits<float>::infinity();
      uint32_t best_c = 0;
      for (size_t c = 0; c < k; ++c) {
        const float d = SquaredDistance(p, centroids.data() + c * dim, dim);
        if (d < best) {
          best = d;
          best_c = static_cast<uint32_t>(c);
        }
      }
      a.cluster[i] = best_c;
      a.distance[i] = best;
    }
  });
  return a;
}

}  // namespace

std::vector<uint32_t> AssignNearest(std::span<const float> points,
                                    std::span<const float> centroids, int dim) {
  return Assign(points, centroids, dim).cluster;
}

std::vector<uint32_t> NearestCentroids(std::span<const float> points,
                                       std::span<const float> centroids,
                                       int dim, int count) {
  const size_t n = points.size() / dim;
  const size_t k = centroids.size() / dim;
  Require(count >= 1 && static_cast<size_t>(count) <= k,
          "nearest-centroid count must be in [1, " + std::to_string(k) + "]");
  if (count == 1) return AssignNearest(points, centroids, dim);
  std::vector<uint32_t> out(n * count);
  ParallelFor(n, [&](size_t begin, size_t end) {
    std::vector<std::pair<float, uint32_t>> scored(k);
    for (size_t i = begin; i < end; ++i) {
      const float *p = points.data() + i * dim;
      for (size_t c = 0; c < k; ++c) {
        scored[c] = {SquaredDistance(p, centroids.data() + c * dim, dim),
                     static_cast<uint32_t>(c)};
      }
      std::partial_sort(scored.begin(), scored.begin() + count, scored.end());
      for (int j = 0; j < count; ++j) out[i * count + j] = scored[j].second;
    }
  });
  return out;
}

KMeansResult KMeans(std::span<const float> all_points, int dim,
                    const KMeansOptions &options) {
  Require(dim > 0, "k-means dimension must be positive");
  const size_t total = all_points.size() / dim;
  const auto k = static_cast<size_t>(options.num_clusters);
  Require(k >= 1, "k-means needs at least one cluster");
  if (total < k) {
    Fail(ErrorKind::kInvalidArgument,
         "k-means needs at least " + std::to_string(k) + " points, got " +
             std::to_string(total));
  }
  Rng rng(options.seed);
  std::vector<size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order);

  // Subsample for training.
  std::vector<float> sample;
  std::span<const float> points = all_points;
  const size_t cap = std::max<size_t>(k, k * options.max_points_per_cluster);
  if (total > cap) {
    std::vector<size_t> picked(order.begin(), order.begin() + cap);
    std::sort(picked.begin(), picked.end());
    sample.reserve(cap * dim);
    for (size_t i : picked) {
      sample.insert(sample.end(), all_points.begin() + i * dim,
                    all_points.begin() + (i + 1) * dim);
    }
    points = sample;
    order.resize(cap);
    std::iota(order.begin(), order.end(), 0);
    rng.Shuffle(order);
  }
  const size_t n = points.size() / dim;

  KMeansResult result;
  result.dim = dim;
  result.centroids.reserve(k * dim);
  // k-means++ seeding: first centre from the permutation, then each next
  // centre drawn with probability proportional to squared distance.
  std::vector<float> nearest(n, std::numeric_limits<float>::infinity());
  size_t next = order[0];
  for (size_t c = 0; c < k; ++c) {
    const float *p = points.data() + next * dim;
    result.centroids.insert(result.centroids.end(), p, p + dim);
    if (c + 1 == k) break;
    ParallelFor(n, [&](size_t begin, size_t end) {
      for (size_t i = begin; i < end; ++i) {
        nearest[i] = std::min(nearest[i],
                              SquaredDistance(points.data() + i * dim, p, dim));
      }
    });
    double total = 0.0;
    for (float d : nearest) total += d;
    if (total <= 0.0) {
      // Fewer distinct points than clusters; reuse permutation order.
      next = order[(c + 1) % n];
      continue;
    }
    double target = rng.UniformDouble() * total;
    next = n;
    for (size_t i = 0; i < n; ++i) {
      if (nearest[i] <= 0.0f) continue;
      next = i;
      target -= nearest[i];
      if (target < 0.0) break;
    }
  }

  for (int iter = 0; iter < options.iterations; ++iter) {
    Assignment a = Assign(points, result.centroids, dim);
    std::vector<size_t> counts(k, 0);
    for (uint32_t c : a.cluster) ++counts[c];

    // Empty-cluster repair: hand each empty cluster the farthest point whose
    // own cluster can spare it.
    for (size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      size_t far = n;
      float far_d = -1.0f;
      for (size_t i = 0; i < n; ++i) {
        if (counts[a.cluster[i]] > 1 && a.distance[i] > far_d) {
          far_d = a.distance[i];
          far = i;
        }
      }
      if (far == n) break;  // fewer distinct points than clusters
      --counts[a.cluster[far]];
      a.cluster[far] = static_cast<uint32_t>(c);
      a.distance[far] = 0.0f;
      counts[c] = 1;
      ++result.repaired_clusters;
    }

    std::vector<double> sums(k * dim, 0.0);
    for (size_t i = 0; i < n; ++i) {
      double *s = sums.data() + static_cast<size_t>(a.cluster[i]) * dim;
      const float *p = points.data() + i * dim;
      for (int j = 0; j < dim; ++j) s[j] += p[j];
    }
    for (size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (int j = 0; j < dim; ++j) {
        result.centroids[c * dim + j] =
            static_cast<float>(sums[c * dim + j] / static_cast<double>(counts[c]));
      }
    }
  }
  return result;
}

}  // namespace mlink
