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

#ifndef MLINK_KMEANS_H_
#define MLINK_KMEANS_H_

#include <cstdint>
#include <span>
#include <vector>

namespace mlink {

struct KMeansOptions {
  int num_clusters = 16;
  int iterations = 10;
  uint64_t seed = 0;
  // Training uses a seeded subsample when there are more points than this
  // many per cluster.
  size_t max_points_per_cluster = 256;
};

struct KMeansResult {
  int dim = 0;
  std::vector<float> centroids;  // num_clusters x dim
  // Number of empty clusters that were re-seeded from the farthest point.
  int repaired_clusters = 0;
};

// Lloyd's algorithm on squared L2 with seeded k-means++ initialization. A cluster left empty by an assignment step
// is re-seeded with the point farthest from its current centroid.
// Requires at least as many points as clusters.
KMeansResult KMeans(std::span<const float> points, int dim,
                    const KMeansOptions &options);

// Index of the nearest centroid for every point (ties go to the lower index).
std::vector<uint32_t> AssignNearest(std::span<const float> points,
                                    std::span<const float> centroids, int dim);

// The `count` nearest centroids of every point, nearest first (ties go to the
// lower index); row-major N x count.
std::vector<uint32_t> NearestCentroids(std::span<const float> points,
                                       std::span<const float> centroids,
                                       int dim, int count);

}  // namespace mlink

#endif  // MLINK_KMEANS_H_
