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

#ifndef MLINK_TESTS_TEST_UTIL_H_
#define MLINK_TESTS_TEST_UTIL_H_

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mlink/errors.h"
#include "mlink/exact_index.h"
#include "mlink/rng.h"

namespace mlink::testutil {

inline ErrorKind KindOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an mlink::Error";
  return ErrorKind::kInternal;
}

inline std::vector<float> RandomUnitVectors(size_t n, int dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> out(n * dim);
  for (size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double v = rng.Normal(0.0, 1.0);
      out[i * dim + j] = static_cast<float>(v);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (int j = 0; j < dim; ++j) {
      out[i * dim + j] = static_cast<float>(out[i * dim + j] / norm);
    }
  }
  return out;
}

// Rows whose entries are +-1/sqrt(dim) with dim a power of four, so every
// value and every int8 round trip is exact.
inline std::vector<float> SignVectors(size_t n, int dim, uint64_t seed) {
  Rng rng(seed);
  const float mag = static_cast<float>(1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<float> out(n * dim);
  for (float &v : out) v = rng.Uniform(2) == 0 ? mag : -mag;
  return out;
}

// Entity of row i is "e<i % entities>".
inline MentionIndex IndexOf(std::vector<float> vectors, int dim,
                            size_t entities = 10) {
  const size_t n = vectors.size() / dim;
  std::vector<IndexRowLabel> labels(n);
  std::map<std::string, int64_t> counts;
  for (size_t i = 0; i < n; ++i) {
    labels[i].mention_id = "m" + std::to_string(i);
    labels[i].entity_id = "e" + std::to_string(i % entities);
    labels[i].language = i % 2 == 0 ? "en" : "de";
    ++counts[labels[i].entity_id];
  }
  return MentionIndex::FromVectors(dim, std::move(vectors), std::move(labels),
                                   std::move(counts));
}

}  // namespace mlink::testutil

#endif  // MLINK_TESTS_TEST_UTIL_H_
