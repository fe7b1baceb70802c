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

#ifndef MLINK_PARALLEL_H_
#define MLINK_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace mlink {

// Process-wide worker cap. Defaults to the hardware concurrency.
void SetThreadCount(int threads);
int ThreadCount();

// Runs fn(begin, end) over contiguous chunks of [0, n). Chunk boundaries
// depend only on n and the thread count; callers that write results by index
// get output independent of scheduling. Exceptions from workers are
// rethrown on the calling thread (first chunk wins).
void ParallelFor(size_t n, const std::function<void(size_t, size_t)> &fn,
                 int threads = 0);

}  // namespace mlink

#endif  // MLINK_PARALLEL_H_
