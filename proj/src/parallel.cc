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

#include "mlink/parallel.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace mlink {
namespace {

std::atomic<int> thread_count{0};

}  // namespace

void SetThreadCount(int threads) { thread_count = std::max(0, threads); }

int ThreadCount() {
  int n = thread_count.load();
  if (n > 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

void ParallelFor(size_t n, const std::function<void(size_t, size_t)> &fn,
                 int threads) {
  if (n == 0) return;
  size_t workers = static_cast<size_t>(threads > 0 ? threads : ThreadCount());
  workers = std::min(workers, n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const size_t chunk = (n + workers - 1) / workers;
  auto run = [&](size_t w) {
    const size_t begin = w * chunk;
    const size_t end = std::min(n, begin + chunk);
    if (begin >= end) return;
    try {
      fn(begin, end);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  for (size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto &t : pool) t.join();
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mlink
