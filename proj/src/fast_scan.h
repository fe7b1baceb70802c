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

#ifndef MLINK_SRC_FAST_SCAN_H_
#define MLINK_SRC_FAST_SCAN_H_

#include <cstddef>
#include <cstdint>

namespace mlink {

inline constexpr int kScanGroup = 32;

// Group layout: for each block, 16 bytes; byte j holds the code of lane j in
// its low nibble and of lane j + 16 in its high nibble.
//
// sums[g * 32 + lane] = sum over blocks of lut[block * 16 + code]. Callers
// keep blocks * max(lut) within uint16.
void ScanGroups(const uint8_t *groups, size_t num_groups, int blocks,
                const uint8_t *lut, uint16_t *sums);

// Writes the indices i < count with sums[i] >= floor to `out`, ascending,
// and returns how many. `out` needs room for count + 8 entries.
size_t SelectAtLeast(const uint16_t *sums, size_t count, uint16_t floor, uint32_t *out);

// Plain C++ version of SelectAtLeast.
size_t SelectAtLeastReference(const uint16_t *sums, size_t count, uint16_t floor,
                              uint32_t *out);

// out[j] = float(double(q[j]) * step) for j < n.
void DequantizeInt8Row(const int8_t *q, double step, size_t n, float *out);

// Plain C++ version of DequantizeInt8Row.
void DequantizeInt8RowReference(const int8_t *q, double step, size_t n, float *out);

enum class ScanKernel { kPortable, kSsse3, kAvx2 };

// Whether this CPU can run `kernel`; kPortable always can.
bool ScanKernelAvailable(ScanKernel kernel);

// ScanGroups with a fixed kernel; the vector kernels must agree with
// kPortable exactly.
void ScanGroupsUsing(ScanKernel kernel, const uint8_t *groups, size_t num_groups,
                     int blocks, const uint8_t *lut, uint16_t *sums);

}  // namespace mlink

#endif  // MLINK_SRC_FAST_SCAN_H_
