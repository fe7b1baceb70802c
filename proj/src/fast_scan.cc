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

#include "fast_scan.h"

#include <cstring>

#include "mlink/errors.h"

#if defined(__x86_64__) || defined(__i386__)
#define MLINK_X86 1
#include <immintrin.h>
#endif

namespace mlink {
namespace {

size_t SelectAtLeastPortable(const uint16_t *sums, size_t count, uint16_t floor,
                             uint32_t *out) {
  size_t n = 0;
  for (size_t i = 0; i < count; ++i) {
    out[n] = static_cast<uint32_t>(i);
    n += sums[i] >= floor;
  }
  return n;
}

void ScanGroupsPortable(const uint8_t *groups, size_t num_groups, int blocks,
                        const uint8_t *lut, uint16_t *sums) {
  for (size_t g = 0; g < num_groups; ++g) {
    const uint8_t *codes = groups + g * static_cast<size_t>(blocks) * 16;
    uint16_t *out = sums + g * kScanGroup;
    for (int lane = 0; lane < kScanGroup; ++lane) out[lane] = 0;
    for (int b = 0; b < blocks; ++b) {
      const uint8_t *table = lut + b * 16;
      for (int j = 0; j < 16; ++j) {
        const uint8_t byte = codes[b * 16 + j];
        out[j] = static_cast<uint16_t>(out[j] + table[byte & 0x0F]);
        out[j + 16] = static_cast<uint16_t>(out[j + 16] + table[byte >> 4]);
      }
    }
  }
}

void DequantizePortable(const int8_t *q, double step, size_t n, float *out) {
  for (size_t j = 0; j < n; ++j) out[j] = static_cast<float>(q[j] * step);
}

#if MLINK_X86

// Same IEEE operations as the portable loop: exact widening, one double
// multiply, one rounding to float.
__attribute__((target("avx2"))) void DequantizeAvx2(const int8_t *q, double step, size_t n,
                                                    float *out) {
  const __m256d s = _mm256_set1_pd(step);
  size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    int32_t four;
    std::memcpy(&four, q + j, sizeof(four));
    const __m128i wide = _mm_cvtepi8_epi32(_mm_cvtsi32_si128(four));
    const __m256d d = _mm256_mul_pd(_mm256_cvtepi32_pd(wide), s);
    _mm_storeu_ps(out + j, _mm256_cvtpd_ps(d));
  }
  for (; j < n; ++j) out[j] = static_cast<float>(q[j] * step);
}

__attribute__((target("ssse3"))) void ScanGroupsSsse3(
    const uint8_t *groups, size_t num_groups, int blocks, const uint8_t *lut,
    uint16_t *sums) {
  const __m128i low_mask = _mm_set1_epi8(0x0F);
  const __m128i zero = _mm_setzero_si128();
  for (size_t g = 0; g < num_groups; ++g) {
    const uint8_t *codes = groups + g * static_cast<size_t>(blocks) * 16;
    __m128i a0 = zero, a1 = zero, a2 = zero, a3 = zero;
    for (int b = 0; b < blocks; ++b) {
      const __m128i v = _mm_loadu_si128(reinterpret_cast<const __m128i *>(codes + b * 16));
      const __m128i table = _mm_loadu_si128(reinterpret_cast<const __m128i *>(lut + b * 16));
      const __m128i rl = _mm_shuffle_epi8(table, _mm_and_si128(v, low_mask));
      const __m128i rh =
          _mm_shuffle_epi8(table, _mm_and_si128(_mm_srli_epi16(v, 4), low_mask));
      a0 = _mm_add_epi16(a0, _mm_unpacklo_epi8(rl, zero));
      a1 = _mm_add_epi16(a1, _mm_unpackhi_epi8(rl, zero));
      a2 = _mm_add_epi16(a2, _mm_unpacklo_epi8(rh, zero));
      a3 = _mm_add_epi16(a3, _mm_unpackhi_epi8(rh, zero));
    }
    __m128i *out = reinterpret_cast<__m128i *>(sums + g * kScanGroup);
    _mm_storeu_si128(out, a0);
    _mm_storeu_si128(out + 1, a1);
    _mm_storeu_si128(out + 2, a2);
    _mm_storeu_si128(out + 3, a3);
  }
}

// Adding looked-up bytes as 16-bit words mixes each pair of lanes as
// even + 256 * odd; a second sum of the words shifted right holds the odd
// lanes alone. Both wrap mod 2^16, and the even lanes are recovered by
// subtraction at the end, exactly since the true sums fit in 16 bits.
struct Avx2Sums {
  __m256i lo_mixed, lo_odd, hi_mixed, hi_odd;
};

__attribute__((target("avx2"))) inline void Avx2Step(Avx2Sums &s, __m256i v,
                                                     __m256i table) {
  const __m256i low_mask = _mm256_set1_epi8(0x0F);
  const __m256i rl = _mm256_shuffle_epi8(table, _mm256_and_si256(v, low_mask));
  const __m256i rh =
      _mm256_shuffle_epi8(table, _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask));
  s.lo_mixed = _mm256_add_epi16(s.lo_mixed, rl);
  s.lo_odd = _mm256_add_epi16(s.lo_odd, _mm256_srli_epi16(rl, 8));
  s.hi_mixed = _mm256_add_epi16(s.hi_mixed, rh);
  s.hi_odd = _mm256_add_epi16(s.hi_odd, _mm256_srli_epi16(rh, 8));
}

// Folds the two block halves, then returns lanes 0..7 and 8..15 of the 16
// byte positions in order.
__attribute__((target("avx2"))) inline void Avx2Finish(__m256i mixed, __m256i odd,
                                                       uint16_t *out) {
  const __m128i m = _mm_add_epi16(_mm256_castsi256_si128(mixed),
                                  _mm256_extracti128_si256(mixed, 1));
  const __m128i o = _mm_add_epi16(_mm256_castsi256_si128(odd),
                                  _mm256_extracti128_si256(odd, 1));
  const __m128i even = _mm_sub_epi16(m, _mm_slli_epi16(o, 8));
  _mm_storeu_si128(reinterpret_cast<__m128i *>(out), _mm_unpacklo_epi16(even, o));
  _mm_storeu_si128(reinterpret_cast<__m128i *>(out + 8), _mm_unpackhi_epi16(even, o));
}

// Two blocks per 256-bit step: block b in the low half, b + 1 in the high
// half; the halves are folded together at the end.
__attribute__((target("avx2"))) void ScanGroupsAvx2(
    const uint8_t *groups, size_t num_groups, int blocks, const uint8_t *lut,
    uint16_t *sums) {
  const size_t stride = static_cast<size_t>(blocks) * 16;
  for (size_t g = 0; g < num_groups; ++g) {
    const uint8_t *codes = groups + g * stride;
    if (g + 2 < num_groups) {
      for (size_t off = 0; off < stride; off += 64) {
        _mm_prefetch(reinterpret_cast<const char *>(codes + 2 * stride + off), _MM_HINT_T0);
      }
    }
    Avx2Sums s{_mm256_setzero_si256(), _mm256_setzero_si256(), _mm256_setzero_si256(),
               _mm256_setzero_si256()};
    int b = 0;
    for (; b + 2 <= blocks; b += 2) {
      Avx2Step(s, _mm256_loadu_si256(reinterpret_cast<const __m256i *>(codes + b * 16)),
               _mm256_loadu_si256(reinterpret_cast<const __m256i *>(lut + b * 16)));
    }
    if (b < blocks) {
      // A zero table in the high half contributes nothing.
      const __m128i zero = _mm_setzero_si128();
      Avx2Step(s,
               _mm256_set_m128i(zero, _mm_loadu_si128(
                                          reinterpret_cast<const __m128i *>(codes + b * 16))),
               _mm256_set_m128i(zero, _mm_loadu_si128(
                                          reinterpret_cast<const __m128i *>(lut + b * 16))));
    }
    uint16_t *out = sums + g * kScanGroup;
    Avx2Finish(s.lo_mixed, s.lo_odd, out);
    Avx2Finish(s.hi_mixed, s.hi_odd, out + 16);
  }
}

// kPack[m] lists the set bit positions of m, lowest first.
struct PackTable {
  alignas(32) uint32_t rows[256][8];
  PackTable() : rows() {
    for (int m = 0; m < 256; ++m) {
      int n = 0;
      for (int b = 0; b < 8; ++b) {
        if (m & (1 << b)) rows[m][n++] = static_cast<uint32_t>(b);
      }
    }
  }
};

__attribute__((target("avx2,popcnt"))) size_t SelectAtLeastAvx2(const uint16_t *sums,
                                                                size_t count, uint16_t floor,
                                                                uint32_t *out) {
  static const PackTable pack;
  const __m128i f = _mm_set1_epi16(static_cast<short>(floor));
  const __m128i zero = _mm_setzero_si128();
  size_t n = 0;
  size_t i = 0;
  for (; i + 8 <= count; i += 8) {
    const __m128i v = _mm_loadu_si128(reinterpret_cast<const __m128i *>(sums + i));
    // Saturating floor - v is zero exactly when v >= floor.
    const __m128i ok = _mm_cmpeq_epi16(_mm_subs_epu16(f, v), zero);
    const int m = _mm_movemask_epi8(_mm_packs_epi16(ok, zero));
    const __m256i idx = _mm256_add_epi32(
        _mm256_set1_epi32(static_cast<int>(i)),
        _mm256_load_si256(reinterpret_cast<const __m256i *>(pack.rows[m])));
    _mm256_storeu_si256(reinterpret_cast<__m256i *>(out + n), idx);
    n += static_cast<size_t>(_mm_popcnt_u32(static_cast<unsigned>(m)));
  }
  for (; i < count; ++i) {
    out[n] = static_cast<uint32_t>(i);
    n += sums[i] >= floor;
  }
  return n;
}

#endif

using ScanFn = void (*)(const uint8_t *, size_t, int, const uint8_t *, uint16_t *);

ScanFn KernelFn(ScanKernel kernel) {
  switch (kernel) {
#if MLINK_X86
    case ScanKernel::kAvx2:
      return ScanGroupsAvx2;
    case ScanKernel::kSsse3:
      return ScanGroupsSsse3;
#endif
    default:
      return ScanGroupsPortable;
  }
}

ScanFn PickScan() {
  if (ScanKernelAvailable(ScanKernel::kAvx2)) return ScanGroupsAvx2;
  if (ScanKernelAvailable(ScanKernel::kSsse3)) return KernelFn(ScanKernel::kSsse3);
  return ScanGroupsPortable;
}

}  // namespace

bool ScanKernelAvailable(ScanKernel kernel) {
#if MLINK_X86
  __builtin_cpu_init();
  if (kernel == ScanKernel::kAvx2) return __builtin_cpu_supports("avx2");
  if (kernel == ScanKernel::kSsse3) return __builtin_cpu_supports("ssse3");
#endif
  return kernel == ScanKernel::kPortable;
}

void ScanGroups(const uint8_t *groups, size_t num_groups, int blocks,
                const uint8_t *lut, uint16_t *sums) {
  static const ScanFn scan = PickScan();
  scan(groups, num_groups, blocks, lut, sums);
}

size_t SelectAtLeast(const uint16_t *sums, size_t count, uint16_t floor, uint32_t *out) {
#if MLINK_X86
  static const bool avx2 =
      ScanKernelAvailable(ScanKernel::kAvx2) && __builtin_cpu_supports("popcnt");
  if (avx2) return SelectAtLeastAvx2(sums, count, floor, out);
#endif
  return SelectAtLeastPortable(sums, count, floor, out);
}

void DequantizeInt8Row(const int8_t *q, double step, size_t n, float *out) {
#if MLINK_X86
  static const bool avx2 = ScanKernelAvailable(ScanKernel::kAvx2);
  if (avx2) return DequantizeAvx2(q, step, n, out);
#endif
  DequantizePortable(q, step, n, out);
}

void DequantizeInt8RowReference(const int8_t *q, double step, size_t n, float *out) {
  DequantizePortable(q, step, n, out);
}

size_t SelectAtLeastReference(const uint16_t *sums, size_t count, uint16_t floor,
                              uint32_t *out) {
  return SelectAtLeastPortable(sums, count, floor, out);
}

void ScanGroupsUsing(ScanKernel kernel, const uint8_t *groups, size_t num_groups,
                     int blocks, const uint8_t *lut, uint16_t *sums) {
  Require(ScanKernelAvailable(kernel), "scan kernel not supported on this CPU");
  KernelFn(kernel)(groups, num_groups, blocks, lut, sums);
}

}  // namespace mlink
