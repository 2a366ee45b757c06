// Copyright 2026 The llmp Authors. All Rights Reserved.
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

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "kernels.hpp"

namespace llmp::simd::detail {

namespace {
inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}
}  // namespace

void squared_distances_avx2(const double* points, std::size_t count, std::size_t dims,
                            const double* query, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t d = 0; d < dims; ++d) {
      const __m256d x = _mm256_loadu_pd(points + d * count + i);
      const __m256d diff = _mm256_sub_pd(x, _mm256_set1_pd(query[d]));
      // mul then add, not fma: keeps rounding identical to the scalar path
      acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < count; ++i) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double diff = points[d * count + i] - query[d];
      acc += diff * diff;
    }
    out[i] = acc;
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

std::size_t argmax_avx2(const double* v, std::size_t n) {
  if (n < 8) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (v[i] > v[best]) best = i;
    return best;
  }
  __m256d best = _mm256_loadu_pd(v);
  __m256d best_idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  __m256d idx = best_idx;
  const __m256d four = _mm256_set1_pd(4.0);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) {
    idx = _mm256_add_pd(idx, four);
    const __m256d x = _mm256_loadu_pd(v + i);
    const __m256d gt = _mm256_cmp_pd(x, best, _CMP_GT_OQ);
    best = _mm256_blendv_pd(best, x, gt);
    best_idx = _mm256_blendv_pd(best_idx, idx, gt);
  }
  alignas(32) double vals[4];
  alignas(32) double idxs[4];
  _mm256_store_pd(vals, best);
  _mm256_store_pd(idxs, best_idx);
  std::size_t out = static_cast<std::size_t>(idxs[0]);
  double out_val = vals[0];
  for (int k = 1; k < 4; ++k) {
    const auto k_idx = static_cast<std::size_t>(idxs[k]);
    if (vals[k] > out_val || (vals[k] == out_val && k_idx < out)) {
      out_val = vals[k];
      out = k_idx;
    }
  }
  for (; i < n; ++i)
    if (v[i] > out_val) {
      out_val = v[i];
      out = i;
    }
  return out;
}

}  // namespace llmp::simd::detail
