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

#pragma once

#include <cstddef>

namespace llmp::simd::detail {

void squared_distances_scalar(const double* points, std::size_t count, std::size_t dims,
                              const double* query, double* out);
double dot_scalar(const double* a, const double* b, std::size_t n);
std::size_t argmax_scalar(const double* v, std::size_t n);

#if defined(LLMP_HAVE_AVX2)
void squared_distances_avx2(const double* points, std::size_t count, std::size_t dims,
                            const double* query, double* out);
double dot_avx2(const double* a, const double* b, std::size_t n);
std::size_t argmax_avx2(const double* v, std::size_t n);
#endif

#if defined(LLMP_HAVE_NEON)
void squared_distances_neon(const double* points, std::size_t count, std::size_t dims,
                            const double* query, double* out);
double dot_neon(const double* a, const double* b, std::size_t n);
std::size_t argmax_neon(const double* v, std::size_t n);
#endif

}  // namespace llmp::simd::detail
