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

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels.hpp"
#include "llmp/simd.hpp"

namespace llmp::simd {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(LLMP_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(LLMP_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

namespace {
Isa detect() {
  if (const char* env = std::getenv("LLMP_SIMD"); env && std::string(env) == "scalar")
    return Isa::Scalar;
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

void require(Isa isa) {
  if (!isa_available(isa))
    throw std::logic_error("SIMD variant not available: " + std::string(to_string(isa)));
}

std::size_t dims_of(std::span<const double> points, std::size_t count) {
  if (count == 0) return 0;
  if (points.size() % count != 0) throw std::invalid_argument("point buffer not count-divisible");
  return points.size() / count;
}
}  // namespace

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

void squared_distances(Isa isa, std::span<const double> points, std::size_t count,
                       std::span<const double> query, std::span<double> out) {
  require(isa);
  if (count == 0) return;
  const std::size_t dims = dims_of(points, count);
  if (query.size() != dims || out.size() < count)
    throw std::invalid_argument("squared_distances: shape mismatch");
  switch (isa) {
#if defined(LLMP_HAVE_AVX2)
    case Isa::Avx2:
      return detail::squared_distances_avx2(points.data(), count, dims, query.data(), out.data());
#endif
#if defined(LLMP_HAVE_NEON)
    case Isa::Neon:
      return detail::squared_distances_neon(points.data(), count, dims, query.data(), out.data());
#endif
    default:
      return detail::squared_distances_scalar(points.data(), count, dims, query.data(), out.data());
  }
}

double dot(Isa isa, std::span<const double> a, std::span<const double> b) {
  require(isa);
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  switch (isa) {
#if defined(LLMP_HAVE_AVX2)
    case Isa::Avx2: return detail::dot_avx2(a.data(), b.data(), a.size());
#endif
#if defined(LLMP_HAVE_NEON)
    case Isa::Neon: return detail::dot_neon(a.data(), b.data(), a.size());
#endif
    default: return detail::dot_scalar(a.data(), b.data(), a.size());
  }
}

std::size_t argmax(Isa isa, std::span<const double> values) {
  require(isa);
  switch (isa) {
#if defined(LLMP_HAVE_AVX2)
    case Isa::Avx2: return detail::argmax_avx2(values.data(), values.size());
#endif
#if defined(LLMP_HAVE_NEON)
    case Isa::Neon: return detail::argmax_neon(values.data(), values.size());
#endif
    default: return detail::argmax_scalar(values.data(), values.size());
  }
}

void squared_distances(std::span<const double> points, std::size_t count,
                       std::span<const double> query, std::span<double> out) {
  squared_distances(active_isa(), points, count, query, out);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return dot(active_isa(), a, b);
}

std::size_t argmax(std::span<const double> values) { return argmax(active_isa(), values); }

}  // namespace llmp::simd
