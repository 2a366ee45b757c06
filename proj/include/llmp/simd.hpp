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
#include <span>
#include <string_view>

// Data-parallel inner loops shared by the distance ordering, the GP kernel
// matrices and the Thompson-sampling argmax. Each kernel has a scalar
// reference and vector variants; the variant is chosen once at runtime.
//
// Point sets are stored dimension-major ("structure of arrays"): coordinate d
// of point i lives at points[d * count + i].
namespace llmp::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

// Best ISA the running CPU supports, unless LLMP_SIMD=scalar is set.
Isa active_isa();

// ISAs compiled into this binary and supported by the running CPU.
bool isa_available(Isa isa);

// out[i] = sum_d (points[d*count+i] - query[d])^2. The vector variants keep
// one point per lane and accumulate dimensions in order, so results are
// bit-identical to the scalar reference.
void squared_distances(std::span<const double> points, std::size_t count,
                       std::span<const double> query, std::span<double> out);

// Sum of a[i]*b[i]. Vector variants reassociate the sum.
double dot(std::span<const double> a, std::span<const double> b);

// Index of the largest element; the lowest index wins ties. Empty input
// returns 0.
std::size_t argmax(std::span<const double> values);

// Explicit-ISA entry points for equivalence tests. Calling an ISA that is
// not available throws std::logic_error.
void squared_distances(Isa isa, std::span<const double> points, std::size_t count,
                       std::span<const double> query, std::span<double> out);
double dot(Isa isa, std::span<const double> a, std::span<const double> b);
std::size_t argmax(Isa isa, std::span<const double> values);

}  // namespace llmp::simd
