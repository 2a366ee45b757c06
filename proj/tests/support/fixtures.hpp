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

// Small table models shared by the unit and acceptance tests.

#include <cstdint>
#include <string>

#include "llmp/backend.hpp"
#include "llmp/common.hpp"

namespace fixture {

// Supported on exactly the 100 strings "d.d" after `prompt`, with seeded
// random digit probabilities and a little non-numeric mass at every step
// (which masking removes).
inline llmp::backend::TableLM digit_table(const std::string& prompt, std::uint64_t seed) {
  using llmp::backend::TokenDistribution;
  llmp::Rng rng(seed);
  auto digits = [&] {
    TokenDistribution d;
    for (char c = '0'; c <= '9'; ++c) d.emplace_back(std::string(1, c), 0.05 + rng.uniform());
    d.emplace_back("x", 0.3);
    return d;
  };
  llmp::backend::TableLM lm({{"x", 1.0}});
  lm.add(prompt, digits());
  for (char a = '0'; a <= '9'; ++a) {
    const std::string p = prompt + a;
    lm.add(p, {{".", 0.9}, {"?", 0.1}});
    lm.add(p + ".", digits());
    for (char b = '0'; b <= '9'; ++b) lm.add(p + "." + b, {{"\n", 0.8}, {"y", 0.2}});
  }
  return lm;
}

// Two targets at x=2 and x=3 after one training pair (1, 0.5), precision 1.
// The value at x=3 depends on what precedes it in the prompt:
//   p(0.7 | ..0.5) = 0.5, p(0.7 | ..0.3) = 0.9, p(0.7 | ..0.7) = 0.2.
// The value at x=2 is 0.3 with probability 0.6 whatever precedes it.
inline llmp::backend::TableLM chain_table() {
  llmp::backend::TableLM lm({{"\n", 1.0}});
  lm.add("2, ", {{"0", 1.0}}).add("2, 0", {{".", 1.0}}).add("2, 0.", {{"3", 0.6}, {"7", 0.4}});
  lm.add("3, ", {{"0", 1.0}}).add("3, 0", {{".", 1.0}});
  lm.add("0.5\n3, 0.", {{"7", 0.5}, {"3", 0.5}});
  lm.add("0.3\n3, 0.", {{"7", 0.9}, {"3", 0.1}});
  lm.add("0.7\n3, 0.", {{"7", 0.2}, {"3", 0.8}});
  return lm;
}

}  // namespace fixture
