// Copyright 2026 The heavytail-pinning Authors
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


#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "pinning/rng.hpp"

using namespace pinning;

TEST_CASE("philox known-answer vectors") {
  // Reference outputs of Philox4x32-10 from the Random123 distribution.
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::bijection(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::bijection(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                              K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::bijection(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                              K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter rng is a pure function of (seed, stream, counter)") {
  CounterRng a(42, make_stream(Stream::environment, 3));
  CounterRng b(42, make_stream(Stream::environment, 3));
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  // Restarting at counter c reproduces the draws from block c on.
  CounterRng full(9, 7);
  std::vector<std::uint64_t> seq;
  for (int i = 0; i < 20; ++i) seq.push_back(full.next_u64());
  CounterRng skip(9, 7, 5);
  for (int i = 10; i < 20; ++i) CHECK(skip.next_u64() == seq[i]);
  CHECK(uniform_at(9, 7, 5) == CounterRng(9, 7, 5).uniform());
}

TEST_CASE("streams and seeds do not collide") {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 64; ++s) {
    firsts.insert(CounterRng(1, make_stream(Stream::environment, s)).next_u64());
    firsts.insert(CounterRng(1, make_stream(Stream::tilt, s)).next_u64());
  }
  CHECK(firsts.size() == 128);
  std::set<std::uint64_t> seeds;
  for (std::uint64_t r = 0; r < 10000; ++r) seeds.insert(derive_seed(12345, r));
  CHECK(seeds.size() == 10000);
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("uniforms lie in the open unit interval with the right moments") {
  CounterRng rng(2026, make_stream(Stream::generic, 0));
  const int n = 1000000;
  double sum = 0.0, sq = 0.0, lo = 1.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    sum += u;
    sq += u * u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  // mean 1/2 with sd sqrt(1/12 n); second moment 1/3 with sd sqrt(4/45 n).
  CHECK(std::abs(sum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(sq / n - 1.0 / 3.0) < 5.0 * std::sqrt(4.0 / 45.0 / n));
}
