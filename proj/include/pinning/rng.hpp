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

#pragma once

#include <array>
#include <cstdint>

namespace pinning {

/// Philox4x32-10 counter-based bijection (Salmon et al., SC'11).
///
/// Every random number used in this project is a pure function of
/// (seed, stream, counter). Replicas and lattice sites therefore never share
/// generator state, and sharding work across threads cannot change results.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter bijection(Counter ctr, Key key);
};

/// Purpose tags, placed in the high bits of the stream id.
enum class Stream : std::uint64_t {
  environment = 1,
  tilt = 2,
  path = 3,
  bridge = 4,
  spine = 5,
  generic = 15,
};

std::uint64_t make_stream(Stream purpose, std::uint64_t index);

/// Sequential reader over a single (seed, stream) Philox stream.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter = 0);

  std::uint64_t next_u64();
  /// Uniform in the open interval (0,1), 53 bits.
  double uniform();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

/// Open-interval uniform from the first word of block `index` of a stream.
double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// SplitMix64 finalizer; maps (master, index) to an independent child seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace pinning
