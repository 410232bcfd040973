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

#include <cstddef>
#include <exception>
#include <mutex>
#include <vector>

namespace pinning {

/// threads == 0 means "OpenMP default, or PINNING_THREADS when set".
struct ParallelPolicy {
  int threads = 0;
};

/// Worker count actually used for a policy.
int resolve_threads(const ParallelPolicy& policy);

/// Reference implementation: results[i] = f(i) in index order.
template <class T, class F>
std::vector<T> map_replicas_serial(std::size_t count, F&& f) {
  std::vector<T> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(f(i));
  return out;
}

/// results[i] = f(i), computed by an OpenMP team. f must be a pure function
/// of i, so the output is identical to map_replicas_serial for any team size.
/// The first exception thrown by any worker is rethrown on the caller.
template <class T, class F>
std::vector<T> map_replicas(std::size_t count, F&& f, ParallelPolicy policy = {}) {
  const int threads = resolve_threads(policy);
  if (threads <= 1 || count < 2) return map_replicas_serial<T>(count, f);
  std::vector<T> out(count);
  std::exception_ptr error;
  std::mutex guard;
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace pinning
