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

#include "pinning/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace pinning {

int resolve_threads(const ParallelPolicy& policy) {
  if (policy.threads > 0) return policy.threads;
  if (const char* env = std::getenv("PINNING_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
      // fall through to the OpenMP default
    }
  }
  return omp_get_max_threads();
}

}  // namespace pinning
