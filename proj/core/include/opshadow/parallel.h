// Copyright 2026 The opshadow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPSHADOW_PARALLEL_H
#define OPSHADOW_PARALLEL_H

#include <cstddef>
#include <functional>

namespace opshadow {

/// Environment variable holding the worker count.
inline constexpr const char *kWorkersEnv = "OPSHADOW_WORKERS";

/// Worker count from OPSHADOW_WORKERS, falling back to the hardware concurrency.
int worker_count();

/// Runs fn(i) for every i in [0, n) on a pool of `workers` threads (0 means
/// worker_count()). Indices are handed out in contiguous blocks; fn must only
/// write state owned by index i. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn, int workers = 0);

}  // namespace opshadow

#endif
