// Copyright 2026 The fringelab Authors
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
#include <cstdint>
#include <functional>

namespace fringelab {

/// Number of worker threads used by parallel loops. Defaults to 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
/// write results into per-index slots so output never depends on scheduling.
/// The first exception thrown by any body is rethrown on the calling thread.
/// Calls made from inside a body run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Deterministic sub-seed for the index-th independent task of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace fringelab
