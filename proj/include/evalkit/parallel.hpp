/*
 * Copyright 2026 The tactile-evalkit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef EVALKIT_PARALLEL_HPP_
#define EVALKIT_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace evalkit {

// Upper bound on worker threads for internal parallel loops. Defaults to the
// TACTILE_EVALKIT_THREADS environment variable, else hardware concurrency.
// Results never depend on this value.
std::size_t max_threads();
void set_max_threads(std::size_t n);

// Runs task(i) for every i in [0, count). Tasks must write only to their own
// output slot; the first exception thrown by any task is rethrown.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& task);

}  // namespace evalkit

#endif  // EVALKIT_PARALLEL_HPP_
