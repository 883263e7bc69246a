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

#include <cstdlib>
#include <exception>
#include <omp.h>

namespace robustfc {

// Every parallel kernel in this library is an index-space map: iteration i
// writes only slot i of a preallocated output, and the reduction over slots
// happens serially in index order afterwards. Results are therefore identical
// between the two modes; tests run Serial as the reference and compare.
enum class ExecMode { Serial, Parallel };

// Thread budget: ROBUST_FORECAST_THREADS caps the OpenMP default when set.
inline int max_threads() {
    static const int cached = [] {
        int n = omp_get_max_threads();
        if (const char* env = std::getenv("ROBUST_FORECAST_THREADS")) {
            const int cap = std::atoi(env);
            if (cap >= 1 && cap < n) n = cap;
        }
        return n;
    }();
    return cached;
}

// Run body(i) for i in [0, n). Exceptions thrown inside the parallel region
// are captured and rethrown on the calling thread (first one wins).
template <typename Body>
void parallel_for(std::size_t n, ExecMode mode, Body&& body) {
    if (mode == ExecMode::Serial || n <= 1 || max_threads() == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(robustfc_parallel_err)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

} // namespace robustfc
