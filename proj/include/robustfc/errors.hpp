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

#include <stdexcept>
#include <string>

namespace robustfc {

// Bad user input: malformed files, violated preconditions, inconsistent
// dimensions. The CLI maps this to exit code 2.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine failed to deliver its contract (iteration limit,
// non-convergence, primal/dual mismatch). The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// No parameter in the set can explain the reduced-form target. Posterior
// averaging skips (and counts) draws that land here.
struct EmptyIdentifiedSet : InputError {
    explicit EmptyIdentifiedSet(const std::string& what) : InputError(what) {}
};

} // namespace robustfc
