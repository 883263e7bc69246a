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

#include <functional>
#include <vector>

#include "robustfc/decision_rules.hpp"
#include "robustfc/lp.hpp"
#include "robustfc/parallel.hpp"

namespace robustfc {

// A set Theta_0 that is linear in a discrete mixing distribution pi on L
// support points: feasibility means G(phi) pi = r with pi on the simplex, and
// the forecast probability of outcome m is b_m(phi)' pi.
struct LinearSetSpec {
    std::vector<double> phi_grid; // ordered homogeneous-parameter grid
    int support_size = 0;         // L
    int num_outcomes = 2;         // M+1
    std::function<Matrix(double)> build_G;                    // phi -> K x L
    std::function<std::vector<double>(double, int)> build_b;  // (phi, m) -> L
    std::vector<double> r;                                    // K
    bool history_model = false; // turn on column/r probability checks

    void validate() const;
};

struct FeasibleInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty = true;
};

struct ProfileRow {
    double phi;
    double lo;
    double hi;
};

struct SolveOptions {
    bool refine = true;           // golden-section refinement of the best cell
    double refine_width = 1e-4;   // terminal bracket width
    double cross_check_tol = 1e-6; // primal vs dualized-program agreement
    ExecMode mode = ExecMode::Parallel;
};

// Value interval of one inner problem at a fixed phi.
struct InnerInterval {
    bool feasible = false;
    double lo = 0.0;
    double hi = 0.0;
};

// Inner sup/inf of objective' pi subject to G(phi) pi = r on the simplex,
// solved on both the primal and the dualized route; disagreement beyond
// cross_check_tol raises NumericalError.
InnerInterval inner_interval(const LinearSetSpec& spec, double phi,
                             const std::vector<double>& objective,
                             const SolveOptions& options = {});

bool phi_feasible(const LinearSetSpec& spec, double phi);

BinaryBounds extreme_probs_binary(const LinearSetSpec& spec, const SolveOptions& options = {});

MultinomialBounds extreme_probs_multinomial(const LinearSetSpec& spec,
                                            const SolveOptions& options = {});

// Min/max feasible phi on the grid, endpoints refined by bisection on the
// phase-one feasibility test down to refine_width.
FeasibleInterval feasible_phi_interval(const LinearSetSpec& spec,
                                       const SolveOptions& options = {});

// Per-phi forecast-probability interval for outcome m; infeasible phi omitted.
std::vector<ProfileRow> profile_bounds(const LinearSetSpec& spec, int outcome,
                                       const SolveOptions& options = {});

} // namespace robustfc
