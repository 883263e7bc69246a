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

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "robustfc/parallel.hpp"

namespace robustfc {

// Extreme forecast probabilities when the mixing distribution ranges over a
// KL ball {Pi : K(Pi || Pi_phi) <= delta} subject to moment conditions
// E_Pi[g(X;phi)] = r. The dual of the inner problem is
//     inf_{eta>=0, mu}  eta log E^{Pi_phi}[ exp((b + mu'(g-r))/eta) ] + eta*delta,
// a jointly convex program; eta*delta sits inside the infimum so that eta is
// bound. Expectations are fixed-seed Monte Carlo averages (or Gauss-Hermite
// quadrature for a univariate normal reference).
struct ContinuousSetSpec {
    std::vector<double> phi_grid;
    int num_outcomes = 2;
    int num_moments = 0;           // K
    std::vector<double> r;         // length K
    double delta = 0.0;            // KL radius
    int sample_size = 100000;
    std::uint64_t seed = 20201210;
    bool clamp01 = true;           // objective is a probability

    // One draw from Pi_phi. The draw is an arbitrary point in R^d.
    std::function<std::vector<double>(double phi, class Rng&)> sampler;
    // Outcome weight b(x; phi, m), bounded.
    std::function<double(const std::vector<double>& x, double phi, int m)> b;
    // Moment functions g(x; phi), length K. May be null when K = 0.
    std::function<std::vector<double>(const std::vector<double>& x, double phi)> g;

    // Optional Gauss-Hermite route: phi -> (mean, sd) of a univariate normal
    // reference; used instead of the sampler when quadrature_points > 0.
    std::function<std::pair<double, double>(double phi)> normal_ref;
    int quadrature_points = 0;

    void validate() const;
};

// Weighted atoms (w_i, b_i, g_i) for one phi and outcome. Duplicate draws
// (discrete references) are merged, with sample_count keeping the original
// Monte Carlo size for standard errors.
struct DualAtoms {
    std::vector<double> w;  // sums to 1
    std::vector<double> b;  // N
    std::vector<std::vector<double>> g; // N x K
    bool monte_carlo = true;
    long long sample_count = 0;
};

DualAtoms build_atoms(const ContinuousSetSpec& spec, double phi, int outcome);

struct DualInnerResult {
    double value = 0.0;
    double eta = 0.0;
    std::vector<double> mu;
    double se = 0.0;       // Monte Carlo standard error of the value
    bool feasible = true;  // false when the objective diverges to -inf
    int iterations = 0;
};

// inf_{eta>=0,mu} of the dual objective for the given atoms. Throws
// NumericalError when the optimizer fails its gradient tolerance.
DualInnerResult dual_inner_min(const DualAtoms& atoms, const std::vector<double>& r,
                               double delta);

struct KlBound {
    double value = 0.0;
    double se = 0.0;
    double arg_phi = 0.0;
};

KlBound dual_extreme_upper(const ContinuousSetSpec& spec, ExecMode mode = ExecMode::Parallel);
KlBound dual_extreme_lower(const ContinuousSetSpec& spec, ExecMode mode = ExecMode::Parallel);

// Delta p_m: max over m' of the upper dual with objective b_{m'} - b_m,
// clamped at zero (m' = m contributes exactly 0).
KlBound multinomial_regret_gap(const ContinuousSetSpec& spec, int outcome,
                               ExecMode mode = ExecMode::Parallel);

} // namespace robustfc
