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
#include <string>
#include <vector>

#include "robustfc/decision_rules.hpp"
#include "robustfc/parallel.hpp"

namespace robustfc {

// Shifted-normal limit experiment around P0 = 1/2 with p_L(P) = P and
// p_U(P) = 1/2 below 1/2, min(2P - 1/2, 1) above. Four decision rules in
// hhat, each a half-line acceptance region [hhat*, inf).
enum class Ex7Rule { BayesMinimax, Plugin, BayesMinimaxRegret, PosteriorMeanPlugin };

const char* ex7_rule_name(Ex7Rule rule);

struct Ex7Config {
    double h0_max = 8.0;   // grid is symmetric about 0
    double h0_step = 0.01;
    double root_tol = 1e-12;
    std::vector<Ex7Rule> rules{Ex7Rule::BayesMinimax, Ex7Rule::Plugin,
                               Ex7Rule::BayesMinimaxRegret, Ex7Rule::PosteriorMeanPlugin};

    std::vector<double> grid() const;
    void validate() const;
};

BinaryBounds ex7_bounds(double P);

// Decision of each rule at hhat; +1 resolves boundary ties.
int ex7_decide(Ex7Rule rule, double hhat);

// The rule's unique crossing point hhat* (bisection to root_tol after a
// sign-scan that verifies uniqueness; a second change raises NumericalError).
double ex7_threshold(Ex7Rule rule, double root_tol = 1e-12);

struct RuleCurve {
    Ex7Rule rule;
    std::vector<double> excess;  // aligned with Ex7Config::grid()
    double integrated = 0.0;     // trapezoid over the grid
    double max_value = 0.0;
    double threshold = 0.0;
};

// Closed-form frequentist excess curves in the limit experiment:
//   risk:   3 h0 P[d=0|h0] for h0 >= 0, -h0 P[d=1|h0] for h0 < 0,
//   regret: 4 h0 P[d=0|h0] for h0 >= 0, -2 h0 P[d=1|h0] for h0 < 0,
// with P[d=0|h0] = Phi(hhat* - h0) for a threshold rule.
std::vector<RuleCurve> ex7_excess_risk_curve(const Ex7Config& cfg,
                                             ExecMode mode = ExecMode::Parallel);
std::vector<RuleCurve> ex7_excess_regret_curve(const Ex7Config& cfg,
                                               ExecMode mode = ExecMode::Parallel);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double se = 0.0;
};

// Simulation oracle for the analytic curves: hhat ~ N(h0,1), exact per-draw
// excess, averaged. Deterministic per seed, chunked for parallelism.
MonteCarloEstimate ex7_monte_carlo(Ex7Rule rule, double h0, long long reps,
                                   std::uint64_t seed, RiskReport::Criterion criterion,
                                   ExecMode mode = ExecMode::Parallel);

// Pairwise percentage table: how much larger rule a's statistic is than rule
// b's, in percent of b ("a vs b"). Dominance comparisons read off the row
// whose b is the dominating (efficient) rule.
struct RatioEntry {
    Ex7Rule a;
    Ex7Rule b;
    double integrated_pct;
    double max_pct;
};
std::vector<RatioEntry> ex7_ratio_table(const std::vector<RuleCurve>& curves);

} // namespace robustfc
