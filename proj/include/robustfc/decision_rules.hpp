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

#include <optional>
#include <utility>
#include <vector>

#include "robustfc/errors.hpp"

namespace robustfc {

// Decision-boundary ties are flagged at machine scale only: the rules are
// exact algebra, so anything larger is genuine signal from the inputs.
inline constexpr double kTieTol = 1e-12;

struct LossSpec {
    enum class Kind { Binary, Quadratic, Log, Classification };

    Kind kind = Kind::Binary;
    double a01 = 1.0; // penalty for y=0, d=1
    double a10 = 1.0; // penalty for y=1, d=0
    int num_outcomes = 2;

    static LossSpec binary(double a01 = 1.0, double a10 = 1.0);
    static LossSpec quadratic();
    static LossSpec log_loss();
    static LossSpec classification(int num_outcomes);

    // Threshold a01/(a01+a10) for the binary indicator rules.
    double threshold() const { return a01 / (a01 + a10); }
    void validate() const;
};

// Lower/upper extreme probabilities of the event {Y=1}.
struct BinaryBounds {
    double p_lower = 0.0;
    double p_upper = 0.0;

    BinaryBounds() = default;
    BinaryBounds(double lo, double hi);
    bool point() const { return p_lower == p_upper; }
};

// Per-outcome lowest probabilities and worst-case regrets. Either vector may
// be empty; each rule validates only the side it consumes.
struct MultinomialBounds {
    std::vector<double> lower;       // underline p_m
    std::vector<double> regret_gaps; // Delta p_m

    void validate() const;
};

struct Decision {
    std::optional<int> discrete;
    std::optional<double> continuous;
    bool tie = false;
    std::vector<int> tie_set; // populated for classification ties

    static Decision of_discrete(int d, bool tie = false) {
        Decision out;
        out.discrete = d;
        out.tie = tie;
        return out;
    }
    static Decision of_continuous(double d) {
        Decision out;
        out.continuous = d;
        return out;
    }
};

struct RiskReport {
    enum class Criterion { Risk, Regret };
    double value = 0.0;
    Criterion criterion = Criterion::Risk;
};

// theta-optimal forecasts for a known forecast distribution.
Decision theta_optimal(const LossSpec& loss, double p);
Decision theta_optimal(const LossSpec& loss, const std::vector<double>& p);

// Binary robust rules. Discrete rules resolve ties with the >=/<= conventions
// of the displays (tie resolved to d=1) and set the tie flag.
std::pair<Decision, RiskReport> minimax_binary(const LossSpec& loss, const BinaryBounds& b);
std::pair<Decision, RiskReport> minimax_regret_binary(const LossSpec& loss,
                                                      const BinaryBounds& b);

// Continuous-decision rules; quadratic/log minimax coincide.
Decision minimax_quadratic(const BinaryBounds& b);
Decision minimax_log(const BinaryBounds& b);
std::pair<Decision, RiskReport> mmr_quadratic(const BinaryBounds& b);

// Unique solution of log(d/(1-d)) = (h(p_U)-h(p_L))/(p_U-p_L); closed form.
Decision mmr_log(const BinaryBounds& b);

// Classification rules; ties resolved to the smallest index, tie set exposed.
std::pair<Decision, RiskReport> minimax_classification(const MultinomialBounds& mb);
std::pair<Decision, RiskReport> mmr_classification(const MultinomialBounds& mb);

} // namespace robustfc
