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
#include <vector>

#include "robustfc/decision_rules.hpp"
#include "robustfc/panel_dbc.hpp"

namespace robustfc {

enum class PosteriorSource { DirichletFlat, DirichletCustom, Bootstrap };

// S draws of the reduced-form parameter P (simplex vectors over histories).
struct PosteriorDraws {
    std::vector<std::vector<double>> draws; // S x 2^T
    PosteriorSource source = PosteriorSource::DirichletFlat;
    std::uint64_t seed = 0;
    int skipped = 0; // draws whose identified set turned out empty
};

// DirichletFlat: Dirichlet(1 + counts). DirichletCustom: Dirichlet(alpha +
// counts). Bootstrap: multinomial resamples of size n, renormalized.
PosteriorDraws draw_posterior(const HistoryDistribution& data, int S, std::uint64_t seed,
                              PosteriorSource source,
                              const std::vector<double>& alpha = {});

// Per-draw bounds, aligned with the non-skipped draws.
struct BinaryBoundsSample {
    std::vector<BinaryBounds> bounds;
    int skipped = 0;
    bool skip_warning = false; // more than 10% of draws skipped
};

struct MultinomialBoundsSample {
    std::vector<MultinomialBounds> bounds;
    int skipped = 0;
    bool skip_warning = false;
};

// The six Bayesian robust rules: posterior-averaged worst-case objectives.
// Clipping happens per draw, then averages are compared.
Decision bayes_minimax_binary(const LossSpec& loss, const BinaryBoundsSample& bs);
Decision bayes_mmr_binary(const LossSpec& loss, const BinaryBoundsSample& bs);
Decision bayes_minimax_quadratic(const BinaryBoundsSample& bs);
Decision bayes_mmr_quadratic(const BinaryBoundsSample& bs);
Decision bayes_mmr_log(const BinaryBoundsSample& bs);
Decision bayes_classification(const MultinomialBoundsSample& bs, RiskReport::Criterion crit);

// Posterior means of the bound statistics, for reporting.
struct BinarySampleSummary {
    double mean_lower = 0.0;
    double mean_upper = 0.0;
    int used = 0;
};
BinarySampleSummary summarize(const BinaryBoundsSample& bs);

} // namespace robustfc
