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

// Times the OpenMP kernels against the serial reference paths and verifies
// that the two modes produce identical results.
//
//   bench_parallel [repeats]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "robustfc/bayes_robust.hpp"
#include "robustfc/divergence_dual.hpp"
#include "robustfc/limit_experiment.hpp"
#include "robustfc/linear_model.hpp"
#include "robustfc/normal.hpp"
#include "robustfc/panel_dbc.hpp"
#include "robustfc/rng.hpp"

using namespace robustfc;

namespace {

template <typename F>
double time_ms(int repeats, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        best = std::min(best, ms);
    }
    return best;
}

void row(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-38s %10.1f %10.1f %9.2fx   %s\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, identical ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
    std::printf("threads available: %d (cap with ROBUST_FORECAST_THREADS)\n\n", max_threads());
    std::printf("%-38s %10s %10s %10s\n", "kernel", "serial ms", "openmp ms", "speedup");

    // Per-beta LP sweep of the probit design.
    {
        auto design = honore_tamer_dgp(2);
        auto model = design.model;
        model.history = {0, 0};
        auto spec = build_panel_spec(model, design.population, ForecastWeighting::LastState);
        SolveOptions serial, parallel;
        serial.mode = ExecMode::Serial;
        parallel.mode = ExecMode::Parallel;
        BinaryBounds bs(0, 0), bp(0, 0);
        const double ts = time_ms(repeats, [&] { bs = extreme_probs_binary(spec, serial); });
        const double tp = time_ms(repeats, [&] { bp = extreme_probs_binary(spec, parallel); });
        row("panel extreme probabilities", ts, tp,
            bs.p_lower == bp.p_lower && bs.p_upper == bp.p_upper);
    }

    // Per-draw posterior bound computation.
    {
        auto design = honore_tamer_dgp(2);
        auto sim = simulate_histories(design.dgp, design.model.lambda_grid, 2, 500, 1);
        auto draws = draw_posterior(sim, 32, 9, PosteriorSource::DirichletFlat);
        auto model = design.model;
        model.history = {0, 0};
        model.beta_step = 0.1;
        SolveOptions inner;
        inner.mode = ExecMode::Serial;
        auto run = [&](ExecMode mode) {
            std::vector<double> uppers(draws.draws.size(), -1.0);
            parallel_for(draws.draws.size(), mode, [&](std::size_t s) {
                HistoryDistribution d;
                d.T = 2;
                d.probs = draws.draws[s];
                auto sp = build_panel_spec(model, d, ForecastWeighting::LastState);
                uppers[s] = extreme_probs_binary(sp, inner).p_upper;
            });
            double acc = 0.0;
            for (double u : uppers) acc += u;
            return acc;
        };
        double as = 0.0, ap = 0.0;
        const double ts = time_ms(repeats, [&] { as = run(ExecMode::Serial); });
        const double tp = time_ms(repeats, [&] { ap = run(ExecMode::Parallel); });
        row("posterior draw bounds (S=32)", ts, tp, as == ap);
    }

    // KL dual inner solves across a phi grid.
    {
        ContinuousSetSpec spec;
        for (int i = 0; i < 16; ++i) spec.phi_grid.push_back(-0.75 + 0.1 * i);
        spec.delta = 0.05;
        spec.sample_size = 50000;
        spec.seed = 7;
        spec.sampler = [](double, Rng& rng) { return std::vector<double>{rng.normal()}; };
        spec.b = [](const std::vector<double>& x, double phi, int m) {
            const double v = normal_cdf(x[0] + phi);
            return m == 1 ? v : 1.0 - v;
        };
        KlBound us, up;
        const double ts = time_ms(repeats, [&] { us = dual_extreme_upper(spec, ExecMode::Serial); });
        const double tp =
            time_ms(repeats, [&] { up = dual_extreme_upper(spec, ExecMode::Parallel); });
        row("kl dual sweep (16 phi, 50k draws)", ts, tp, us.value == up.value);
    }

    // Monte Carlo excess risk.
    {
        MonteCarloEstimate ms, mp;
        const double ts = time_ms(repeats, [&] {
            ms = ex7_monte_carlo(Ex7Rule::BayesMinimaxRegret, 0.7, 4000000, 3,
                                 RiskReport::Criterion::Regret, ExecMode::Serial);
        });
        const double tp = time_ms(repeats, [&] {
            mp = ex7_monte_carlo(Ex7Rule::BayesMinimaxRegret, 0.7, 4000000, 3,
                                 RiskReport::Criterion::Regret, ExecMode::Parallel);
        });
        row("limit-experiment monte carlo (4M)", ts, tp,
            ms.estimate == mp.estimate && ms.se == mp.se);
    }
    return 0;
}
