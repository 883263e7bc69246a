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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "robustfc/limit_experiment.hpp"
#include "robustfc/normal.hpp"

using namespace robustfc;

TEST_CASE("piecewise bounds map") {
    auto b = ex7_bounds(0.25);
    CHECK(b.p_lower == doctest::Approx(0.25));
    CHECK(b.p_upper == doctest::Approx(0.5));
    b = ex7_bounds(0.5);
    CHECK(b.p_lower == doctest::Approx(0.5));
    CHECK(b.p_upper == doctest::Approx(0.5));
    b = ex7_bounds(0.6);
    CHECK(b.p_upper == doctest::Approx(0.7));
    b = ex7_bounds(0.9);
    CHECK(b.p_upper == doctest::Approx(1.0)); // capped
    CHECK_THROWS_AS(ex7_bounds(0.0), InputError);
    CHECK_THROWS_AS(ex7_bounds(1.0), InputError);
}

TEST_CASE("rule decisions at pinned points") {
    CHECK(ex7_decide(Ex7Rule::BayesMinimax, 0.0) == 1);
    CHECK(ex7_decide(Ex7Rule::Plugin, 0.0) == 1); // >= convention
    CHECK(ex7_decide(Ex7Rule::BayesMinimax, -0.2) == 1);
    CHECK(ex7_decide(Ex7Rule::Plugin, -0.2) == 0);
    for (Ex7Rule r : {Ex7Rule::BayesMinimax, Ex7Rule::Plugin, Ex7Rule::BayesMinimaxRegret,
                      Ex7Rule::PosteriorMeanPlugin})
        CHECK(ex7_decide(r, -3.0) == 0);
}

TEST_CASE("thresholds: signs, ordering, and defining equations") {
    const double t_mm = ex7_threshold(Ex7Rule::BayesMinimax);
    const double t_plug = ex7_threshold(Ex7Rule::Plugin);
    const double t_mmr = ex7_threshold(Ex7Rule::BayesMinimaxRegret);
    const double t_dag = ex7_threshold(Ex7Rule::PosteriorMeanPlugin);
    CHECK(t_plug == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(t_mm < 0.0);
    CHECK(t_mmr < 0.0);
    CHECK(t_mm < t_mmr); // minimax accepts more aggressively than regret
    CHECK(t_dag == doctest::Approx(t_mm).epsilon(1e-9));
    // Residual of the defining equation at the root.
    CHECK(std::abs(t_mm * (1.0 + 2.0 * normal_cdf(t_mm)) + 2.0 * normal_pdf(t_mm)) < 1e-10);
}

TEST_CASE("posterior-mean plug-in is equivalent to the bayes minimax rule") {
    for (double h = -8.0; h <= 8.0; h += 0.001)
        CHECK(ex7_decide(Ex7Rule::PosteriorMeanPlugin, h) ==
              ex7_decide(Ex7Rule::BayesMinimax, h));
}

TEST_CASE("bayes minimax predicts 1 on a superset of the plug-in region") {
    for (double h = -8.0; h <= 8.0; h += 0.001)
        CHECK(ex7_decide(Ex7Rule::BayesMinimax, h) >= ex7_decide(Ex7Rule::Plugin, h));
}

TEST_CASE("risk curves: closed form values and shape") {
    Ex7Config cfg;
    auto curves = ex7_excess_risk_curve(cfg);
    REQUIRE(curves.size() == 4);
    const auto grid = cfg.grid();

    for (const auto& c : curves) {
        // Nonnegative, zero at h0 = 0.
        double at_zero = 1e300;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(c.excess[i] >= 0.0);
            if (grid[i] == 0.0) at_zero = c.excess[i];
        }
        CHECK(at_zero == doctest::Approx(0.0));
    }

    // Plug-in curve closed form: 3 h0 Phi(-h0) for h0 >= 0, -h0 Phi(h0) below.
    const auto& plug = curves[1];
    REQUIRE(plug.rule == Ex7Rule::Plugin);
    for (std::size_t i = 0; i < grid.size(); i += 37) {
        const double h0 = grid[i];
        const double expect =
            h0 >= 0.0 ? 3.0 * h0 * normal_cdf(-h0) : -h0 * normal_cdf(h0);
        CHECK(plug.excess[i] == doctest::Approx(expect).epsilon(1e-12));
    }
    // Spot value from the formula: plugin at h0 = 1.
    const std::size_t at_one = std::lround((1.0 + cfg.h0_max) / cfg.h0_step);
    CHECK(plug.excess[at_one] == doctest::Approx(3.0 * normal_cdf(-1.0)).epsilon(1e-12));
    CHECK(plug.excess[at_one] == doctest::Approx(0.476).epsilon(1e-3));
}

TEST_CASE("regret curves: plug-in value at h0 = -1") {
    Ex7Config cfg;
    auto curves = ex7_excess_regret_curve(cfg);
    const auto& plug = curves[1];
    const auto grid = cfg.grid();
    const std::size_t at = std::lround((-1.0 + cfg.h0_max) / cfg.h0_step);
    REQUIRE(grid[at] == doctest::Approx(-1.0));
    CHECK(plug.excess[at] == doctest::Approx(2.0 * normal_cdf(-1.0)).epsilon(1e-12));
    CHECK(plug.excess[at] == doctest::Approx(0.3173).epsilon(1e-3));
}

TEST_CASE("dominance ratios sit in the published ranges") {
    Ex7Config cfg;
    auto risk = ex7_excess_risk_curve(cfg);
    auto regret = ex7_excess_regret_curve(cfg);
    const auto& mm_r = risk[0];
    const auto& plug_r = risk[1];
    const auto& plug_g = regret[1];
    const auto& mmr_g = regret[2];
    const auto& dag_g = regret[3];

    // Integrated risk: bayes_mm about 20% below plug-in.
    const double int_risk_pct = 100.0 * (plug_r.integrated / mm_r.integrated - 1.0);
    CHECK(int_risk_pct > 15.0);
    CHECK(int_risk_pct < 25.0);
    // Max risk: plug-in around 75% above bayes_mm.
    const double max_risk_pct = 100.0 * (plug_r.max_value / mm_r.max_value - 1.0);
    CHECK(max_risk_pct > 60.0);
    CHECK(max_risk_pct < 90.0);
    // Integrated regret: mmr about 8% better than plug-in.
    const double int_reg_pct = 100.0 * (plug_g.integrated / mmr_g.integrated - 1.0);
    CHECK(int_reg_pct > 5.0);
    CHECK(int_reg_pct < 12.0);
    // Max regret: plug-in around 41% above mmr.
    const double max_reg_pct = 100.0 * (plug_g.max_value / mmr_g.max_value - 1.0);
    CHECK(max_reg_pct > 30.0);
    CHECK(max_reg_pct < 50.0);
    // mmr beats the posterior-mean plug-in on both regret summaries.
    const double int_dag_pct = 100.0 * (dag_g.integrated / mmr_g.integrated - 1.0);
    CHECK(int_dag_pct > 1.0);
    CHECK(int_dag_pct < 5.0);
    const double max_dag_pct = 100.0 * (dag_g.max_value / mmr_g.max_value - 1.0);
    CHECK(max_dag_pct > 12.0);
    CHECK(max_dag_pct < 30.0);

    auto table = ex7_ratio_table(regret);
    CHECK(table.size() == 12);
}

TEST_CASE("monte carlo agrees with the analytic curves within 3 SE") {
    const long long reps = 200000;
    for (Ex7Rule rule : {Ex7Rule::BayesMinimax, Ex7Rule::Plugin, Ex7Rule::BayesMinimaxRegret}) {
        const double t = ex7_threshold(rule);
        for (double h0 : {-3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0}) {
            for (auto crit : {RiskReport::Criterion::Risk, RiskReport::Criterion::Regret}) {
                auto mc = ex7_monte_carlo(rule, h0, reps, 42, crit);
                const bool regret = crit == RiskReport::Criterion::Regret;
                double analytic;
                if (h0 >= 0.0)
                    analytic = (regret ? 4.0 : 3.0) * h0 * normal_cdf(t - h0);
                else
                    analytic = (regret ? -2.0 : -1.0) * h0 * normal_cdf(h0 - t);
                if (h0 == 0.0) {
                    CHECK(mc.estimate == 0.0);
                    CHECK(mc.se == 0.0);
                } else {
                    CHECK(std::abs(mc.estimate - analytic) <= 3.0 * mc.se);
                }
            }
        }
    }
}

TEST_CASE("monte carlo is deterministic and mode-independent") {
    auto a = ex7_monte_carlo(Ex7Rule::Plugin, 0.7, 100000, 11, RiskReport::Criterion::Risk,
                             ExecMode::Parallel);
    auto b = ex7_monte_carlo(Ex7Rule::Plugin, 0.7, 100000, 11, RiskReport::Criterion::Risk,
                             ExecMode::Serial);
    CHECK(a.estimate == b.estimate);
    CHECK(a.se == b.se);
}

TEST_CASE("config validation") {
    Ex7Config cfg;
    cfg.h0_step = -1.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    Ex7Config cfg2;
    cfg2.rules.clear();
    CHECK_THROWS_AS(cfg2.validate(), InputError);
    Ex7Config ok;
    CHECK(ok.grid().size() == 1601);
}
