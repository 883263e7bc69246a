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

#include "robustfc/limit_experiment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robustfc/normal.hpp"
#include "robustfc/rng.hpp"

namespace robustfc {

namespace {

// Truncated-normal moments of h ~ N(hhat, 1):
//   E[(h)_+]  = hhat Phi(hhat) + phi(hhat)
//   E[(-h)_+] = -hhat Phi(-hhat) + phi(hhat)
double mean_pos(double hhat) { return hhat * normal_cdf(hhat) + normal_pdf(hhat); }
double mean_neg(double hhat) { return -hhat * normal_cdf(-hhat) + normal_pdf(hhat); }

// Margin functions: d = 1 iff margin >= 0. Each is written from its defining
// display, so the equivalence of PosteriorMeanPlugin and BayesMinimax is a
// checked property rather than a construction.
double margin(Ex7Rule rule, double hhat) {
    switch (rule) {
        case Ex7Rule::BayesMinimax:
            // 1 <= E[p_L + p_U | hhat]: hhat + 2 hhat Phi(hhat) + 2 phi(hhat) >= 0.
            return hhat * (1.0 + 2.0 * normal_cdf(hhat)) + 2.0 * normal_pdf(hhat);
        case Ex7Rule::Plugin:
            return hhat;
        case Ex7Rule::BayesMinimaxRegret:
            // E[(1/2 - p_L)_+] <= E[(p_U - 1/2)_+]: 2 E[(h)_+] - E[(-h)_+] >= 0.
            return 2.0 * mean_pos(hhat) - mean_neg(hhat);
        case Ex7Rule::PosteriorMeanPlugin:
            // (1/2 - E p_L)_+ <= (E p_U - 1/2)_+ with E p_L = 1/2 + hhat/sqrt(n),
            // E p_U = 1/2 + 2 E[(h)_+]/sqrt(n); scale-free margin below.
            return std::max(2.0 * mean_pos(hhat), 0.0) - std::max(-hhat, 0.0);
    }
    return 0.0;
}

} // namespace

const char* ex7_rule_name(Ex7Rule rule) {
    switch (rule) {
        case Ex7Rule::BayesMinimax: return "bayes_mm";
        case Ex7Rule::Plugin: return "plugin";
        case Ex7Rule::BayesMinimaxRegret: return "bayes_mmr";
        case Ex7Rule::PosteriorMeanPlugin: return "posterior_mean_plugin";
    }
    return "?";
}

std::vector<double> Ex7Config::grid() const {
    std::vector<double> g;
    const long long half = static_cast<long long>(std::round(h0_max / h0_step));
    g.reserve(2 * half + 1);
    for (long long i = -half; i <= half; ++i) g.push_back(static_cast<double>(i) * h0_step);
    return g;
}

void Ex7Config::validate() const {
    if (!(h0_step > 0.0) || !(h0_max > 0.0)) throw InputError("Ex7Config: bad grid");
    if (rules.empty()) throw InputError("Ex7Config: no rules selected");
}

BinaryBounds ex7_bounds(double P) {
    if (!(P > 0.0 && P < 1.0)) throw InputError("ex7_bounds: P must lie in (0,1)");
    const double p_upper = (P < 0.5) ? 0.5 : std::min(2.0 * P - 0.5, 1.0);
    return BinaryBounds(P, p_upper);
}

int ex7_decide(Ex7Rule rule, double hhat) { return margin(rule, hhat) >= 0.0 ? 1 : 0; }

double ex7_threshold(Ex7Rule rule, double root_tol) {
    // Scan [-10,10] for sign changes of the margin; exactly one up-crossing
    // is required (acceptance region must be a half-line [hhat*, inf)).
    const int n = 400;
    double lo = 0.0, hi = 0.0;
    int changes = 0;
    bool down_crossing = false;
    double prev_x = -10.0, prev_f = margin(rule, prev_x);
    for (int i = 1; i <= n; ++i) {
        const double x = -10.0 + 20.0 * i / n;
        const double f = margin(rule, x);
        if (prev_f < 0.0 && f >= 0.0) {
            ++changes;
            lo = prev_x;
            hi = x;
        } else if (prev_f >= 0.0 && f < 0.0) {
            down_crossing = true;
        }
        prev_x = x;
        prev_f = f;
    }
    if (changes != 1 || down_crossing)
        throw NumericalError(std::string("ex7_threshold: rule ") + ex7_rule_name(rule) +
                             " is not a single-crossing threshold rule (" +
                             std::to_string(changes) + " up-crossings" +
                             (down_crossing ? ", has down-crossing" : "") + ")");
    while (hi - lo > root_tol) {
        const double mid = 0.5 * (lo + hi);
        if (margin(rule, mid) >= 0.0) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

double excess_at(double h0, double threshold, bool regret) {
    if (h0 >= 0.0) {
        const double p_d0 = normal_cdf(threshold - h0);
        return (regret ? 4.0 : 3.0) * h0 * p_d0;
    }
    const double p_d1 = normal_cdf(h0 - threshold);
    return (regret ? -2.0 : -1.0) * h0 * p_d1;
}

std::vector<RuleCurve> curves_impl(const Ex7Config& cfg, bool regret, ExecMode mode) {
    cfg.validate();
    const std::vector<double> grid = cfg.grid();
    std::vector<RuleCurve> out(cfg.rules.size());
    for (std::size_t k = 0; k < cfg.rules.size(); ++k) {
        RuleCurve& c = out[k];
        c.rule = cfg.rules[k];
        c.threshold = ex7_threshold(c.rule, cfg.root_tol);
        c.excess.assign(grid.size(), 0.0);
        parallel_for(grid.size(), mode,
                     [&](std::size_t i) { c.excess[i] = excess_at(grid[i], c.threshold, regret); });
        double integral = 0.0, maxv = 0.0;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            integral += 0.5 * (c.excess[i] + c.excess[i + 1]) * (grid[i + 1] - grid[i]);
        for (double v : c.excess) maxv = std::max(maxv, v);
        c.integrated = integral;
        c.max_value = maxv;
    }
    return out;
}

} // namespace

std::vector<RuleCurve> ex7_excess_risk_curve(const Ex7Config& cfg, ExecMode mode) {
    return curves_impl(cfg, /*regret=*/false, mode);
}

std::vector<RuleCurve> ex7_excess_regret_curve(const Ex7Config& cfg, ExecMode mode) {
    return curves_impl(cfg, /*regret=*/true, mode);
}

MonteCarloEstimate ex7_monte_carlo(Ex7Rule rule, double h0, long long reps, std::uint64_t seed,
                                   RiskReport::Criterion criterion, ExecMode mode) {
    if (reps < 1) throw InputError("ex7_monte_carlo: reps must be >= 1");
    const bool regret = (criterion == RiskReport::Criterion::Regret);
    const long long chunk = 65536;
    const long long nchunks = (reps + chunk - 1) / chunk;
    std::vector<double> sums(nchunks, 0.0), sums2(nchunks, 0.0);
    Rng master(seed);
    std::vector<Rng> rngs;
    rngs.reserve(nchunks);
    for (long long c = 0; c < nchunks; ++c) rngs.push_back(master.split(c));

    parallel_for(static_cast<std::size_t>(nchunks), mode, [&](std::size_t c) {
        Rng rng = rngs[c];
        const long long begin = static_cast<long long>(c) * chunk;
        const long long end = std::min(begin + chunk, reps);
        double s = 0.0, s2 = 0.0;
        for (long long i = begin; i < end; ++i) {
            const double hhat = h0 + rng.normal();
            const int d = ex7_decide(rule, hhat);
            double x = 0.0;
            if (h0 >= 0.0) x = (d == 0) ? (regret ? 4.0 : 3.0) * h0 : 0.0;
            else x = (d == 1) ? (regret ? -2.0 : -1.0) * h0 : 0.0;
            s += x;
            s2 += x * x;
        }
        sums[c] = s;
        sums2[c] = s2;
    });
    double total = 0.0, total2 = 0.0;
    for (long long c = 0; c < nchunks; ++c) {
        total += sums[c];
        total2 += sums2[c];
    }
    MonteCarloEstimate out;
    const double n = static_cast<double>(reps);
    out.estimate = total / n;
    const double var = std::max(total2 / n - out.estimate * out.estimate, 0.0);
    out.se = std::sqrt(var / n);
    return out;
}

std::vector<RatioEntry> ex7_ratio_table(const std::vector<RuleCurve>& curves) {
    std::vector<RatioEntry> out;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        for (std::size_t j = 0; j < curves.size(); ++j) {
            if (i == j) continue;
            RatioEntry e;
            e.a = curves[i].rule;
            e.b = curves[j].rule;
            e.integrated_pct = 100.0 * (curves[i].integrated / curves[j].integrated - 1.0);
            e.max_pct = 100.0 * (curves[i].max_value / curves[j].max_value - 1.0);
            out.push_back(e);
        }
    }
    return out;
}

} // namespace robustfc
