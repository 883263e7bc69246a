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

#include "robustfc/bayes_robust.hpp"

#include <algorithm>
#include <cmath>

#include "robustfc/normal.hpp"
#include "robustfc/rng.hpp"

namespace robustfc {

namespace {

double clip_pos(double x) { return x > 0.0 ? x : 0.0; }

void require_sample(std::size_t n, const char* who) {
    if (n == 0) throw InputError(std::string(who) + ": all posterior draws were skipped");
}

} // namespace

PosteriorDraws draw_posterior(const HistoryDistribution& data, int S, std::uint64_t seed,
                              PosteriorSource source, const std::vector<double>& alpha) {
    data.validate();
    if (S < 1) throw InputError("draw_posterior: S must be >= 1");
    if (data.counts.empty()) throw InputError("draw_posterior: counts required");
    const long long n = data.total_count();
    const std::size_t K = data.probs.size();
    if (source == PosteriorSource::DirichletCustom && alpha.size() != K)
        throw InputError("draw_posterior: custom alpha length mismatch");

    PosteriorDraws out;
    out.source = source;
    out.seed = seed;
    out.draws.resize(S);
    Rng rng(seed);
    if (source == PosteriorSource::Bootstrap) {
        // Zero data breaks resampling; the Dirichlet sources fall back to
        // pure prior draws instead.
        if (n <= 0) throw InputError("draw_posterior: all counts are zero");
        std::vector<double> phat(K);
        for (std::size_t k = 0; k < K; ++k)
            phat[k] = static_cast<double>(data.counts[k]) / static_cast<double>(n);
        for (int s = 0; s < S; ++s) {
            const auto resample = rng.multinomial(n, phat);
            std::vector<double> p(K);
            for (std::size_t k = 0; k < K; ++k)
                p[k] = static_cast<double>(resample[k]) / static_cast<double>(n);
            out.draws[s] = std::move(p);
        }
        return out;
    }
    std::vector<double> a(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        const double prior = (source == PosteriorSource::DirichletFlat) ? 1.0 : alpha[k];
        if (prior <= 0.0) throw InputError("draw_posterior: alpha entries must be positive");
        a[k] = prior + static_cast<double>(data.counts[k]);
    }
    for (int s = 0; s < S; ++s) out.draws[s] = rng.dirichlet(a);
    return out;
}

Decision bayes_minimax_binary(const LossSpec& loss, const BinaryBoundsSample& bs) {
    if (loss.kind != LossSpec::Kind::Binary)
        throw InputError("bayes_minimax_binary: binary loss required");
    require_sample(bs.bounds.size(), "bayes_minimax_binary");
    double mean = 0.0;
    for (const auto& b : bs.bounds) mean += loss.a01 * b.p_lower + loss.a10 * b.p_upper;
    mean /= static_cast<double>(bs.bounds.size());
    return Decision::of_discrete(loss.a01 <= mean ? 1 : 0, std::abs(mean - loss.a01) < kTieTol);
}

Decision bayes_mmr_binary(const LossSpec& loss, const BinaryBoundsSample& bs) {
    if (loss.kind != LossSpec::Kind::Binary)
        throw InputError("bayes_mmr_binary: binary loss required");
    require_sample(bs.bounds.size(), "bayes_mmr_binary");
    const double a = loss.threshold();
    double left = 0.0, right = 0.0;
    for (const auto& b : bs.bounds) {
        left += clip_pos(a - b.p_lower);
        right += clip_pos(b.p_upper - a);
    }
    left /= static_cast<double>(bs.bounds.size());
    right /= static_cast<double>(bs.bounds.size());
    return Decision::of_discrete(left <= right ? 1 : 0, std::abs(left - right) < kTieTol);
}

Decision bayes_minimax_quadratic(const BinaryBoundsSample& bs) {
    require_sample(bs.bounds.size(), "bayes_minimax_quadratic");
    const auto sum = summarize(bs);
    BinaryBounds mean(std::min(sum.mean_lower, sum.mean_upper), // guards rounding
                      std::max(sum.mean_lower, sum.mean_upper));
    return minimax_quadratic(mean);
}

Decision bayes_mmr_quadratic(const BinaryBoundsSample& bs) {
    require_sample(bs.bounds.size(), "bayes_mmr_quadratic");
    const std::size_t S = bs.bounds.size();
    if (S == 1) return mmr_quadratic(bs.bounds[0]).first;

    // Objective mean_s [ (pU-d)^2 1{d < mid_s} + (pL-d)^2 1{d >= mid_s} ] is
    // piecewise quadratic with breakpoints at the S midpoints; each piece's
    // vertex plus all breakpoints and the endpoints cover the minimizer.
    std::vector<double> mids(S);
    for (std::size_t s = 0; s < S; ++s)
        mids[s] = 0.5 * (bs.bounds[s].p_lower + bs.bounds[s].p_upper);
    std::vector<double> knots(mids);
    knots.push_back(0.0);
    knots.push_back(1.0);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    auto objective = [&](double d) {
        double acc = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            const double t = (d < mids[s]) ? (bs.bounds[s].p_upper - d)
                                           : (bs.bounds[s].p_lower - d);
            acc += t * t;
        }
        return acc / static_cast<double>(S);
    };

    double best_d = 0.0, best_v = objective(0.0);
    auto consider = [&](double d) {
        if (d < 0.0 || d > 1.0) return;
        const double v = objective(d);
        if (v < best_v - 1e-18 || (std::abs(v - best_v) <= 1e-18 && d < best_d)) {
            best_v = v;
            best_d = d;
        }
    };
    for (double k : knots) consider(k);
    // On (knots[i], knots[i+1]) the active targets are fixed; the piece is
    // (1/S) sum (target_s - d)^2 with vertex at the mean of the targets.
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double mid = 0.5 * (knots[i] + knots[i + 1]);
        double target = 0.0;
        for (std::size_t s = 0; s < S; ++s)
            target += (mid < mids[s]) ? bs.bounds[s].p_upper : bs.bounds[s].p_lower;
        target /= static_cast<double>(S);
        if (target > knots[i] && target < knots[i + 1]) consider(target);
    }
    return Decision::of_continuous(best_d);
}

Decision bayes_mmr_log(const BinaryBoundsSample& bs) {
    require_sample(bs.bounds.size(), "bayes_mmr_log");
    const std::size_t S = bs.bounds.size();

    bool all_zero = true, all_one = true, all_point = true;
    for (const auto& b : bs.bounds) {
        all_zero = all_zero && (b.p_lower == 0.0 && b.p_upper == 0.0);
        all_one = all_one && (b.p_lower == 1.0 && b.p_upper == 1.0);
        all_point = all_point && b.point();
    }
    if (all_zero) return Decision::of_continuous(0.0);
    if (all_one) return Decision::of_continuous(1.0);
    if (all_point && S == 1) return Decision::of_continuous(bs.bounds[0].p_lower);

    auto objective = [&](double d) {
        double acc = 0.0;
        for (const auto& b : bs.bounds)
            acc += std::max(bernoulli_kl(b.p_lower, d), bernoulli_kl(b.p_upper, d));
        return acc / static_cast<double>(S);
    };
    // Convex in d; golden section on (0,1) to 1e-10.
    const double golden = 0.61803398874989484820;
    double lo = 1e-12, hi = 1.0 - 1e-12;
    double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    while (hi - lo > 1e-10) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = objective(x2);
        }
    }
    return Decision::of_continuous(0.5 * (lo + hi));
}

Decision bayes_classification(const MultinomialBoundsSample& bs, RiskReport::Criterion crit) {
    require_sample(bs.bounds.size(), "bayes_classification");
    const bool use_lower = (crit == RiskReport::Criterion::Risk);
    const std::size_t S = bs.bounds.size();
    std::size_t M1 = 0;
    for (const auto& b : bs.bounds) {
        const auto& v = use_lower ? b.lower : b.regret_gaps;
        if (v.empty()) throw InputError("bayes_classification: bounds side missing in a draw");
        if (M1 == 0) M1 = v.size();
        if (v.size() != M1) throw InputError("bayes_classification: inconsistent outcome count");
    }
    std::vector<double> mean(M1, 0.0);
    for (const auto& b : bs.bounds) {
        const auto& v = use_lower ? b.lower : b.regret_gaps;
        for (std::size_t m = 0; m < M1; ++m) mean[m] += v[m];
    }
    for (auto& x : mean) x /= static_cast<double>(S);
    MultinomialBounds mb;
    if (use_lower) {
        mb.lower = mean;
        return minimax_classification(mb).first;
    }
    mb.regret_gaps = mean;
    return mmr_classification(mb).first;
}

BinarySampleSummary summarize(const BinaryBoundsSample& bs) {
    BinarySampleSummary s;
    s.used = static_cast<int>(bs.bounds.size());
    if (bs.bounds.empty()) return s;
    for (const auto& b : bs.bounds) {
        s.mean_lower += b.p_lower;
        s.mean_upper += b.p_upper;
    }
    s.mean_lower /= static_cast<double>(bs.bounds.size());
    s.mean_upper /= static_cast<double>(bs.bounds.size());
    return s;
}

} // namespace robustfc
