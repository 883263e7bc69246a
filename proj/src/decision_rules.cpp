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

#include "robustfc/decision_rules.hpp"

#include <algorithm>
#include <cmath>

#include "robustfc/normal.hpp"

namespace robustfc {

namespace {

double clip_pos(double x) { return x > 0.0 ? x : 0.0; }

// Smallest argmax / argmin with a tie set at machine tolerance.
std::pair<int, std::vector<int>> arg_extreme(const std::vector<double>& v, bool want_max) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (want_max ? (v[i] > v[best]) : (v[i] < v[best])) best = static_cast<int>(i);
    }
    std::vector<int> ties;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::abs(v[i] - v[best]) < kTieTol) ties.push_back(static_cast<int>(i));
    return {best, ties};
}

} // namespace

LossSpec LossSpec::binary(double a01, double a10) {
    LossSpec l;
    l.kind = Kind::Binary;
    l.a01 = a01;
    l.a10 = a10;
    l.validate();
    return l;
}

LossSpec LossSpec::quadratic() {
    LossSpec l;
    l.kind = Kind::Quadratic;
    return l;
}

LossSpec LossSpec::log_loss() {
    LossSpec l;
    l.kind = Kind::Log;
    return l;
}

LossSpec LossSpec::classification(int num_outcomes) {
    LossSpec l;
    l.kind = Kind::Classification;
    l.num_outcomes = num_outcomes;
    l.validate();
    return l;
}

void LossSpec::validate() const {
    if (kind == Kind::Binary) {
        if (a01 < 0.0 || a10 < 0.0 || a01 + a10 <= 0.0)
            throw InputError("LossSpec: binary loss needs a01, a10 >= 0 and a01+a10 > 0");
    }
    if (kind == Kind::Classification && num_outcomes < 2)
        throw InputError("LossSpec: classification needs at least 2 outcomes");
}

BinaryBounds::BinaryBounds(double lo, double hi) : p_lower(lo), p_upper(hi) {
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi))
        throw InputError("BinaryBounds: need 0 <= p_L <= p_U <= 1");
}

void MultinomialBounds::validate() const {
    double sum = 0.0;
    for (double p : lower) {
        if (p < 0.0 || p > 1.0) throw InputError("MultinomialBounds: lower entry outside [0,1]");
        sum += p;
    }
    if (!lower.empty() && sum > 1.0 + 1e-9)
        throw InputError("MultinomialBounds: lower probabilities sum above 1");
    for (double g : regret_gaps)
        if (g < 0.0 || g > 1.0)
            throw InputError("MultinomialBounds: regret gap outside [0,1]");
}

Decision theta_optimal(const LossSpec& loss, double p) {
    switch (loss.kind) {
        case LossSpec::Kind::Binary: {
            const double a = loss.threshold();
            Decision d = Decision::of_discrete(p >= a ? 1 : 0, std::abs(p - a) < kTieTol);
            return d;
        }
        case LossSpec::Kind::Quadratic:
        case LossSpec::Kind::Log:
            return Decision::of_continuous(p);
        default:
            throw InputError("theta_optimal: classification loss needs a probability vector");
    }
}

Decision theta_optimal(const LossSpec& loss, const std::vector<double>& p) {
    if (loss.kind != LossSpec::Kind::Classification)
        throw InputError("theta_optimal: vector overload is for classification loss");
    if (static_cast<int>(p.size()) != loss.num_outcomes)
        throw InputError("theta_optimal: probability vector length != num_outcomes");
    double sum = 0.0;
    for (double pi : p) sum += pi;
    if (std::abs(sum - 1.0) > 1e-9)
        throw InputError("theta_optimal: probabilities do not sum to 1");
    auto [best, ties] = arg_extreme(p, /*want_max=*/true);
    Decision d = Decision::of_discrete(best, ties.size() > 1);
    d.tie_set = std::move(ties);
    return d;
}

std::pair<Decision, RiskReport> minimax_binary(const LossSpec& loss, const BinaryBounds& b) {
    if (loss.kind != LossSpec::Kind::Binary)
        throw InputError("minimax_binary: binary loss required");
    const double lhs = loss.a01;
    const double rhs = loss.a01 * b.p_lower + loss.a10 * b.p_upper;
    Decision d = Decision::of_discrete(lhs <= rhs ? 1 : 0, std::abs(rhs - lhs) < kTieTol);
    RiskReport r{std::min(loss.a01 * (1.0 - b.p_lower), loss.a10 * b.p_upper),
                 RiskReport::Criterion::Risk};
    return {d, r};
}

std::pair<Decision, RiskReport> minimax_regret_binary(const LossSpec& loss,
                                                      const BinaryBounds& b) {
    if (loss.kind != LossSpec::Kind::Binary)
        throw InputError("minimax_regret_binary: binary loss required");
    const double a = loss.threshold();
    const double left = clip_pos(a - b.p_lower);
    const double right = clip_pos(b.p_upper - a);
    Decision d = Decision::of_discrete(left <= right ? 1 : 0, std::abs(left - right) < kTieTol);
    RiskReport r{(loss.a01 + loss.a10) * std::min(left, right), RiskReport::Criterion::Regret};
    return {d, r};
}

Decision minimax_quadratic(const BinaryBounds& b) {
    double d = 0.5;
    if (b.p_upper <= 0.5) d = b.p_upper;
    else if (b.p_lower >= 0.5) d = b.p_lower;
    return Decision::of_continuous(d);
}

Decision minimax_log(const BinaryBounds& b) {
    // Same value as the quadratic minimax; the clamp also covers the
    // degenerate certainty cases p_U = 0 and p_L = 1.
    return minimax_quadratic(b);
}

std::pair<Decision, RiskReport> mmr_quadratic(const BinaryBounds& b) {
    const double mid = 0.5 * (b.p_lower + b.p_upper);
    const double half = 0.5 * (b.p_upper - b.p_lower);
    return {Decision::of_continuous(mid), {half * half, RiskReport::Criterion::Regret}};
}

Decision mmr_log(const BinaryBounds& b) {
    if (b.point()) return Decision::of_continuous(b.p_lower);
    // Equalizes KL(p_L || d) = KL(p_U || d): the maximum regret over
    // [p_L, p_U] sits at an endpoint and is minimized where they meet.
    const double slope =
        (bernoulli_entropy(b.p_lower) - bernoulli_entropy(b.p_upper)) / (b.p_upper - b.p_lower);
    double d = logistic(slope);
    d = std::clamp(d, b.p_lower, b.p_upper);
    return Decision::of_continuous(d);
}

std::pair<Decision, RiskReport> minimax_classification(const MultinomialBounds& mb) {
    if (mb.lower.empty()) throw InputError("minimax_classification: lower bounds required");
    mb.validate();
    auto [best, ties] = arg_extreme(mb.lower, /*want_max=*/true);
    Decision d = Decision::of_discrete(best, ties.size() > 1);
    d.tie_set = std::move(ties);
    RiskReport r{1.0 - mb.lower[best], RiskReport::Criterion::Risk};
    return {d, r};
}

std::pair<Decision, RiskReport> mmr_classification(const MultinomialBounds& mb) {
    if (mb.regret_gaps.empty()) throw InputError("mmr_classification: regret gaps required");
    mb.validate();
    auto [best, ties] = arg_extreme(mb.regret_gaps, /*want_max=*/false);
    Decision d = Decision::of_discrete(best, ties.size() > 1);
    d.tie_set = std::move(ties);
    RiskReport r{mb.regret_gaps[best], RiskReport::Criterion::Regret};
    return {d, r};
}

} // namespace robustfc
