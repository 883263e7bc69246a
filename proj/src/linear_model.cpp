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

#include "robustfc/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace robustfc {

namespace {

constexpr double kGolden = 0.61803398874989484820;
constexpr double kNegBig = -1e300;
constexpr double kPosBig = 1e300;

LpProblem primal_lp(const Matrix& G, const std::vector<double>& r,
                    const std::vector<double>& objective, bool maximize) {
    const std::size_t K = G.size();
    const std::size_t L = objective.size();
    LpProblem p;
    p.objective = objective;
    p.rows = G;
    p.rhs = r;
    p.rows.push_back(std::vector<double>(L, 1.0)); // simplex mass constraint
    p.rhs.push_back(1.0);
    p.senses.assign(K + 1, LpProblem::Sense::EQ);
    p.direction = maximize ? LpProblem::Direction::Maximize : LpProblem::Direction::Minimize;
    return p;
}

Matrix checked_G(const LinearSetSpec& spec, double phi) {
    Matrix G = spec.build_G(phi);
    if (G.size() != spec.r.size())
        throw InputError("LinearSetSpec: build_G row count != length of r");
    for (const auto& row : G)
        if (static_cast<int>(row.size()) != spec.support_size)
            throw InputError("LinearSetSpec: build_G width != support_size");
    if (spec.history_model) {
        // Columns must be probability vectors over histories.
        for (int l = 0; l < spec.support_size; ++l) {
            double colsum = 0.0;
            for (const auto& row : G) {
                if (row[l] < -1e-12)
                    throw InputError("LinearSetSpec: negative history probability");
                colsum += row[l];
            }
            if (std::abs(colsum - 1.0) > 1e-9)
                throw InputError("LinearSetSpec: history column does not sum to 1");
        }
    }
    return G;
}

std::vector<double> checked_b(const LinearSetSpec& spec, double phi, int m) {
    std::vector<double> b = spec.build_b(phi, m);
    if (static_cast<int>(b.size()) != spec.support_size)
        throw InputError("LinearSetSpec: build_b length != support_size");
    return b;
}

// Golden-section search for the extremum of value(phi) inside [lo, hi].
// Infeasible probes count as -inf (max) / +inf (min); the bracket comes from
// a grid cell around an already-feasible best point, so the search is local.
template <typename F>
double golden_opt(F&& value, double lo, double hi, double width, bool want_max) {
    double a = lo, b = hi;
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = value(x1), f2 = value(x2);
    double best = std::max(f1, f2);
    if (!want_max) best = std::min(f1, f2);
    while (b - a > width) {
        const bool keep_left = want_max ? (f1 >= f2) : (f1 <= f2);
        if (keep_left) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = value(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = value(x2);
        }
        best = want_max ? std::max(best, std::max(f1, f2)) : std::min(best, std::min(f1, f2));
    }
    return best;
}

struct GridScan {
    std::vector<InnerInterval> values;
    bool any_feasible = false;
};

GridScan scan_grid(const LinearSetSpec& spec, int objective_outcome,
                   const SolveOptions& options) {
    GridScan out;
    out.values.resize(spec.phi_grid.size());
    parallel_for(spec.phi_grid.size(), options.mode, [&](std::size_t i) {
        const double phi = spec.phi_grid[i];
        out.values[i] = inner_interval(spec, phi, checked_b(spec, phi, objective_outcome),
                                       options);
    });
    for (const auto& v : out.values) out.any_feasible = out.any_feasible || v.feasible;
    return out;
}

} // namespace

void LinearSetSpec::validate() const {
    if (phi_grid.empty()) throw InputError("LinearSetSpec: empty phi grid");
    if (support_size <= 0) throw InputError("LinearSetSpec: support_size must be positive");
    if (num_outcomes < 2) throw InputError("LinearSetSpec: need at least 2 outcomes");
    if (!build_G || !build_b) throw InputError("LinearSetSpec: missing callbacks");
    if (r.empty()) throw InputError("LinearSetSpec: empty moment target r");
    if (history_model) {
        double sum = 0.0;
        for (double ri : r) {
            if (ri < 0.0) throw InputError("LinearSetSpec: negative entry in r");
            sum += ri;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw InputError("LinearSetSpec: history-model r does not sum to 1");
    }
}

InnerInterval inner_interval(const LinearSetSpec& spec, double phi,
                             const std::vector<double>& objective,
                             const SolveOptions& options) {
    const Matrix G = checked_G(spec, phi);

    const LpSolution up_primal = solve_lp(primal_lp(G, spec.r, objective, /*maximize=*/true));
    const LpSolution lo_primal = solve_lp(primal_lp(G, spec.r, objective, /*maximize=*/false));

    // Dualized route: inner sup -> inf-form program, inner inf -> sup form.
    // An infeasible primal must show up as an unbounded dual.
    const LpSolution up_dual = solve_lp(dualize_sup(G, spec.r, objective, false).to_lp());
    const LpSolution lo_dual = solve_lp(dualize_sup(G, spec.r, objective, true).to_lp());

    const bool feas_primal = up_primal.optimal();
    const bool feas_dual = up_dual.optimal();
    if (feas_primal != feas_dual || feas_primal != lo_primal.optimal() ||
        feas_dual != lo_dual.optimal())
        throw NumericalError("inner_interval: primal/dual feasibility disagree at phi=" +
                             std::to_string(phi));
    InnerInterval out;
    out.feasible = feas_primal;
    if (!out.feasible) return out;

    if (std::abs(up_primal.value - up_dual.value) > options.cross_check_tol ||
        std::abs(lo_primal.value - lo_dual.value) > options.cross_check_tol)
        throw NumericalError(
            "inner_interval: primal/dual value mismatch at phi=" + std::to_string(phi) +
            " (sup " + std::to_string(up_primal.value) + " vs " + std::to_string(up_dual.value) +
            ", inf " + std::to_string(lo_primal.value) + " vs " + std::to_string(lo_dual.value) +
            ")");

    out.hi = up_primal.value;
    out.lo = lo_primal.value;
    return out;
}

bool phi_feasible(const LinearSetSpec& spec, double phi) {
    const Matrix G = checked_G(spec, phi);
    const std::vector<double> zero(spec.support_size, 0.0);
    return solve_lp(primal_lp(G, spec.r, zero, true)).optimal();
}

BinaryBounds extreme_probs_binary(const LinearSetSpec& spec, const SolveOptions& options) {
    spec.validate();
    if (spec.num_outcomes != 2)
        throw InputError("extreme_probs_binary: spec is not binary");

    const GridScan scan = scan_grid(spec, 1, options);
    if (!scan.any_feasible)
        throw EmptyIdentifiedSet("extreme_probs_binary: empty identified set (no feasible phi)");

    double p_lo = kPosBig, p_hi = kNegBig;
    std::size_t arg_lo = 0, arg_hi = 0;
    for (std::size_t i = 0; i < scan.values.size(); ++i) {
        const auto& v = scan.values[i];
        if (!v.feasible) continue;
        if (v.lo < p_lo) { p_lo = v.lo; arg_lo = i; }
        if (v.hi > p_hi) { p_hi = v.hi; arg_hi = i; }
    }

    if (options.refine && spec.phi_grid.size() > 1) {
        auto bracket = [&](std::size_t i) {
            const std::size_t a = (i == 0) ? 0 : i - 1;
            const std::size_t b = std::min(i + 1, spec.phi_grid.size() - 1);
            return std::make_pair(spec.phi_grid[a], spec.phi_grid[b]);
        };
        auto hi_at = [&](double phi) {
            const auto v = inner_interval(spec, phi, checked_b(spec, phi, 1), options);
            return v.feasible ? v.hi : kNegBig;
        };
        auto lo_at = [&](double phi) {
            const auto v = inner_interval(spec, phi, checked_b(spec, phi, 1), options);
            return v.feasible ? v.lo : kPosBig;
        };
        const auto [ha, hb] = bracket(arg_hi);
        p_hi = std::max(p_hi, golden_opt(hi_at, ha, hb, options.refine_width, true));
        const auto [la, lb] = bracket(arg_lo);
        p_lo = std::min(p_lo, golden_opt(lo_at, la, lb, options.refine_width, false));
    }

    if (p_hi > 1.0 + 1e-6 || p_lo < -1e-6)
        throw NumericalError("extreme_probs_binary: probability bound escapes [0,1]");
    return BinaryBounds(std::clamp(p_lo, 0.0, 1.0), std::clamp(p_hi, 0.0, 1.0));
}

MultinomialBounds extreme_probs_multinomial(const LinearSetSpec& spec,
                                            const SolveOptions& options) {
    spec.validate();
    const int M1 = spec.num_outcomes;
    MultinomialBounds out;
    out.lower.assign(M1, 0.0);
    out.regret_gaps.assign(M1, 0.0);

    for (int m = 0; m < M1; ++m) {
        const GridScan scan = scan_grid(spec, m, options);
        if (!scan.any_feasible)
            throw EmptyIdentifiedSet("extreme_probs_multinomial: empty identified set");
        double lo = kPosBig;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < scan.values.size(); ++i)
            if (scan.values[i].feasible && scan.values[i].lo < lo) { lo = scan.values[i].lo; arg = i; }
        if (options.refine && spec.phi_grid.size() > 1) {
            const std::size_t a = (arg == 0) ? 0 : arg - 1;
            const std::size_t b = std::min(arg + 1, spec.phi_grid.size() - 1);
            auto lo_at = [&](double phi) {
                const auto v = inner_interval(spec, phi, checked_b(spec, phi, m), options);
                return v.feasible ? v.lo : kPosBig;
            };
            lo = std::min(lo, golden_opt(lo_at, spec.phi_grid[a], spec.phi_grid[b],
                                         options.refine_width, false));
        }
        if (lo < -1e-6 || lo > 1.0 + 1e-6)
            throw NumericalError("extreme_probs_multinomial: lower bound escapes [0,1]");
        out.lower[m] = std::clamp(lo, 0.0, 1.0);
    }

    // Delta p_m = max over m' of sup of (b_{m'} - b_m)' pi; m'=m contributes 0.
    for (int m = 0; m < M1; ++m) {
        double gap = 0.0;
        for (int mp = 0; mp < M1; ++mp) {
            if (mp == m) continue;
            double best = kNegBig;
            std::size_t arg = 0;
            std::vector<InnerInterval> vals(spec.phi_grid.size());
            parallel_for(spec.phi_grid.size(), options.mode, [&](std::size_t i) {
                const double phi = spec.phi_grid[i];
                std::vector<double> diff = checked_b(spec, phi, mp);
                const std::vector<double> bm = checked_b(spec, phi, m);
                for (int l = 0; l < spec.support_size; ++l) diff[l] -= bm[l];
                vals[i] = inner_interval(spec, phi, diff, options);
            });
            for (std::size_t i = 0; i < vals.size(); ++i)
                if (vals[i].feasible && vals[i].hi > best) { best = vals[i].hi; arg = i; }
            if (best == kNegBig) continue;
            if (options.refine && spec.phi_grid.size() > 1) {
                const std::size_t a = (arg == 0) ? 0 : arg - 1;
                const std::size_t b = std::min(arg + 1, spec.phi_grid.size() - 1);
                auto hi_at = [&](double phi) {
                    std::vector<double> diff = checked_b(spec, phi, mp);
                    const std::vector<double> bm = checked_b(spec, phi, m);
                    for (int l = 0; l < spec.support_size; ++l) diff[l] -= bm[l];
                    const auto v = inner_interval(spec, phi, diff, options);
                    return v.feasible ? v.hi : kNegBig;
                };
                best = std::max(best, golden_opt(hi_at, spec.phi_grid[a], spec.phi_grid[b],
                                                 options.refine_width, true));
            }
            gap = std::max(gap, best);
        }
        out.regret_gaps[m] = std::min(gap, 1.0);
    }
    return out;
}

FeasibleInterval feasible_phi_interval(const LinearSetSpec& spec, const SolveOptions& options) {
    spec.validate();
    if (!std::is_sorted(spec.phi_grid.begin(), spec.phi_grid.end()))
        throw InputError("feasible_phi_interval: phi grid must be sorted");

    std::vector<char> feas(spec.phi_grid.size(), 0);
    parallel_for(spec.phi_grid.size(), options.mode,
                 [&](std::size_t i) { feas[i] = phi_feasible(spec, spec.phi_grid[i]) ? 1 : 0; });

    FeasibleInterval out;
    std::size_t first = feas.size(), last = feas.size();
    for (std::size_t i = 0; i < feas.size(); ++i) {
        if (feas[i]) {
            if (first == feas.size()) first = i;
            last = i;
        }
    }
    if (first == feas.size()) return out; // empty

    auto bisect = [&](double good, double bad) {
        while (std::abs(bad - good) > options.refine_width) {
            const double mid = 0.5 * (good + bad);
            if (phi_feasible(spec, mid)) good = mid;
            else bad = mid;
        }
        return good;
    };

    out.empty = false;
    out.lo = spec.phi_grid[first];
    if (first > 0) out.lo = bisect(spec.phi_grid[first], spec.phi_grid[first - 1]);
    out.hi = spec.phi_grid[last];
    if (last + 1 < spec.phi_grid.size())
        out.hi = bisect(spec.phi_grid[last], spec.phi_grid[last + 1]);
    return out;
}

std::vector<ProfileRow> profile_bounds(const LinearSetSpec& spec, int outcome,
                                       const SolveOptions& options) {
    spec.validate();
    if (outcome < 0 || outcome >= spec.num_outcomes)
        throw InputError("profile_bounds: outcome index out of range");
    const GridScan scan = scan_grid(spec, outcome, options);
    std::vector<ProfileRow> rows;
    rows.reserve(scan.values.size());
    for (std::size_t i = 0; i < scan.values.size(); ++i)
        if (scan.values[i].feasible)
            rows.push_back({spec.phi_grid[i], scan.values[i].lo, scan.values[i].hi});
    return rows;
}

} // namespace robustfc
