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

#include "robustfc/divergence_dual.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robustfc/errors.hpp"
#include "robustfc/rng.hpp"

namespace robustfc {

namespace {

constexpr double kLogEtaMin = -18.420680743952367; // log(1e-8)
constexpr double kLogEtaMax = 18.420680743952367;  // log(1e8)
constexpr double kGradTol = 1e-6;
constexpr int kMaxIters = 500;

// Physicists' Gauss-Hermite nodes/weights (weight e^{-x^2}); Newton on the
// orthonormal recurrence, the usual construction.
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const double pim4 = 0.7511255444649425; // pi^{-1/4}
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0) z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1) z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2) z = 1.86 * z - 0.86 * x[n - 1];
        else if (i == 3) z = 1.91 * z - 0.91 * x[n - 2];
        else z = 2.0 * z - x[n - i + 1];
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-14) break;
        }
        x[n - 1 - i] = z;
        x[i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
}

// J(zeta, mu) = eta * log sum_i w_i e^{s_i/eta} + eta*delta with s_i = b_i +
// mu'(g_i - r) and eta = e^zeta. Gradient: dJ/dmu_k = E_p[g_k - r_k] under the
// tilted weights p_i, and dJ/dzeta = J - E_p[s] (Gibbs identity).
struct DualObjective {
    const DualAtoms& atoms;
    const std::vector<double>& r;
    double delta;
    int K;

    double eval(const std::vector<double>& z, std::vector<double>& grad) const {
        const double eta = std::exp(z[0]);
        const std::size_t N = atoms.b.size();
        double smax = -1e308;
        std::vector<double> s(N);
        for (std::size_t i = 0; i < N; ++i) {
            double si = atoms.b[i];
            for (int k = 0; k < K; ++k) si += z[k + 1] * (atoms.g[i][k] - r[k]);
            s[i] = si;
            smax = std::max(smax, si);
        }
        double mass = 0.0;
        for (std::size_t i = 0; i < N; ++i) mass += atoms.w[i] * std::exp((s[i] - smax) / eta);
        const double value = smax + eta * std::log(mass) + eta * delta;

        double s_dot = 0.0;
        std::vector<double> gbar(K, 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            const double p = atoms.w[i] * std::exp((s[i] - smax) / eta) / mass;
            s_dot += p * s[i];
            for (int k = 0; k < K; ++k) gbar[k] += p * (atoms.g[i][k] - r[k]);
        }
        grad.assign(K + 1, 0.0);
        grad[0] = value - s_dot;
        for (int k = 0; k < K; ++k) grad[k + 1] = gbar[k];
        return value;
    }

    // eta -> 0 limit: essential supremum of s at the given mu.
    double ess_sup(const std::vector<double>& z) const {
        double m = -1e308;
        for (std::size_t i = 0; i < atoms.b.size(); ++i) {
            double si = atoms.b[i];
            for (int k = 0; k < K; ++k) si += z[k + 1] * (atoms.g[i][k] - r[k]);
            m = std::max(m, si);
        }
        return m;
    }
};

// Gradient components whose descent direction would leave the eta box are
// frozen: at the lower bound descent on g > 0 points down and is blocked,
// at the upper bound descent on g < 0 points up and is blocked.
double projected_norm(const std::vector<double>& z, const std::vector<double>& g) {
    double n = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        double gi = g[i];
        if (i == 0) {
            if (z[0] <= kLogEtaMin + 1e-12 && gi > 0.0) gi = 0.0;
            if (z[0] >= kLogEtaMax - 1e-12 && gi < 0.0) gi = 0.0;
        }
        n = std::max(n, std::abs(gi));
    }
    return n;
}

DualInnerResult minimize_dual(const DualAtoms& atoms, const std::vector<double>& r,
                              double delta) {
    const int K = static_cast<int>(r.size());
    const int d = K + 1;
    DualObjective f{atoms, r, delta, K};

    // Weak duality: for any feasible measure, J(eta, mu) >= E[b] >= min b at
    // every (eta, mu). A trajectory value below that proves infeasibility.
    double bmin = 1e308;
    for (double bi : atoms.b) bmin = std::min(bmin, bi);
    const double diverged_below = bmin - 0.5;

    std::vector<double> z(d, 0.0);
    std::vector<double> grad, grad_new;
    double value = f.eval(z, grad);

    std::vector<std::vector<double>> H(d, std::vector<double>(d, 0.0));
    for (int i = 0; i < d; ++i) H[i][i] = 1.0;
    auto reset_H = [&] {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) H[i][j] = (i == j) ? 1.0 : 0.0;
    };

    DualInnerResult out;
    int it = 0;
    for (; it < kMaxIters; ++it) {
        if (projected_norm(z, grad) <= kGradTol) break;
        if (value < diverged_below) {
            out.feasible = false;
            out.value = value;
            out.iterations = it;
            return out;
        }
        std::vector<double> p(d, 0.0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) p[i] -= H[i][j] * grad[j];
        double slope = 0.0;
        for (int i = 0; i < d; ++i) slope += p[i] * grad[i];
        if (slope > -1e-18) {
            reset_H();
            for (int i = 0; i < d; ++i) p[i] = -grad[i];
            slope = 0.0;
            for (int i = 0; i < d; ++i) slope += p[i] * grad[i];
            if (slope > -1e-18) break;
        }
        double step = 1.0;
        std::vector<double> z_new(d);
        double value_new = value;
        bool moved = false, clipped = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (int i = 0; i < d; ++i) z_new[i] = z[i] + step * p[i];
            clipped = false;
            if (z_new[0] < kLogEtaMin) { z_new[0] = kLogEtaMin; clipped = true; }
            if (z_new[0] > kLogEtaMax) { z_new[0] = kLogEtaMax; clipped = true; }
            value_new = f.eval(z_new, grad_new);
            if (value_new <= value + 1e-4 * step * slope) {
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
        std::vector<double> sdiff(d), ydiff(d);
        for (int i = 0; i < d; ++i) {
            sdiff[i] = z_new[i] - z[i];
            ydiff[i] = grad_new[i] - grad[i];
        }
        double sy = 0.0;
        for (int i = 0; i < d; ++i) sy += sdiff[i] * ydiff[i];
        if (clipped) {
            reset_H();
        } else if (sy > 1e-12) {
            const double rho = 1.0 / sy;
            std::vector<double> Hy(d, 0.0);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) Hy[i] += H[i][j] * ydiff[j];
            double yHy = 0.0;
            for (int i = 0; i < d; ++i) yHy += ydiff[i] * Hy[i];
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    H[i][j] += (1.0 + rho * yHy) * rho * sdiff[i] * sdiff[j] -
                               rho * (Hy[i] * sdiff[j] + sdiff[i] * Hy[j]);
        }
        z = z_new;
        grad = grad_new;
        value = value_new;
    }

    if (value < diverged_below) {
        out.feasible = false;
        out.value = value;
        out.iterations = it;
        return out;
    }
    if (projected_norm(z, grad) > kGradTol)
        throw NumericalError("dual_inner_min: gradient norm " +
                             std::to_string(projected_norm(z, grad)) + " after " +
                             std::to_string(it) + " iterations");

    const double ess = f.ess_sup(z);
    if (ess < value) value = ess;

    out.value = value;
    out.eta = std::exp(z[0]);
    out.mu.assign(z.begin() + 1, z.end());
    out.iterations = it;

    // Plug-in delta-method SE at fixed (eta, mu) for Monte Carlo atoms.
    if (atoms.monte_carlo && atoms.sample_count > 0) {
        const double eta = out.eta;
        const std::size_t N = atoms.b.size();
        double smax = -1e308;
        std::vector<double> s(N);
        for (std::size_t i = 0; i < N; ++i) {
            s[i] = atoms.b[i];
            for (int k = 0; k < K; ++k) s[i] += z[k + 1] * (atoms.g[i][k] - r[k]);
            smax = std::max(smax, s[i]);
        }
        double mean = 0.0, mean2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double q = std::exp((s[i] - smax) / eta);
            mean += atoms.w[i] * q;
            mean2 += atoms.w[i] * q * q;
        }
        const double var = std::max(mean2 - mean * mean, 0.0);
        out.se = eta * std::sqrt(var / static_cast<double>(atoms.sample_count)) / mean;
    }
    return out;
}

} // namespace

void ContinuousSetSpec::validate() const {
    if (phi_grid.empty()) throw InputError("ContinuousSetSpec: empty phi grid");
    if (num_outcomes < 2) throw InputError("ContinuousSetSpec: need >= 2 outcomes");
    if (delta < 0.0) throw InputError("ContinuousSetSpec: delta must be >= 0");
    if (num_moments > 0 && static_cast<int>(r.size()) != num_moments)
        throw InputError("ContinuousSetSpec: r length != num_moments");
    if (num_moments > 0 && !g) throw InputError("ContinuousSetSpec: g callback missing");
    if (!b) throw InputError("ContinuousSetSpec: b callback missing");
    if (quadrature_points > 0) {
        if (!normal_ref)
            throw InputError("ContinuousSetSpec: quadrature needs a normal reference");
    } else if (!sampler) {
        throw InputError("ContinuousSetSpec: sampler missing");
    }
    if (quadrature_points == 0 && sample_size < 2)
        throw InputError("ContinuousSetSpec: sample_size too small");
}

DualAtoms build_atoms(const ContinuousSetSpec& spec, double phi, int outcome) {
    DualAtoms atoms;
    const int K = spec.num_moments;
    if (spec.quadrature_points > 0) {
        std::vector<double> t, w;
        gauss_hermite(spec.quadrature_points, t, w);
        const auto [mean, sd] = spec.normal_ref(phi);
        const double norm = 1.0 / std::sqrt(M_PI);
        atoms.monte_carlo = false;
        atoms.sample_count = 0;
        atoms.w.resize(t.size());
        atoms.b.resize(t.size());
        atoms.g.resize(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            const std::vector<double> x{mean + std::sqrt(2.0) * sd * t[i]};
            atoms.w[i] = w[i] * norm;
            atoms.b[i] = spec.b(x, phi, outcome);
            atoms.g[i] = (K > 0) ? spec.g(x, phi) : std::vector<double>{};
            if (static_cast<int>(atoms.g[i].size()) != K)
                throw InputError("build_atoms: g returned wrong length");
        }
        return atoms;
    }
    // Master seed split per phi index: every outcome at the same phi sees the
    // same draws, so objective differences have no extra sampling noise.
    std::uint64_t phi_stream = 0;
    for (std::size_t i = 0; i < spec.phi_grid.size(); ++i)
        if (spec.phi_grid[i] == phi) { phi_stream = i + 1; break; }
    Rng rng = Rng(spec.seed).split(phi_stream);
    const int N = spec.sample_size;
    atoms.sample_count = N;
    atoms.w.assign(N, 1.0 / N);
    atoms.b.resize(N);
    atoms.g.resize(N);
    for (int i = 0; i < N; ++i) {
        const std::vector<double> x = spec.sampler(phi, rng);
        atoms.b[i] = spec.b(x, phi, outcome);
        atoms.g[i] = (K > 0) ? spec.g(x, phi) : std::vector<double>{};
        if (static_cast<int>(atoms.g[i].size()) != K)
            throw InputError("build_atoms: g returned wrong length");
    }
    return atoms;
}

// Merge duplicate (b, g) atoms; discrete references collapse to a few
// support points, which the inner optimizer then evaluates in O(1). Must run
// only after the objective is final (differences, sign flips).
DualAtoms merge_atoms(const DualAtoms& atoms) {
    std::vector<std::size_t> order(atoms.b.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b2) {
        if (atoms.b[a] != atoms.b[b2]) return atoms.b[a] < atoms.b[b2];
        return atoms.g[a] < atoms.g[b2];
    });
    DualAtoms merged;
    merged.monte_carlo = atoms.monte_carlo;
    merged.sample_count = atoms.sample_count;
    for (std::size_t idx : order) {
        if (!merged.b.empty() && merged.b.back() == atoms.b[idx] &&
            merged.g.back() == atoms.g[idx]) {
            merged.w.back() += atoms.w[idx];
        } else {
            merged.w.push_back(atoms.w[idx]);
            merged.b.push_back(atoms.b[idx]);
            merged.g.push_back(atoms.g[idx]);
        }
    }
    return merged;
}

DualInnerResult dual_inner_min(const DualAtoms& atoms, const std::vector<double>& r,
                               double delta) {
    if (atoms.b.empty()) throw InputError("dual_inner_min: no atoms");
    return minimize_dual(atoms, r, delta);
}

namespace {

KlBound extreme(const ContinuousSetSpec& spec, bool upper, int outcome, int outcome_minus,
                ExecMode mode) {
    std::vector<DualInnerResult> results(spec.phi_grid.size());
    parallel_for(spec.phi_grid.size(), mode, [&](std::size_t i) {
        const double phi = spec.phi_grid[i];
        DualAtoms atoms = build_atoms(spec, phi, outcome);
        if (outcome_minus >= 0) {
            const DualAtoms sub = build_atoms(spec, phi, outcome_minus);
            for (std::size_t j = 0; j < atoms.b.size(); ++j) atoms.b[j] -= sub.b[j];
        }
        if (!upper)
            for (double& bj : atoms.b) bj = -bj;
        results[i] = dual_inner_min(merge_atoms(atoms), spec.r, spec.delta);
    });

    KlBound out;
    bool any = false;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].feasible) continue;
        const double v = upper ? results[i].value : -results[i].value;
        const bool better = !any || (upper ? v > out.value : v < out.value);
        if (better) {
            out.value = v;
            out.se = results[i].se;
            out.arg_phi = spec.phi_grid[i];
        }
        any = true;
    }
    if (!any) throw InputError("divergence_dual: no feasible phi (empty identified set)");
    return out;
}

} // namespace

KlBound dual_extreme_upper(const ContinuousSetSpec& spec, ExecMode mode) {
    spec.validate();
    KlBound b = extreme(spec, /*upper=*/true, 1, -1, mode);
    if (spec.clamp01) b.value = std::clamp(b.value, 0.0, 1.0);
    return b;
}

KlBound dual_extreme_lower(const ContinuousSetSpec& spec, ExecMode mode) {
    spec.validate();
    KlBound b = extreme(spec, /*upper=*/false, 1, -1, mode);
    if (spec.clamp01) b.value = std::clamp(b.value, 0.0, 1.0);
    return b;
}

KlBound multinomial_regret_gap(const ContinuousSetSpec& spec, int outcome, ExecMode mode) {
    spec.validate();
    if (outcome < 0 || outcome >= spec.num_outcomes)
        throw InputError("multinomial_regret_gap: outcome out of range");
    KlBound best;
    best.value = 0.0; // m' = m contributes exactly 0
    for (int mp = 0; mp < spec.num_outcomes; ++mp) {
        if (mp == outcome) continue;
        const KlBound b = extreme(spec, /*upper=*/true, mp, outcome, mode);
        if (b.value > best.value) best = b;
    }
    best.value = std::max(best.value, 0.0);
    return best;
}

} // namespace robustfc
