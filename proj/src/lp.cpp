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

#include "robustfc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace robustfc {

namespace {

constexpr double kPivotTol = 1e-9;    // entries below this never pivot
constexpr double kReducedTol = 1e-9;  // optimality threshold on reduced costs
constexpr double kPhase1Tol = 1e-8;   // residual tolerance for feasibility

// Standard-form working problem: min cs'xs  s.t.  As xs = bs, xs >= 0.
// Records how each original variable was rewritten so the solution can be
// mapped back.
struct Standardized {
    Matrix cols;              // ns columns, each of length m (column major)
    std::vector<double> cost; // ns
    std::vector<double> b;    // m

    // var_map[j] describes original variable j:
    //   kind 0: x = lo + xs[a]
    //   kind 1: x = up - xs[a]
    //   kind 2: x = xs[a] - xs[b]   (free)
    struct VarMap {
        int kind;
        std::size_t a, b;
        double shift;
    };
    std::vector<VarMap> var_map;
    std::vector<int> row_sign; // +1 or -1 per original row
};

void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (std::isnan(x)) throw InputError(std::string("solve_lp: NaN in ") + what);
}

Standardized standardize(const LpProblem& p) {
    const std::size_t n = p.num_vars();
    const std::size_t m = p.num_rows();
    if (p.rhs.size() != m || p.senses.size() != m)
        throw InputError("solve_lp: row/rhs/sense sizes disagree");
    for (const auto& row : p.rows) {
        if (row.size() != n) throw InputError("solve_lp: row width != objective length");
        check_finite(row, "constraint matrix");
    }
    check_finite(p.objective, "objective");
    check_finite(p.rhs, "rhs");
    if (!p.lower.empty() && p.lower.size() != n)
        throw InputError("solve_lp: lower bound size mismatch");
    if (!p.upper.empty() && p.upper.size() != n)
        throw InputError("solve_lp: upper bound size mismatch");

    const double sign = (p.direction == LpProblem::Direction::Maximize) ? -1.0 : 1.0;

    auto lo_of = [&](std::size_t j) { return p.lower.empty() ? 0.0 : p.lower[j]; };
    auto up_of = [&](std::size_t j) { return p.upper.empty() ? kInf : p.upper[j]; };

    Standardized s;
    s.b.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) s.b[i] = p.rhs[i];

    // Bound rows x' <= up-lo are appended after the metric rows.
    std::vector<std::pair<std::size_t, double>> extra_rows; // (col index, rhs)

    auto col_of_var = [&](std::size_t j, double mult) {
        std::vector<double> col(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) col[i] = mult * p.rows[i][j];
        return col;
    };

    for (std::size_t j = 0; j < n; ++j) {
        const double lo = lo_of(j), up = up_of(j);
        if (lo > up) throw InputError("solve_lp: empty variable bound interval");
        if (std::isinf(lo) && lo > 0) throw InputError("solve_lp: lower bound +inf");
        if (std::isinf(up) && up < 0) throw InputError("solve_lp: upper bound -inf");
        if (std::isinf(lo) && std::isinf(up)) {
            // free: x = xs_a - xs_b
            s.var_map.push_back({2, s.cols.size(), s.cols.size() + 1, 0.0});
            s.cols.push_back(col_of_var(j, 1.0));
            s.cost.push_back(sign * p.objective[j]);
            s.cols.push_back(col_of_var(j, -1.0));
            s.cost.push_back(-sign * p.objective[j]);
        } else if (std::isinf(up)) {
            // x = lo + xs_a
            s.var_map.push_back({0, s.cols.size(), 0, lo});
            for (std::size_t i = 0; i < m; ++i) s.b[i] -= lo * p.rows[i][j];
            s.cols.push_back(col_of_var(j, 1.0));
            s.cost.push_back(sign * p.objective[j]);
        } else if (std::isinf(lo)) {
            // x = up - xs_a
            s.var_map.push_back({1, s.cols.size(), 0, up});
            for (std::size_t i = 0; i < m; ++i) s.b[i] -= up * p.rows[i][j];
            s.cols.push_back(col_of_var(j, -1.0));
            s.cost.push_back(-sign * p.objective[j]);
        } else {
            // x = lo + xs_a,  xs_a <= up - lo
            s.var_map.push_back({0, s.cols.size(), 0, lo});
            for (std::size_t i = 0; i < m; ++i) s.b[i] -= lo * p.rows[i][j];
            extra_rows.emplace_back(s.cols.size(), up - lo);
            s.cols.push_back(col_of_var(j, 1.0));
            s.cost.push_back(sign * p.objective[j]);
        }
    }

    // Append bound rows, widening every column to the new row count.
    const std::size_t m_all = m + extra_rows.size();
    for (auto& col : s.cols) col.resize(m_all, 0.0);
    s.b.resize(m_all, 0.0);
    for (std::size_t k = 0; k < extra_rows.size(); ++k) {
        s.cols[extra_rows[k].first][m + k] = 1.0;
        s.b[m + k] = extra_rows[k].second;
    }

    // Slacks/surpluses; bound rows are <=.
    std::vector<LpProblem::Sense> sense_all(p.senses);
    sense_all.resize(m_all, LpProblem::Sense::LE);
    for (std::size_t i = 0; i < m_all; ++i) {
        if (sense_all[i] == LpProblem::Sense::EQ) continue;
        std::vector<double> col(m_all, 0.0);
        col[i] = (sense_all[i] == LpProblem::Sense::LE) ? 1.0 : -1.0;
        s.cols.push_back(std::move(col));
        s.cost.push_back(0.0);
    }

    // Make b >= 0.
    s.row_sign.assign(m_all, 1);
    for (std::size_t i = 0; i < m_all; ++i) {
        if (s.b[i] < 0.0) {
            s.row_sign[i] = -1;
            s.b[i] = -s.b[i];
            for (auto& col : s.cols) col[i] = -col[i];
        }
    }
    return s;
}

// Full-tableau simplex state.
struct Tableau {
    std::size_t m, n;              // rows, structural+slack+artificial columns
    Matrix t;                      // m x (n+1); last column is b
    std::vector<double> z;         // phase-2 reduced costs, length n+1 (last = -obj)
    std::vector<double> z1;        // phase-1 reduced costs
    std::vector<std::size_t> basis;
    std::vector<char> banned;      // artificial columns are banned after phase 1

    void pivot(std::size_t r, std::size_t c) {
        const double piv = t[r][c];
        const double inv = 1.0 / piv;
        for (auto& v : t[r]) v *= inv;
        t[r][c] = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r) continue;
            const double f = t[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n; ++j) t[i][j] -= f * t[r][j];
            t[i][c] = 0.0;
        }
        auto wipe = [&](std::vector<double>& row) {
            const double f = row[c];
            if (f == 0.0) return;
            for (std::size_t j = 0; j <= n; ++j) row[j] -= f * t[r][j];
            row[c] = 0.0;
        };
        wipe(z);
        wipe(z1);
        basis[r] = c;
    }

    // One pivot. Entering column: most negative reduced cost by default
    // (ties to the lowest index), lowest eligible index in Bland mode.
    // Leaving row: minimum ratio; near-ties resolved to the largest pivot
    // element by default (keeps the tableau well conditioned), to the lowest
    // basic index in Bland mode. Both rules are deterministic; the driver
    // flips to Bland mode when degenerate pivots stall, which restores the
    // anti-cycling guarantee. Returns false when optimal.
    bool step(std::vector<double>& zrow, int& iters, int max_iters, bool bland) {
        for (;;) {
            std::size_t enter = n;
            double most_negative = -kReducedTol;
            for (std::size_t j = 0; j < n; ++j) {
                if (banned[j]) continue;
                if (zrow[j] < most_negative) {
                    enter = j;
                    if (bland) break;
                    most_negative = zrow[j];
                }
            }
            if (enter == n) return false;

            std::size_t leave = m;
            double best_ratio = kInf;
            double col_min = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double a = t[i][enter];
                col_min = std::min(col_min, a);
                if (a <= kPivotTol) continue;
                best_ratio = std::min(best_ratio, t[i][n] / a);
            }
            if (best_ratio == kInf) {
                // A numerically null column with a borderline reduced cost is
                // not a real ray; freeze it and reprice.
                if (col_min > -kReducedTol && zrow[enter] > -1e-7) {
                    banned[enter] = 1;
                    continue;
                }
                throw NumericalError("simplex: unbounded direction");
            }
            const double ratio_cut = best_ratio + 1e-9 * (1.0 + std::abs(best_ratio));
            double best_pivot = 0.0;
            std::size_t best_basic = static_cast<std::size_t>(-1);
            for (std::size_t i = 0; i < m; ++i) {
                const double a = t[i][enter];
                if (a <= kPivotTol) continue;
                if (t[i][n] / a > ratio_cut) continue;
                const bool better = bland ? (basis[i] < best_basic)
                                          : (a > best_pivot ||
                                             (a == best_pivot && basis[i] < best_basic));
                if (better) {
                    best_pivot = a;
                    best_basic = basis[i];
                    leave = i;
                }
            }
            pivot(leave, enter);
            if (++iters > max_iters)
                throw NumericalError("solve_lp: iteration limit exceeded (" +
                                     std::to_string(max_iters) + ")");
            return true;
        }
    }

    // Runs a phase to optimality with the stalling safeguard.
    void run_phase(std::vector<double>& zrow, int& iters, int max_iters) {
        int stall = 0;
        const int stall_limit = static_cast<int>(2 * (m + n)) + 16;
        double last = kInf;
        for (;;) {
            const bool bland = stall > stall_limit;
            if (!step(zrow, iters, max_iters, bland)) return;
            const double obj = -zrow[n];
            if (obj < last - 1e-12 * (1.0 + std::abs(last))) {
                stall = 0;
                last = obj;
            } else {
                ++stall;
            }
        }
    }
};

// Reduced costs from scratch for the given cost vector over current basis.
void recompute_reduced(const Tableau& tab, const std::vector<double>& cost,
                       std::vector<double>& zrow) {
    zrow.assign(tab.n + 1, 0.0);
    for (std::size_t j = 0; j < tab.n; ++j) zrow[j] = (j < cost.size()) ? cost[j] : 0.0;
    for (std::size_t i = 0; i < tab.m; ++i) {
        const std::size_t bj = tab.basis[i];
        const double cb = (bj < cost.size()) ? cost[bj] : 0.0;
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j <= tab.n; ++j) zrow[j] -= cb * tab.t[i][j];
    }
}

// Gaussian elimination with partial pivoting for the small dual systems.
std::vector<double> solve_square(const Matrix& A, const std::vector<double>& rhs) {
    const std::size_t m = rhs.size();
    Matrix a(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) a[i][j] = A[i][j];
        a[i][m] = rhs[i];
    }
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < m; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        if (std::abs(a[piv][k]) < 1e-13) {
            // Singular basis (degenerate); fall back to zero multiplier.
            a[piv][k] = (a[piv][k] >= 0 ? 1e-13 : -1e-13);
        }
        std::swap(a[k], a[piv]);
        for (std::size_t i = k + 1; i < m; ++i) {
            const double f = a[i][k] / a[k][k];
            if (f == 0.0) continue;
            for (std::size_t j = k; j <= m; ++j) a[i][j] -= f * a[k][j];
        }
    }
    std::vector<double> y(m, 0.0);
    for (std::size_t k = m; k-- > 0;) {
        double acc = a[k][m];
        for (std::size_t j = k + 1; j < m; ++j) acc -= a[k][j] * y[j];
        y[k] = acc / a[k][k];
    }
    return y;
}

} // namespace

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
    std::size_t nnz = 0;
    for (const auto& row : problem.rows)
        for (double v : row)
            if (v != 0.0) ++nnz;
    if (nnz > options.max_nonzeros)
        throw InputError("solve_lp: problem exceeds nonzero budget");

    Standardized s = standardize(problem);
    const std::size_t m = s.b.size();
    const std::size_t n_struct = s.cols.size();

    const int max_iters = options.max_iterations > 0
                              ? options.max_iterations
                              : 50 * static_cast<int>(m + problem.num_vars() + 4);

    Tableau tab;
    tab.m = m;

    // Initial basis: reuse +1 slack columns where available, artificials elsewhere.
    std::vector<std::size_t> basis(m, static_cast<std::size_t>(-1));
    for (std::size_t j = 0; j < n_struct; ++j) {
        // A column is a usable starting slack if it is +e_i.
        std::size_t hit = m;
        bool ok = true;
        for (std::size_t i = 0; i < m && ok; ++i) {
            const double v = s.cols[j][i];
            if (v == 0.0) continue;
            if (v == 1.0 && hit == m) hit = i;
            else ok = false;
        }
        if (ok && hit != m && basis[hit] == static_cast<std::size_t>(-1) && s.cost[j] == 0.0)
            basis[hit] = j;
    }

    std::vector<std::size_t> artificial_cols;
    std::vector<double> cost_all(s.cost);
    Matrix cols_all(s.cols);
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] != static_cast<std::size_t>(-1)) continue;
        std::vector<double> col(m, 0.0);
        col[i] = 1.0;
        basis[i] = cols_all.size();
        artificial_cols.push_back(cols_all.size());
        cols_all.push_back(std::move(col));
        cost_all.push_back(0.0);
    }
    const std::size_t n_all = cols_all.size();

    tab.n = n_all;
    tab.basis = basis;
    tab.banned.assign(n_all, 0);
    tab.t.assign(m, std::vector<double>(n_all + 1, 0.0));
    for (std::size_t j = 0; j < n_all; ++j)
        for (std::size_t i = 0; i < m; ++i) tab.t[i][j] = cols_all[j][i];
    for (std::size_t i = 0; i < m; ++i) tab.t[i][n_all] = s.b[i];

    LpSolution out;
    int iters = 0;

    // Phase 1.
    if (!artificial_cols.empty()) {
        std::vector<double> phase1_cost(n_all, 0.0);
        for (std::size_t j : artificial_cols) phase1_cost[j] = 1.0;
        recompute_reduced(tab, phase1_cost, tab.z1);
        tab.z.assign(n_all + 1, 0.0); // unused during phase 1
        try {
            tab.run_phase(tab.z1, iters, max_iters);
        } catch (const NumericalError& e) {
            if (std::string(e.what()).find("unbounded") != std::string::npos)
                throw NumericalError("solve_lp: phase-1 blow-up (ill-conditioned input)");
            throw;
        }
        // Current phase-1 objective = sum of artificial values = -z1[n].
        double infeas = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (phase1_cost[tab.basis[i]] > 0.0) infeas += tab.t[i][n_all];
        if (infeas > kPhase1Tol) {
            out.status = LpSolution::Status::Infeasible;
            out.iterations = iters;
            return out;
        }
        // Drive remaining artificials out of the basis; redundant rows keep a
        // zero-valued artificial which is then frozen out of pricing.
        for (std::size_t i = 0; i < m; ++i) {
            if (phase1_cost[tab.basis[i]] == 0.0) continue;
            std::size_t enter = n_all;
            for (std::size_t j = 0; j < n_all; ++j) {
                if (phase1_cost[j] > 0.0) continue;
                if (std::abs(tab.t[i][j]) > 1e-9) {
                    enter = j;
                    break;
                }
            }
            if (enter != n_all) tab.pivot(i, enter);
        }
        for (std::size_t j : artificial_cols) tab.banned[j] = 1;
    } else {
        tab.z1.assign(n_all + 1, 0.0);
    }

    // Phase 2.
    recompute_reduced(tab, cost_all, tab.z);
    bool unbounded = false;
    try {
        tab.run_phase(tab.z, iters, max_iters);
    } catch (const NumericalError& e) {
        if (std::string(e.what()).find("unbounded") != std::string::npos) unbounded = true;
        else throw;
    }
    out.iterations = iters;
    if (unbounded) {
        out.status = LpSolution::Status::Unbounded;
        return out;
    }

    // Map back to the original variables.
    std::vector<double> xs(n_all, 0.0);
    for (std::size_t i = 0; i < m; ++i) xs[tab.basis[i]] = tab.t[i][n_all];
    const std::size_t n = problem.num_vars();
    out.primal.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& vm = s.var_map[j];
        switch (vm.kind) {
            case 0: out.primal[j] = vm.shift + xs[vm.a]; break;
            case 1: out.primal[j] = vm.shift - xs[vm.a]; break;
            default: out.primal[j] = xs[vm.a] - xs[vm.b]; break;
        }
    }

    double value = 0.0;
    for (std::size_t j = 0; j < n; ++j) value += problem.objective[j] * out.primal[j];
    out.value = value;

    // Row duals: y = c_B B^{-1}, mapped through row negation and direction.
    {
        Matrix bcols(m, std::vector<double>(m, 0.0));
        std::vector<double> cb(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t bj = tab.basis[i];
            for (std::size_t r = 0; r < m; ++r) bcols[r][i] = cols_all[bj][r];
            cb[i] = cost_all[bj];
        }
        // y solves y' B = c_B'  <=>  B' y = c_B.
        Matrix btrans(m, std::vector<double>(m, 0.0));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) btrans[i][j] = bcols[j][i];
        std::vector<double> y = solve_square(btrans, cb);
        const double dir = (problem.direction == LpProblem::Direction::Maximize) ? -1.0 : 1.0;
        out.duals.assign(problem.num_rows(), 0.0);
        for (std::size_t i = 0; i < problem.num_rows(); ++i)
            out.duals[i] = dir * s.row_sign[i] * y[i];
    }

    // Residual over original rows and bounds.
    double resid = 0.0;
    for (std::size_t i = 0; i < problem.num_rows(); ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < n; ++j) ax += problem.rows[i][j] * out.primal[j];
        const double d = ax - problem.rhs[i];
        switch (problem.senses[i]) {
            case LpProblem::Sense::LE: resid = std::max(resid, d); break;
            case LpProblem::Sense::GE: resid = std::max(resid, -d); break;
            case LpProblem::Sense::EQ: resid = std::max(resid, std::abs(d)); break;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = problem.lower.empty() ? 0.0 : problem.lower[j];
        const double up = problem.upper.empty() ? kInf : problem.upper[j];
        if (!std::isinf(lo)) resid = std::max(resid, lo - out.primal[j]);
        if (!std::isinf(up)) resid = std::max(resid, out.primal[j] - up);
    }
    out.residual = std::max(resid, 0.0);
    out.status = LpSolution::Status::Optimal;
    return out;
}

DualizedProgram dualize_sup(const Matrix& G, const std::vector<double>& r,
                            const std::vector<double>& b, bool sup_form) {
    const std::size_t K = G.size();
    const std::size_t L = b.size();
    if (r.size() != K) throw InputError("dualize_sup: r length != rows of G");
    for (const auto& row : G)
        if (row.size() != L) throw InputError("dualize_sup: G width != length of b");

    DualizedProgram d;
    d.sup_form = sup_form;
    d.A.assign(L, std::vector<double>(K + 1, 0.0));
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t k = 0; k < K; ++k) d.A[l][k] = G[k][l] - r[k];
        d.A[l][K] = -1.0;
    }
    d.rhs.assign(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) d.rhs[l] = sup_form ? b[l] : -b[l];
    d.objective.assign(K + 1, 0.0);
    d.objective[K] = sup_form ? -1.0 : 1.0;
    return d;
}

LpProblem DualizedProgram::to_lp() const {
    LpProblem p;
    p.objective = objective;
    p.rows = A;
    p.rhs = rhs;
    p.senses.assign(A.size(), LpProblem::Sense::LE);
    p.lower.assign(objective.size(), -kInf);
    p.upper.assign(objective.size(), kInf);
    p.direction = sup_form ? LpProblem::Direction::Maximize : LpProblem::Direction::Minimize;
    return p;
}

} // namespace robustfc
