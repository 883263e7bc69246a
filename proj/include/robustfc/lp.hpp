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

#include <limits>
#include <vector>

#include "robustfc/errors.hpp"

namespace robustfc {

using Matrix = std::vector<std::vector<double>>; // dense, row major

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense LP in the general form
//     min/max c'x  s.t.  rows[i] . x  (<=|=|>=)  rhs[i],  lower <= x <= upper,
// with +-inf bounds allowed. Sizes here are tiny (tens of rows/columns), so
// everything is dense and deterministic.
struct LpProblem {
    enum class Sense { LE, EQ, GE };
    enum class Direction { Minimize, Maximize };

    std::vector<double> objective; // length n
    Matrix rows;                   // m x n
    std::vector<Sense> senses;     // m
    std::vector<double> rhs;       // m
    std::vector<double> lower;     // n; defaults to 0 if empty
    std::vector<double> upper;     // n; defaults to +inf if empty
    Direction direction = Direction::Maximize;

    std::size_t num_vars() const { return objective.size(); }
    std::size_t num_rows() const { return rows.size(); }
};

struct LpSolution {
    enum class Status { Optimal, Infeasible, Unbounded };

    Status status = Status::Infeasible;
    double value = 0.0;          // only meaningful when Optimal
    std::vector<double> primal;  // length n
    std::vector<double> duals;   // length m, one multiplier per row
    double residual = 0.0;       // max abs constraint/bound violation
    int iterations = 0;

    bool optimal() const { return status == Status::Optimal; }
};

struct LpOptions {
    // Iteration limit is 50*(m+n) when <= 0.
    int max_iterations = 0;
    // Dense nonzero budget; exceeded -> InputError.
    std::size_t max_nonzeros = 10000;
};

// Two-phase dense simplex with Bland's rule. Deterministic: identical inputs
// produce bit-identical solutions. Throws InputError on malformed problems
// and NumericalError when the iteration limit is hit.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

// The dual of  sup_{pi in simplex} b'pi  s.t. G pi = r  over v = (mu, t):
//     inf [0_{1xK}, 1] v   s.t.  A v <= -b,   A = [G' - 1_{Lx1} (x) r', -1_{Lx1}].
// With sup_form=true the mirror program for the lower value is produced:
//     sup [0_{1xK}, -1] v  s.t.  A v <= b.
struct DualizedProgram {
    Matrix A;                      // L x (K+1)
    std::vector<double> rhs;       // length L: -b (inf form) or b (sup form)
    std::vector<double> objective; // [0,...,0, +-1]
    bool sup_form = false;

    LpProblem to_lp() const;
};

DualizedProgram dualize_sup(const Matrix& G, const std::vector<double>& r,
                            const std::vector<double>& b, bool sup_form = false);

} // namespace robustfc
