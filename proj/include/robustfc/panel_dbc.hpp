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
#include <iosfwd>
#include <string>
#include <vector>

#include "robustfc/linear_model.hpp"

namespace robustfc {

enum class Link { Probit, Logit };

double link_cdf(Link link, double x);

// Histories y^T are indexed lexicographically with y_1 most significant.
int history_index(const std::vector<int>& history);
std::vector<int> index_to_history(int index, int T);

// Probabilities (and optional counts) over the 2^T panel histories.
struct HistoryDistribution {
    int T = 0;
    std::vector<double> probs;          // length 2^T, sums to 1
    std::vector<long long> counts;      // optional, same length

    long long total_count() const;
    void validate() const;
};

struct PanelModelSpec {
    int T = 2;
    std::vector<double> lambda_grid;    // strictly increasing heterogeneity support
    Link link = Link::Probit;
    std::vector<int> history;           // conditioning history, length T
    double beta_min = -5.0;
    double beta_max = 5.0;
    double beta_step = 0.01;

    void validate() const;
};

struct DgpSpec {
    double beta0 = 0.0;
    std::vector<double> lambda_weights; // simplex over lambda_grid
    double y0_prob = 0.5;               // P(Y_0 = 1), independent of lambda
};

// How the support points map to the forecast objective b(beta):
//   Posterior  — b_l = F(beta*y_T + lambda_l) * p(y^T | y0_l, lambda_l; beta) / P(y^T),
//                the posterior-reweighted conditional forecast for the given history.
//   LastState  — b_l = F(beta*y_T + lambda_l); the forecast depends on the last
//                observed state only. This is the weighting that reproduces the
//                published probit-replication bounds.
enum class ForecastWeighting { Posterior, LastState };

// p(y^T | y0, lambda; beta) = prod_t F(beta*y_{t-1} + lambda)^{y_t} (1-F)^{1-y_t}.
double history_prob(const std::vector<int>& history, int y0, double lambda, double beta,
                    Link link);

// Support points are (lambda_i, y0) pairs ordered l = 2*i + y0, L = 2*|grid|.
LinearSetSpec build_panel_spec(const PanelModelSpec& model, const HistoryDistribution& data,
                               ForecastWeighting weighting = ForecastWeighting::Posterior);

// Population history probabilities implied by a DGP on the lambda grid.
HistoryDistribution population_histories(const DgpSpec& dgp,
                                         const std::vector<double>& lambda_grid, int T,
                                         Link link = Link::Probit);

// Honore-Tamer probit design: beta0 = 0.2, lambda on {-3,-2.8,...,3}, weights
// from N(0,1) cell masses with absorbing end cells, Y0 ~ Bernoulli(1/2).
struct HonoreTamerDesign {
    PanelModelSpec model;  // history left empty
    DgpSpec dgp;
    HistoryDistribution population;
};
HonoreTamerDesign honore_tamer_dgp(int T = 2);

// Exact conditional P(Y_{T+1}=1 | y^T) under the DGP, by direct summation.
double dgp_conditional_next(const DgpSpec& dgp, const std::vector<double>& lambda_grid,
                            const std::vector<int>& history, Link link = Link::Probit);

// E_Pi[F(beta0*y_T + lambda)]: the last-state forecast object under the DGP.
double dgp_next_given_state(const DgpSpec& dgp, const std::vector<double>& lambda_grid,
                            int y_T, Link link = Link::Probit);

HistoryDistribution simulate_histories(const DgpSpec& dgp,
                                       const std::vector<double>& lambda_grid, int T,
                                       long long n, std::uint64_t seed,
                                       Link link = Link::Probit);

// CSV with header y1,...,yT and 0/1 cells; counts tallied per history.
HistoryDistribution ingest_panel_csv(std::istream& in);
HistoryDistribution ingest_panel_csv(const std::string& path);

void write_panel_csv(const HistoryDistribution& h, const std::string& path);

} // namespace robustfc
