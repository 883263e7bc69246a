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

#include "robustfc/panel_dbc.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "robustfc/normal.hpp"
#include "robustfc/rng.hpp"

namespace robustfc {

double link_cdf(Link link, double x) {
    return link == Link::Probit ? normal_cdf(x) : logistic(x);
}

int history_index(const std::vector<int>& history) {
    int idx = 0;
    for (int y : history) {
        if (y != 0 && y != 1) throw InputError("history entries must be 0/1");
        idx = (idx << 1) | y;
    }
    return idx;
}

std::vector<int> index_to_history(int index, int T) {
    std::vector<int> h(T, 0);
    for (int t = T - 1; t >= 0; --t) {
        h[t] = index & 1;
        index >>= 1;
    }
    return h;
}

long long HistoryDistribution::total_count() const {
    long long n = 0;
    for (long long c : counts) n += c;
    return n;
}

void HistoryDistribution::validate() const {
    if (T < 1) throw InputError("HistoryDistribution: T must be >= 1");
    if (static_cast<int>(probs.size()) != (1 << T))
        throw InputError("HistoryDistribution: probs length != 2^T");
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw InputError("HistoryDistribution: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw InputError("HistoryDistribution: probabilities do not sum to 1");
    if (!counts.empty() && counts.size() != probs.size())
        throw InputError("HistoryDistribution: counts length mismatch");
}

void PanelModelSpec::validate() const {
    if (T < 1) throw InputError("PanelModelSpec: T must be >= 1");
    if (lambda_grid.empty()) throw InputError("PanelModelSpec: empty lambda grid");
    for (std::size_t i = 1; i < lambda_grid.size(); ++i)
        if (!(lambda_grid[i] > lambda_grid[i - 1]))
            throw InputError("PanelModelSpec: lambda grid must be strictly increasing");
    if (!history.empty() && static_cast<int>(history.size()) != T)
        throw InputError("PanelModelSpec: conditioning history length != T");
    if (!(beta_step > 0.0) || !(beta_max >= beta_min))
        throw InputError("PanelModelSpec: bad beta range");
}

double history_prob(const std::vector<int>& history, int y0, double lambda, double beta,
                    Link link) {
    double p = 1.0;
    int prev = y0;
    for (int y : history) {
        const double q = link_cdf(link, beta * prev + lambda);
        p *= (y == 1) ? q : (1.0 - q);
        prev = y;
    }
    return p;
}

LinearSetSpec build_panel_spec(const PanelModelSpec& model, const HistoryDistribution& data,
                               ForecastWeighting weighting) {
    model.validate();
    data.validate();
    if (data.T != model.T) throw InputError("build_panel_spec: model T != data T");
    if (model.history.empty())
        throw InputError("build_panel_spec: conditioning history required");
    const int hidx = history_index(model.history);
    const double p_hist = data.probs[hidx];
    if (!(p_hist > 0.0))
        throw InputError("build_panel_spec: conditioning history has zero probability");

    const int T = model.T;
    const int K = 1 << T;
    const int nlam = static_cast<int>(model.lambda_grid.size());
    const int L = 2 * nlam;
    const int y_last = model.history.back();
    const auto grid = model.lambda_grid;
    const auto cond = model.history;
    const Link link = model.link;

    LinearSetSpec spec;
    spec.support_size = L;
    spec.num_outcomes = 2;
    spec.r = data.probs;
    spec.history_model = true;
    spec.phi_grid.clear();
    for (double b = model.beta_min; b <= model.beta_max + 1e-12; b += model.beta_step)
        spec.phi_grid.push_back(b);

    spec.build_G = [=](double beta) {
        Matrix G(K, std::vector<double>(L, 0.0));
        for (int i = 0; i < nlam; ++i) {
            for (int y0 = 0; y0 < 2; ++y0) {
                const int l = 2 * i + y0;
                for (int h = 0; h < K; ++h)
                    G[h][l] = history_prob(index_to_history(h, T), y0, grid[i], beta, link);
            }
        }
        return G;
    };

    spec.build_b = [=](double beta, int outcome) {
        std::vector<double> b(L, 0.0);
        for (int i = 0; i < nlam; ++i) {
            for (int y0 = 0; y0 < 2; ++y0) {
                const int l = 2 * i + y0;
                const double next = link_cdf(link, beta * y_last + grid[i]);
                const double q = (outcome == 1) ? next : 1.0 - next;
                if (weighting == ForecastWeighting::LastState) {
                    b[l] = q;
                } else {
                    b[l] = q * history_prob(cond, y0, grid[i], beta, link) / p_hist;
                }
            }
        }
        return b;
    };
    return spec;
}

HistoryDistribution population_histories(const DgpSpec& dgp,
                                         const std::vector<double>& lambda_grid, int T,
                                         Link link) {
    if (lambda_grid.size() != dgp.lambda_weights.size())
        throw InputError("population_histories: weights/grid length mismatch");
    HistoryDistribution out;
    out.T = T;
    out.probs.assign(1 << T, 0.0);
    for (int h = 0; h < (1 << T); ++h) {
        const auto hist = index_to_history(h, T);
        double acc = 0.0;
        for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
            const double w = dgp.lambda_weights[i];
            acc += w * (1.0 - dgp.y0_prob) * history_prob(hist, 0, lambda_grid[i], dgp.beta0, link);
            acc += w * dgp.y0_prob * history_prob(hist, 1, lambda_grid[i], dgp.beta0, link);
        }
        out.probs[h] = acc;
    }
    // Partition of unity holds exactly up to rounding; renormalize the dust.
    double sum = 0.0;
    for (double p : out.probs) sum += p;
    for (double& p : out.probs) p /= sum;
    return out;
}

HonoreTamerDesign honore_tamer_dgp(int T) {
    HonoreTamerDesign d;
    d.model.T = T;
    d.model.link = Link::Probit;
    d.model.beta_min = -5.0;
    d.model.beta_max = 5.0;
    d.model.beta_step = 0.01;
    for (int i = 0; i <= 30; ++i) d.model.lambda_grid.push_back(-3.0 + 0.2 * i);

    // N(0,1) mass of each midpoint cell; the end cells absorb the tails.
    const auto& grid = d.model.lambda_grid;
    std::vector<double> w(grid.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double left = (i == 0) ? -kInf : 0.5 * (grid[i - 1] + grid[i]);
        const double right = (i + 1 == grid.size()) ? kInf : 0.5 * (grid[i] + grid[i + 1]);
        const double lo = std::isinf(left) ? 0.0 : normal_cdf(left);
        const double hi = std::isinf(right) ? 1.0 : normal_cdf(right);
        w[i] = hi - lo;
        total += w[i];
    }
    for (double& wi : w) wi /= total;

    d.dgp.beta0 = 0.2;
    d.dgp.lambda_weights = w;
    d.dgp.y0_prob = 0.5;
    d.population = population_histories(d.dgp, grid, T, Link::Probit);
    return d;
}

double dgp_conditional_next(const DgpSpec& dgp, const std::vector<double>& lambda_grid,
                            const std::vector<int>& history, Link link) {
    const int y_last = history.back();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        for (int y0 = 0; y0 < 2; ++y0) {
            const double w =
                dgp.lambda_weights[i] * (y0 == 1 ? dgp.y0_prob : 1.0 - dgp.y0_prob);
            const double ph = history_prob(history, y0, lambda_grid[i], dgp.beta0, link);
            num += w * ph * link_cdf(link, dgp.beta0 * y_last + lambda_grid[i]);
            den += w * ph;
        }
    }
    if (!(den > 0.0)) throw InputError("dgp_conditional_next: zero-probability history");
    return num / den;
}

double dgp_next_given_state(const DgpSpec& dgp, const std::vector<double>& lambda_grid,
                            int y_T, Link link) {
    double acc = 0.0;
    for (std::size_t i = 0; i < lambda_grid.size(); ++i)
        acc += dgp.lambda_weights[i] * link_cdf(link, dgp.beta0 * y_T + lambda_grid[i]);
    return acc;
}

HistoryDistribution simulate_histories(const DgpSpec& dgp,
                                       const std::vector<double>& lambda_grid, int T,
                                       long long n, std::uint64_t seed, Link link) {
    if (n < 1) throw InputError("simulate_histories: n must be >= 1");
    Rng rng(seed);
    std::vector<double> cum(lambda_grid.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        acc += dgp.lambda_weights[i];
        cum[i] = acc;
    }
    HistoryDistribution out;
    out.T = T;
    out.probs.assign(1 << T, 0.0);
    out.counts.assign(1 << T, 0);
    for (long long k = 0; k < n; ++k) {
        const double u = rng.uniform() * acc;
        std::size_t i = 0;
        while (i + 1 < cum.size() && u > cum[i]) ++i;
        const double lambda = lambda_grid[i];
        int prev = rng.uniform() < dgp.y0_prob ? 1 : 0;
        int idx = 0;
        for (int t = 0; t < T; ++t) {
            const double q = link_cdf(link, dgp.beta0 * prev + lambda);
            const int y = rng.uniform() < q ? 1 : 0;
            idx = (idx << 1) | y;
            prev = y;
        }
        ++out.counts[idx];
    }
    for (std::size_t h = 0; h < out.probs.size(); ++h)
        out.probs[h] = static_cast<double>(out.counts[h]) / static_cast<double>(n);
    return out;
}

HistoryDistribution ingest_panel_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("panel csv: empty file");
    // Header y1,...,yT.
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            header.push_back(cell);
        }
    }
    const int T = static_cast<int>(header.size());
    if (T < 1) throw InputError("panel csv: empty header row");
    for (int t = 0; t < T; ++t) {
        const std::string expect = "y" + std::to_string(t + 1);
        if (header[t] != expect)
            throw InputError("panel csv: header column " + std::to_string(t + 1) +
                             " is '" + header[t] + "', expected '" + expect + "'");
    }

    HistoryDistribution out;
    out.T = T;
    out.probs.assign(1 << T, 0.0);
    out.counts.assign(1 << T, 0);
    long long n = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::stringstream ss(line);
        std::string cell;
        int idx = 0, col = 0;
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            ++col;
            if (col > T)
                throw InputError("panel csv: row " + std::to_string(line_no) + " has more than " +
                                 std::to_string(T) + " columns");
            if (cell != "0" && cell != "1")
                throw InputError("panel csv: row " + std::to_string(line_no) + ", column " +
                                 std::to_string(col) + ": cell '" + cell + "' is not 0/1");
            idx = (idx << 1) | (cell == "1" ? 1 : 0);
        }
        if (col != T)
            throw InputError("panel csv: row " + std::to_string(line_no) + " has " +
                             std::to_string(col) + " columns, expected " + std::to_string(T));
        ++out.counts[idx];
        ++n;
    }
    if (n == 0) throw InputError("panel csv: no data rows");
    for (std::size_t h = 0; h < out.probs.size(); ++h)
        out.probs[h] = static_cast<double>(out.counts[h]) / static_cast<double>(n);
    return out;
}

HistoryDistribution ingest_panel_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("panel csv: cannot open '" + path + "'");
    return ingest_panel_csv(f);
}

void write_panel_csv(const HistoryDistribution& h, const std::string& path) {
    h.validate();
    if (h.counts.empty()) throw InputError("write_panel_csv: counts required");
    std::ofstream f(path);
    if (!f) throw InputError("write_panel_csv: cannot open '" + path + "'");
    for (int t = 0; t < h.T; ++t) f << (t ? "," : "") << "y" << (t + 1);
    f << "\n";
    for (std::size_t idx = 0; idx < h.counts.size(); ++idx) {
        const auto hist = index_to_history(static_cast<int>(idx), h.T);
        for (long long k = 0; k < h.counts[idx]; ++k) {
            for (int t = 0; t < h.T; ++t) f << (t ? "," : "") << hist[t];
            f << "\n";
        }
    }
}

} // namespace robustfc
