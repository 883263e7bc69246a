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

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "robustfc/bayes_robust.hpp"
#include "robustfc/decision_rules.hpp"
#include "robustfc/divergence_dual.hpp"
#include "robustfc/limit_experiment.hpp"
#include "robustfc/linear_model.hpp"
#include "robustfc/normal.hpp"
#include "robustfc/panel_dbc.hpp"
#include "robustfc/rng.hpp"
#include "robustfc/version.hpp"

using json = nlohmann::ordered_json;
using namespace robustfc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

double prob6(double p) { return std::round(p * 1e6) / 1e6; }

std::string wall_clock_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

// Write-to-temp then rename, so readers never observe partial files.
void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw InputError("cannot open output file '" + tmp + "'");
        f << content;
        if (!f) throw InputError("failed writing '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw InputError("failed to move '" + tmp + "' into place");
}

void finish_report(json& report, const std::string& path) {
    report["wall_clock"] = wall_clock_now();
    atomic_write(path, report.dump(2) + "\n");
    std::cout << path << "\n";
}

std::uint64_t resolve_seed(std::int64_t given) {
    if (given >= 0) return static_cast<std::uint64_t>(given);
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::vector<int> parse_history(const std::string& s) {
    std::vector<int> h;
    for (char c : s) {
        if (c == '0') h.push_back(0);
        else if (c == '1') h.push_back(1);
        else throw InputError("history must be a 0/1 string, got '" + s + "'");
    }
    if (h.empty()) throw InputError("empty history string");
    return h;
}

std::string history_string(const std::vector<int>& h) {
    std::string s;
    for (int y : h) s += (y ? '1' : '0');
    return s;
}

std::vector<double> parse_csv_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw InputError("cannot parse '" + cell + "' as a number");
        }
    }
    return out;
}

json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open spec file '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw InputError("cannot parse '" + path + "': " + std::string(e.what()));
    }
    return j;
}

std::vector<double> grid_from_json(const json& j) {
    if (j.is_array()) return j.get<std::vector<double>>();
    const double lo = j.at("min").get<double>();
    const double hi = j.at("max").get<double>();
    const double step = j.at("step").get<double>();
    if (!(step > 0.0) || !(hi >= lo)) throw InputError("bad grid specification");
    std::vector<double> g;
    for (double x = lo; x <= hi + 1e-12; x += step) g.push_back(x);
    return g;
}

PanelModelSpec default_model() {
    PanelModelSpec m;
    for (int i = 0; i <= 30; ++i) m.lambda_grid.push_back(-3.0 + 0.2 * i);
    return m;
}

// Model-spec JSON: {T, lambda_grid:{min,max,step}, link, beta:{min,max,step},
// history:[...]}.
PanelModelSpec model_from_json(const json& j) {
    PanelModelSpec m = default_model();
    if (j.contains("T")) m.T = j.at("T").get<int>();
    if (j.contains("lambda_grid")) m.lambda_grid = grid_from_json(j.at("lambda_grid"));
    if (j.contains("link")) {
        const std::string link = j.at("link").get<std::string>();
        if (link == "probit") m.link = Link::Probit;
        else if (link == "logit") m.link = Link::Logit;
        else throw InputError("link must be probit or logit");
    }
    if (j.contains("beta")) {
        const auto& b = j.at("beta");
        m.beta_min = b.at("min").get<double>();
        m.beta_max = b.at("max").get<double>();
        m.beta_step = b.at("step").get<double>();
    }
    return m;
}

json decision_json(const Decision& d) {
    json out;
    if (d.discrete) out["decision"] = *d.discrete;
    if (d.continuous) out["decision"] = prob6(*d.continuous);
    out["tie"] = d.tie;
    if (d.tie_set.size() > 1) out["tie_set"] = d.tie_set;
    return out;
}

// ---------------------------------------------------------------- extreme-probs

struct ExtremeProbsArgs {
    std::string dgp;
    std::string panel_path;
    std::string spec_path;
    int T = 2;
    std::vector<std::string> histories;
    std::string weighting = "last-state";
    double beta_min = -5.0, beta_max = 5.0, beta_step = 0.01;
    bool beta_override = false;
    std::string out_dir = ".";
    std::int64_t seed = -1;
    bool serial = false;
};

int run_extreme_probs(const ExtremeProbsArgs& args) {
    PanelModelSpec model;
    HistoryDistribution data;
    json config;
    config["subcommand"] = "extreme-probs";

    if (!args.dgp.empty()) {
        if (args.dgp != "honore-tamer")
            throw InputError("unknown --dgp '" + args.dgp + "' (try honore-tamer)");
        auto design = honore_tamer_dgp(args.T);
        model = design.model;
        data = design.population;
        config["dgp"] = args.dgp;
        config["T"] = args.T;
    } else if (!args.panel_path.empty()) {
        data = ingest_panel_csv(args.panel_path);
        if (!args.spec_path.empty()) {
            model = model_from_json(load_json_file(args.spec_path));
            config["spec"] = args.spec_path;
        } else {
            model = default_model();
        }
        model.T = data.T;
        config["panel"] = args.panel_path;
    } else {
        throw InputError("extreme-probs needs --dgp or --panel");
    }
    if (args.beta_override) {
        model.beta_min = args.beta_min;
        model.beta_max = args.beta_max;
        model.beta_step = args.beta_step;
    }

    std::vector<std::vector<int>> histories;
    for (const auto& s : args.histories) histories.push_back(parse_history(s));
    if (histories.empty() && !args.spec_path.empty()) {
        const json spec_json = load_json_file(args.spec_path);
        if (spec_json.contains("history"))
            for (const auto& h : spec_json.at("history"))
                histories.push_back(h.is_string() ? parse_history(h.get<std::string>())
                                                  : h.get<std::vector<int>>());
    }
    if (histories.empty()) {
        for (int idx = 0; idx < (1 << model.T); ++idx)
            if (data.probs[idx] > 0.0) histories.push_back(index_to_history(idx, model.T));
    }

    if (args.weighting != "posterior" && args.weighting != "last-state")
        throw InputError("--weighting must be last-state or posterior");
    const ForecastWeighting weighting = args.weighting == "posterior"
                                            ? ForecastWeighting::Posterior
                                            : ForecastWeighting::LastState;

    SolveOptions opts;
    opts.mode = args.serial ? ExecMode::Serial : ExecMode::Parallel;

    config["weighting"] = args.weighting;
    config["beta"] = {{"min", model.beta_min}, {"max", model.beta_max}, {"step", model.beta_step}};
    config["link"] = model.link == Link::Probit ? "probit" : "logit";
    config["threads"] = args.serial ? 1 : max_threads();

    json report;
    report["tool"] = "robust-forecast";
    report["version"] = kVersion;
    report["config"] = config;
    report["seed"] = resolve_seed(args.seed >= 0 ? args.seed : 0);

    auto loss = LossSpec::binary(1, 1);
    json per_history = json::array();
    bool interval_done = false;
    for (const auto& h : histories) {
        model.history = h;
        auto spec = build_panel_spec(model, data, weighting);
        auto bounds = extreme_probs_binary(spec, opts);
        auto [mm, mm_risk] = minimax_binary(loss, bounds);
        auto [mmr, mmr_reg] = minimax_regret_binary(loss, bounds);

        json entry;
        entry["history"] = history_string(h);
        entry["p_L"] = prob6(bounds.p_lower);
        entry["p_U"] = prob6(bounds.p_upper);
        entry["d_mm"] = decision_json(mm);
        entry["d_mm"]["max_risk"] = prob6(mm_risk.value);
        entry["d_mmr"] = decision_json(mmr);
        entry["d_mmr"]["max_regret"] = prob6(mmr_reg.value);

        const auto rows = profile_bounds(spec, 1, opts);
        const std::string profile_path =
            args.out_dir + "/profile_" + history_string(h) + ".csv";
        std::string csv = "phi,lo,hi\n";
        char line[128];
        for (const auto& row : rows) {
            std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f\n", row.phi, row.lo, row.hi);
            csv += line;
        }
        atomic_write(profile_path, csv);
        entry["profile_csv"] = profile_path;

        if (!interval_done) {
            auto fi = feasible_phi_interval(spec, opts);
            json ji;
            ji["empty"] = fi.empty;
            if (!fi.empty) {
                ji["lo"] = fi.lo;
                ji["hi"] = fi.hi;
            }
            report["feasible_beta"] = ji;
            interval_done = true;
        }
        per_history.push_back(entry);
    }
    report["bounds"] = per_history;
    finish_report(report, args.out_dir + "/extreme_probs.json");
    return kExitOk;
}

// -------------------------------------------------------------------- forecast

struct ForecastArgs {
    double p = -1.0;
    double pl = -1.0, pu = -1.0;
    std::string loss = "binary";
    double a01 = 1.0, a10 = 1.0;
    std::string lower_csv;
    std::string gaps_csv;
    std::string out_dir;
    std::int64_t seed = -1;
};

int run_forecast(const ForecastArgs& args) {
    json config;
    config["subcommand"] = "forecast";
    config["loss"] = args.loss;

    json report;
    report["tool"] = "robust-forecast";
    report["version"] = kVersion;
    report["seed"] = resolve_seed(args.seed >= 0 ? args.seed : 0);

    json rules;
    if (args.loss == "classification") {
        MultinomialBounds mb;
        if (!args.lower_csv.empty()) mb.lower = parse_csv_doubles(args.lower_csv);
        if (!args.gaps_csv.empty()) mb.regret_gaps = parse_csv_doubles(args.gaps_csv);
        if (mb.lower.empty() && mb.regret_gaps.empty())
            throw InputError("classification forecast needs --lower and/or --gaps");
        config["lower"] = mb.lower;
        config["gaps"] = mb.regret_gaps;
        if (!mb.lower.empty()) {
            MultinomialBounds only_lower;
            only_lower.lower = mb.lower;
            auto [d, r] = minimax_classification(only_lower);
            rules["minimax"] = decision_json(d);
            rules["minimax"]["max_risk"] = prob6(r.value);
        }
        if (!mb.regret_gaps.empty()) {
            MultinomialBounds only_gaps;
            only_gaps.regret_gaps = mb.regret_gaps;
            auto [d, r] = mmr_classification(only_gaps);
            rules["minimax_regret"] = decision_json(d);
            rules["minimax_regret"]["max_regret"] = prob6(r.value);
        }
    } else {
        if (args.pl < 0.0 || args.pu < 0.0)
            throw InputError("forecast needs --pl and --pu");
        const BinaryBounds bounds(args.pl, args.pu);
        config["p_L"] = prob6(bounds.p_lower);
        config["p_U"] = prob6(bounds.p_upper);
        if (args.loss == "binary") {
            config["a01"] = args.a01;
            config["a10"] = args.a10;
            auto loss = LossSpec::binary(args.a01, args.a10);
            if (args.p >= 0.0) {
                rules["theta_optimal"] = decision_json(theta_optimal(loss, args.p));
                config["p"] = args.p;
            }
            auto [mm, mm_r] = minimax_binary(loss, bounds);
            rules["minimax"] = decision_json(mm);
            rules["minimax"]["max_risk"] = prob6(mm_r.value);
            auto [mmr, mmr_r] = minimax_regret_binary(loss, bounds);
            rules["minimax_regret"] = decision_json(mmr);
            rules["minimax_regret"]["max_regret"] = prob6(mmr_r.value);
        } else if (args.loss == "quadratic") {
            if (args.p >= 0.0) {
                rules["theta_optimal"] =
                    decision_json(theta_optimal(LossSpec::quadratic(), args.p));
                config["p"] = args.p;
            }
            rules["minimax"] = decision_json(minimax_quadratic(bounds));
            auto [d, r] = mmr_quadratic(bounds);
            rules["minimax_regret"] = decision_json(d);
            rules["minimax_regret"]["max_regret"] = prob6(r.value);
        } else if (args.loss == "log") {
            if (args.p >= 0.0) {
                rules["theta_optimal"] =
                    decision_json(theta_optimal(LossSpec::log_loss(), args.p));
                config["p"] = args.p;
            }
            rules["minimax"] = decision_json(minimax_log(bounds));
            rules["minimax_regret"] = decision_json(mmr_log(bounds));
        } else {
            throw InputError("unknown loss '" + args.loss + "'");
        }
    }
    report["config"] = config;
    report["rules"] = rules;
    if (!args.out_dir.empty()) {
        finish_report(report, args.out_dir + "/forecast.json");
    } else {
        report["wall_clock"] = wall_clock_now();
        std::cout << report.dump(2) << "\n";
    }
    return kExitOk;
}

// -------------------------------------------------------------- bayes-forecast

struct BayesForecastArgs {
    std::string panel_path;
    std::string spec_path;
    int S = 1000;
    std::int64_t seed = -1;
    std::string source = "dirichlet";
    double a01 = 1.0, a10 = 1.0;
    std::string history;
    std::string weighting = "last-state";
    double beta_step = 0.1;
    std::string out_dir = ".";
    bool serial = false;
};

int run_bayes_forecast(const BayesForecastArgs& args) {
    HistoryDistribution data = ingest_panel_csv(args.panel_path);

    PanelModelSpec model = default_model();
    if (!args.spec_path.empty()) model = model_from_json(load_json_file(args.spec_path));
    model.T = data.T;
    model.beta_step = args.beta_step;
    model.history = args.history.empty() ? std::vector<int>(data.T, 0)
                                         : parse_history(args.history);
    model.validate();

    PosteriorSource source;
    if (args.source == "dirichlet") source = PosteriorSource::DirichletFlat;
    else if (args.source == "bootstrap") source = PosteriorSource::Bootstrap;
    else throw InputError("--source must be dirichlet or bootstrap");

    const std::uint64_t seed = resolve_seed(args.seed);
    if (args.weighting != "posterior" && args.weighting != "last-state")
        throw InputError("--weighting must be last-state or posterior");
    const ForecastWeighting weighting = args.weighting == "posterior"
                                            ? ForecastWeighting::Posterior
                                            : ForecastWeighting::LastState;

    auto draws = draw_posterior(data, args.S, seed, source);

    // Per-draw extreme probabilities; draws whose identified set is empty
    // (or that assign zero probability to the history) are skipped.
    const ExecMode mode = args.serial ? ExecMode::Serial : ExecMode::Parallel;
    std::vector<int> ok(draws.draws.size(), 0);
    std::vector<BinaryBounds> all(draws.draws.size());
    SolveOptions opts;
    opts.mode = ExecMode::Serial; // parallelism is across draws here
    // Identical draws (common under bootstrap resampling) are solved once.
    const int hidx = history_index(model.history);
    std::map<std::vector<double>, std::vector<std::size_t>> unique_draws;
    for (std::size_t s = 0; s < draws.draws.size(); ++s)
        unique_draws[draws.draws[s]].push_back(s);
    std::vector<const std::vector<double>*> keys;
    std::vector<const std::vector<std::size_t>*> members;
    for (const auto& [key, idx] : unique_draws) {
        keys.push_back(&key);
        members.push_back(&idx);
    }
    parallel_for(keys.size(), mode, [&](std::size_t u) {
        HistoryDistribution d;
        d.T = data.T;
        d.probs = *keys[u];
        if (!(d.probs[hidx] > 0.0)) return; // draw puts no mass on the history
        try {
            auto spec = build_panel_spec(model, d, weighting);
            const BinaryBounds bounds = extreme_probs_binary(spec, opts);
            for (std::size_t s : *members[u]) {
                all[s] = bounds;
                ok[s] = 1;
            }
        } catch (const EmptyIdentifiedSet&) {
        }
    });
    BinaryBoundsSample sample;
    for (std::size_t s = 0; s < all.size(); ++s)
        if (ok[s]) sample.bounds.push_back(all[s]);
    sample.skipped = static_cast<int>(all.size() - sample.bounds.size());
    sample.skip_warning = sample.skipped * 10 > static_cast<int>(all.size());
    if (sample.bounds.empty())
        throw InputError("bayes-forecast: every posterior draw had an empty identified set");

    auto loss = LossSpec::binary(args.a01, args.a10);
    const auto summary = summarize(sample);

    json report;
    report["tool"] = "robust-forecast";
    report["version"] = kVersion;
    json config;
    config["subcommand"] = "bayes-forecast";
    config["panel"] = args.panel_path;
    if (!args.spec_path.empty()) config["spec"] = args.spec_path;
    config["history"] = history_string(model.history);
    config["source"] = args.source;
    config["weighting"] = args.weighting;
    config["S"] = args.S;
    config["a01"] = args.a01;
    config["a10"] = args.a10;
    config["beta_step"] = args.beta_step;
    config["threads"] = args.serial ? 1 : max_threads();
    report["config"] = config;
    report["seed"] = seed;
    report["S"] = args.S;
    report["skipped"] = sample.skipped;
    report["skip_warning"] = sample.skip_warning;
    report["mean_pL"] = prob6(summary.mean_lower);
    report["mean_pU"] = prob6(summary.mean_upper);

    json rules;
    rules["bayes_minimax_binary"] = decision_json(bayes_minimax_binary(loss, sample));
    rules["bayes_mmr_binary"] = decision_json(bayes_mmr_binary(loss, sample));
    rules["bayes_minimax_quadratic"] = decision_json(bayes_minimax_quadratic(sample));
    rules["bayes_mmr_quadratic"] = decision_json(bayes_mmr_quadratic(sample));
    rules["bayes_minimax_log"] = decision_json(bayes_minimax_quadratic(sample));
    rules["bayes_mmr_log"] = decision_json(bayes_mmr_log(sample));
    report["rules"] = rules;

    finish_report(report, args.out_dir + "/bayes_forecast.json");
    return kExitOk;
}

// ------------------------------------------------------------ limit-experiment

struct LimitArgs {
    double h0_max = 8.0;
    double step = 0.01;
    std::vector<std::string> rules;
    long long mc_check = 0;
    std::int64_t seed = -1;
    std::string out_dir = ".";
    bool serial = false;
};

Ex7Rule rule_from_name(const std::string& name) {
    if (name == "bayes_mm") return Ex7Rule::BayesMinimax;
    if (name == "plugin") return Ex7Rule::Plugin;
    if (name == "bayes_mmr") return Ex7Rule::BayesMinimaxRegret;
    if (name == "posterior_mean_plugin") return Ex7Rule::PosteriorMeanPlugin;
    throw InputError("unknown rule '" + name + "'");
}

int run_limit_experiment(const LimitArgs& args) {
    Ex7Config cfg;
    cfg.h0_max = args.h0_max;
    cfg.h0_step = args.step;
    if (!args.rules.empty()) {
        cfg.rules.clear();
        for (const auto& r : args.rules) cfg.rules.push_back(rule_from_name(r));
    }
    cfg.validate();
    const ExecMode mode = args.serial ? ExecMode::Serial : ExecMode::Parallel;
    const std::uint64_t seed = resolve_seed(args.seed);

    auto risk = ex7_excess_risk_curve(cfg, mode);
    auto regret = ex7_excess_regret_curve(cfg, mode);
    const auto grid = cfg.grid();

    auto write_curves = [&](const std::vector<RuleCurve>& curves, const std::string& path) {
        std::string csv = "h0";
        for (const auto& c : curves) csv += std::string(",") + ex7_rule_name(c.rule);
        csv += "\n";
        char cell[64];
        for (std::size_t i = 0; i < grid.size(); ++i) {
            std::snprintf(cell, sizeof(cell), "%.6f", grid[i]);
            csv += cell;
            for (const auto& c : curves) {
                std::snprintf(cell, sizeof(cell), ",%.6f", c.excess[i]);
                csv += cell;
            }
            csv += "\n";
        }
        atomic_write(path, csv);
    };
    write_curves(risk, args.out_dir + "/limit_risk.csv");
    write_curves(regret, args.out_dir + "/limit_regret.csv");

    json report;
    report["tool"] = "robust-forecast";
    report["version"] = kVersion;
    json config;
    config["subcommand"] = "limit-experiment";
    config["h0_max"] = cfg.h0_max;
    config["step"] = cfg.h0_step;
    json rule_names = json::array();
    for (auto r : cfg.rules) rule_names.push_back(ex7_rule_name(r));
    config["rules"] = rule_names;
    config["mc_check"] = args.mc_check;
    config["threads"] = args.serial ? 1 : max_threads();
    report["config"] = config;
    report["seed"] = seed;

    auto summarize_curves = [&](const std::vector<RuleCurve>& curves) {
        json out;
        for (const auto& c : curves) {
            json jc;
            jc["threshold"] = c.threshold;
            jc["integrated"] = c.integrated;
            jc["max"] = c.max_value;
            out[ex7_rule_name(c.rule)] = jc;
        }
        return out;
    };
    report["risk"] = summarize_curves(risk);
    report["regret"] = summarize_curves(regret);

    auto ratios_json = [&](const std::vector<RuleCurve>& curves) {
        json out = json::array();
        for (const auto& e : ex7_ratio_table(curves)) {
            json je;
            je["a"] = ex7_rule_name(e.a);
            je["b"] = ex7_rule_name(e.b);
            je["integrated_pct"] = e.integrated_pct;
            je["max_pct"] = e.max_pct;
            out.push_back(je);
        }
        return out;
    };
    report["risk_ratios_pct"] = ratios_json(risk);
    report["regret_ratios_pct"] = ratios_json(regret);

    if (args.mc_check > 0) {
        json checks = json::array();
        for (const auto& c : risk) {
            for (double h0 : {-3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0}) {
                for (auto crit : {RiskReport::Criterion::Risk, RiskReport::Criterion::Regret}) {
                    const bool is_regret = crit == RiskReport::Criterion::Regret;
                    auto mc = ex7_monte_carlo(c.rule, h0, args.mc_check, seed, crit, mode);
                    double analytic;
                    if (h0 >= 0.0)
                        analytic = (is_regret ? 4.0 : 3.0) * h0 * normal_cdf(c.threshold - h0);
                    else
                        analytic = (is_regret ? -2.0 : -1.0) * h0 * normal_cdf(h0 - c.threshold);
                    json jc;
                    jc["rule"] = ex7_rule_name(c.rule);
                    jc["criterion"] = is_regret ? "regret" : "risk";
                    jc["h0"] = h0;
                    jc["analytic"] = analytic;
                    jc["mc"] = mc.estimate;
                    jc["se"] = mc.se;
                    jc["within_3se"] = std::abs(mc.estimate - analytic) <= 3.0 * mc.se;
                    checks.push_back(jc);
                }
            }
        }
        report["mc_check"] = checks;
    }
    finish_report(report, args.out_dir + "/limit_summary.json");
    return kExitOk;
}

// ------------------------------------------------------------------- kl-bounds

int run_kl_bounds(const std::string& spec_path, const std::string& out_dir,
                  std::int64_t seed_arg, bool serial) {
    const json j = load_json_file(spec_path);
    ContinuousSetSpec spec;
    spec.phi_grid = grid_from_json(j.at("phi_grid"));
    spec.delta = j.value("delta", 0.0);
    spec.sample_size = j.value("sample_size", 100000);
    spec.seed = resolve_seed(seed_arg >= 0 ? seed_arg
                                           : static_cast<std::int64_t>(j.value("seed", -1)));
    spec.num_outcomes = j.value("num_outcomes", 2);
    spec.quadrature_points = j.value("quadrature_points", 0);

    const json ref = j.at("reference");
    const std::string rtype = ref.at("type").get<std::string>();
    if (rtype == "normal") {
        const double mean = ref.value("mean", 0.0), sd = ref.value("sd", 1.0);
        spec.sampler = [mean, sd](double, Rng& rng) {
            return std::vector<double>{mean + sd * rng.normal()};
        };
        spec.normal_ref = [mean, sd](double) { return std::make_pair(mean, sd); };
    } else if (rtype == "mixture_normal") {
        std::vector<double> wts, means, sds;
        for (const auto& c : ref.at("components")) {
            wts.push_back(c.at("weight").get<double>());
            means.push_back(c.at("mean").get<double>());
            sds.push_back(c.at("sd").get<double>());
        }
        spec.sampler = [wts, means, sds](double, Rng& rng) {
            double total = 0.0;
            for (double w : wts) total += w;
            double u = rng.uniform() * total;
            std::size_t i = 0;
            while (i + 1 < wts.size() && u > wts[i]) {
                u -= wts[i];
                ++i;
            }
            return std::vector<double>{means[i] + sds[i] * rng.normal()};
        };
    } else if (rtype == "discrete") {
        const auto pts = ref.at("points").get<std::vector<double>>();
        const auto probs = ref.at("probs").get<std::vector<double>>();
        if (pts.size() != probs.size()) throw InputError("discrete reference size mismatch");
        std::vector<double> cum(probs.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            cum[i] = acc;
        }
        spec.sampler = [pts, cum](double, Rng& rng) {
            const double u = rng.uniform() * cum.back();
            std::size_t i = 0;
            while (i + 1 < cum.size() && u > cum[i]) ++i;
            return std::vector<double>{pts[i]};
        };
    } else if (rtype == "normal_bernoulli") {
        // x = (lambda, y0): the panel-model reference distribution.
        const double mean = ref.value("mean", 0.0), sd = ref.value("sd", 1.0);
        const double p1 = ref.value("p1", 0.5);
        spec.sampler = [mean, sd, p1](double, Rng& rng) {
            return std::vector<double>{mean + sd * rng.normal(),
                                       rng.uniform() < p1 ? 1.0 : 0.0};
        };
    } else {
        throw InputError("unknown reference type '" + rtype + "'");
    }

    const json obj = j.at("objective");
    const std::string otype = obj.at("type").get<std::string>();
    if (otype == "logistic") {
        const double scale = obj.value("scale", 1.0), shift = obj.value("shift", 0.0);
        spec.b = [scale, shift](const std::vector<double>& x, double, int m) {
            const double v = logistic(scale * (x[0] - shift));
            return m == 1 ? v : 1.0 - v;
        };
    } else if (otype == "indicator") {
        const double threshold = obj.value("threshold", 0.0);
        spec.b = [threshold](const std::vector<double>& x, double, int m) {
            const double v = x[0] >= threshold ? 1.0 : 0.0;
            return m == 1 ? v : 1.0 - v;
        };
    } else if (otype == "panel_next") {
        // Next-period choice probability F(phi*y_T + lambda); phi is the
        // state-dependence coefficient.
        const auto history = parse_history(obj.at("history").get<std::string>());
        const Link link = obj.value("link", std::string("probit")) == "logit" ? Link::Logit
                                                                              : Link::Probit;
        const int y_last = history.back();
        spec.b = [y_last, link](const std::vector<double>& x, double phi, int m) {
            const double v = link_cdf(link, phi * y_last + x[0]);
            return m == 1 ? v : 1.0 - v;
        };
    } else {
        throw InputError("unknown objective type '" + otype + "'");
    }

    if (j.contains("moments")) {
        const json mom = j.at("moments");
        const std::string mtype = mom.at("type").get<std::string>();
        if (mtype == "mean") {
            spec.r = mom.at("r").get<std::vector<double>>();
            spec.num_moments = static_cast<int>(spec.r.size());
            if (spec.num_moments != 1)
                throw InputError("moments type 'mean' expects a single target");
            spec.g = [](const std::vector<double>& x, double) {
                return std::vector<double>{x[0]};
            };
        } else if (mtype == "panel_histories") {
            const int T = mom.at("T").get<int>();
            const Link link = mom.value("link", std::string("probit")) == "logit"
                                  ? Link::Logit
                                  : Link::Probit;
            if (mom.contains("panel")) {
                auto data = ingest_panel_csv(mom.at("panel").get<std::string>());
                if (data.T != T) throw InputError("panel T mismatch in moments");
                spec.r = data.probs;
            } else {
                spec.r = mom.at("r").get<std::vector<double>>();
            }
            spec.num_moments = static_cast<int>(spec.r.size());
            if (spec.num_moments != (1 << T))
                throw InputError("panel_histories: r must have 2^T entries");
            spec.g = [T, link](const std::vector<double>& x, double phi) {
                std::vector<double> g(1 << T);
                const int y0 = x.size() > 1 && x[1] >= 0.5 ? 1 : 0;
                for (int h = 0; h < (1 << T); ++h)
                    g[h] = history_prob(index_to_history(h, T), y0, x[0], phi, link);
                return g;
            };
        } else if (mtype != "none") {
            throw InputError("unknown moments type '" + mtype + "'");
        }
    }

    const ExecMode mode = serial ? ExecMode::Serial : ExecMode::Parallel;
    auto lo = dual_extreme_lower(spec, mode);
    auto up = dual_extreme_upper(spec, mode);

    json report;
    report["tool"] = "robust-forecast";
    report["version"] = kVersion;
    json config;
    config["subcommand"] = "kl-bounds";
    config["spec"] = spec_path;
    config["delta"] = spec.delta;
    config["sample_size"] = spec.sample_size;
    config["quadrature_points"] = spec.quadrature_points;
    config["num_outcomes"] = spec.num_outcomes;
    config["threads"] = serial ? 1 : max_threads();
    report["config"] = config;
    report["seed"] = spec.seed;
    report["p_L"] = prob6(lo.value);
    report["p_U"] = prob6(up.value);
    report["se_L"] = lo.se;
    report["se_U"] = up.se;
    report["arg_phi_L"] = lo.arg_phi;
    report["arg_phi_U"] = up.arg_phi;

    if (spec.num_outcomes > 2) {
        json gaps = json::array();
        for (int m = 0; m < spec.num_outcomes; ++m)
            gaps.push_back(prob6(multinomial_regret_gap(spec, m, mode).value));
        report["regret_gaps"] = gaps;
    }
    finish_report(report, out_dir + "/kl_bounds.json");
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust point forecasts for binary and multinomial outcomes"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    ExtremeProbsArgs ep;
    auto* ep_cmd = app.add_subcommand(
        "extreme-probs", "Extreme forecast probabilities for a panel model");
    ep_cmd->add_option("--dgp", ep.dgp, "Built-in design (honore-tamer)");
    ep_cmd->add_option("--panel", ep.panel_path, "Panel CSV (header y1..yT)");
    ep_cmd->add_option("--spec", ep.spec_path, "Model spec JSON");
    ep_cmd->add_option("--T", ep.T, "Horizon for --dgp runs");
    ep_cmd->add_option("--history", ep.histories, "Conditioning history, e.g. 00");
    ep_cmd->add_option("--weighting", ep.weighting, "last-state or posterior");
    auto* bmin = ep_cmd->add_option("--beta-min", ep.beta_min, "Grid start");
    auto* bmax = ep_cmd->add_option("--beta-max", ep.beta_max, "Grid end");
    auto* bstep = ep_cmd->add_option("--beta-step", ep.beta_step, "Grid step");
    ep_cmd->add_option("--out", ep.out_dir, "Output directory");
    ep_cmd->add_option("--seed", ep.seed, "Seed echoed in the report");
    ep_cmd->add_flag("--serial", ep.serial, "Disable the OpenMP path");

    ForecastArgs fc;
    auto* fc_cmd = app.add_subcommand("forecast", "Robust forecasts from known bounds");
    fc_cmd->add_option("--p", fc.p, "Point probability for the theta-optimal rule");
    fc_cmd->add_option("--pl", fc.pl, "Lower extreme probability");
    fc_cmd->add_option("--pu", fc.pu, "Upper extreme probability");
    fc_cmd->add_option("--loss", fc.loss, "binary, quadratic, log, classification");
    fc_cmd->add_option("--a01", fc.a01, "Penalty for y=0,d=1");
    fc_cmd->add_option("--a10", fc.a10, "Penalty for y=1,d=0");
    fc_cmd->add_option("--lower", fc.lower_csv, "Lower probabilities (classification)");
    fc_cmd->add_option("--gaps", fc.gaps_csv, "Regret gaps (classification)");
    fc_cmd->add_option("--out", fc.out_dir, "Output directory (stdout if omitted)");
    fc_cmd->add_option("--seed", fc.seed, "Seed echoed in the report");

    BayesForecastArgs bf;
    auto* bf_cmd = app.add_subcommand(
        "bayes-forecast", "Posterior-averaged robust forecasts from panel data");
    bf_cmd->add_option("--panel", bf.panel_path, "Panel CSV")->required();
    bf_cmd->add_option("--spec", bf.spec_path, "Model spec JSON");
    bf_cmd->add_option("--S", bf.S, "Number of posterior draws");
    bf_cmd->add_option("--seed", bf.seed, "Seed (auto-generated when absent)");
    bf_cmd->add_option("--source", bf.source, "dirichlet or bootstrap");
    bf_cmd->add_option("--a01", bf.a01, "Penalty for y=0,d=1");
    bf_cmd->add_option("--a10", bf.a10, "Penalty for y=1,d=0");
    bf_cmd->add_option("--history", bf.history, "Conditioning history (default all zeros)");
    bf_cmd->add_option("--weighting", bf.weighting, "last-state or posterior");
    bf_cmd->add_option("--beta-step", bf.beta_step, "Beta grid step for per-draw bounds");
    bf_cmd->add_option("--out", bf.out_dir, "Output directory");
    bf_cmd->add_flag("--serial", bf.serial, "Disable the OpenMP path");

    LimitArgs le;
    auto* le_cmd = app.add_subcommand(
        "limit-experiment", "Excess risk/regret curves in the limit experiment");
    le_cmd->add_option("--h0-max", le.h0_max, "Half-width of the h0 grid");
    le_cmd->add_option("--step", le.step, "h0 grid step");
    le_cmd->add_option("--rules", le.rules, "Subset of rules")->delimiter(',');
    le_cmd->add_option("--mc-check", le.mc_check, "Monte Carlo replications per check point");
    le_cmd->add_option("--seed", le.seed, "Seed for the Monte Carlo check");
    le_cmd->add_option("--out", le.out_dir, "Output directory");
    le_cmd->add_flag("--serial", le.serial, "Disable the OpenMP path");

    std::string kl_spec, kl_out = ".";
    std::int64_t kl_seed = -1;
    bool kl_serial = false;
    auto* kl_cmd =
        app.add_subcommand("kl-bounds", "Extreme probabilities over a KL neighborhood");
    kl_cmd->add_option("--spec", kl_spec, "KL spec JSON")->required();
    kl_cmd->add_option("--out", kl_out, "Output directory");
    kl_cmd->add_option("--seed", kl_seed, "Seed override");
    kl_cmd->add_flag("--serial", kl_serial, "Disable the OpenMP path");

    try {
        app.parse(argc, argv);
        ep.beta_override = bmin->count() || bmax->count() || bstep->count();
        if (ep_cmd->parsed()) return run_extreme_probs(ep);
        if (fc_cmd->parsed()) return run_forecast(fc);
        if (bf_cmd->parsed()) return run_bayes_forecast(bf);
        if (le_cmd->parsed()) return run_limit_experiment(le);
        if (kl_cmd->parsed()) return run_kl_bounds(kl_spec, kl_out, kl_seed, kl_serial);
        return kExitInput;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);
        return kExitInput;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
