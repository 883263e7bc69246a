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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/stat.h>
#include <sys/wait.h>

#include "robustfc/bayes_robust.hpp"
#include "robustfc/decision_rules.hpp"
#include "robustfc/linear_model.hpp"
#include "robustfc/panel_dbc.hpp"

using json = nlohmann::json;
using namespace robustfc;

namespace {

const std::string kCli = ROBUSTFC_CLI_PATH;

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const std::string out_file = "/tmp/rfc_cli_out_" + std::to_string(counter) + ".txt";
    const std::string err_file = "/tmp/rfc_cli_err_" + std::to_string(counter) + ".txt";
    ++counter;
    const std::string cmd =
        (env.empty() ? "" : env + " ") + kCli + " " + args + " >" + out_file + " 2>" + err_file;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    auto slurp = [](const std::string& path) {
        std::ifstream f(path);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

std::string make_dir(const std::string& name) {
    const std::string path = "/tmp/rfc_cli_" + name;
    mkdir(path.c_str(), 0755);
    return path;
}

json load(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    json j;
    f >> j;
    return j;
}

std::string file_text(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("extreme-probs reproduces the probit replication") {
    const std::string dir = make_dir("ep");
    auto r = run_cli("extreme-probs --dgp honore-tamer --T 2 --history 00 --history 11 "
                     "--seed 1 --out " + dir);
    REQUIRE(r.exit_code == 0);
    auto j = load(dir + "/extreme_probs.json");
    CHECK(j["version"] == "0.1.0");
    CHECK(j["seed"] == 1);
    const auto& b0 = j["bounds"][0];
    CHECK(std::abs(b0["p_L"].get<double>() - 0.2997) < 0.005);
    CHECK(std::abs(b0["p_U"].get<double>() - 0.6803) < 0.005);
    CHECK(b0["d_mm"]["decision"] == 0);
    CHECK(b0["d_mmr"]["decision"] == 0);
    const auto& b1 = j["bounds"][1];
    CHECK(std::abs(b1["p_L"].get<double>() - 0.3775) < 0.005);
    CHECK(std::abs(b1["p_U"].get<double>() - 0.7320) < 0.005);
    CHECK(b1["d_mm"]["decision"] == 1);
    CHECK(b1["d_mmr"]["decision"] == 1);
    CHECK(std::abs(j["feasible_beta"]["lo"].get<double>() + 2.4403) < 0.01);
    CHECK(std::abs(j["feasible_beta"]["hi"].get<double>() - 1.2428) < 0.01);

    const std::string csv = file_text(dir + "/profile_00.csv");
    CHECK(csv.rfind("phi,lo,hi\n", 0) == 0);
}

TEST_CASE("extreme-probs on the uniform four-row panel") {
    const std::string dir = make_dir("ep_panel");
    {
        std::ofstream f(dir + "/data.csv");
        f << "y1,y2\n0,0\n0,1\n1,0\n1,1\n";
    }
    {
        std::ofstream f(dir + "/model.json");
        f << R"({"T": 2, "lambda_grid": {"min": -3.0, "max": 3.0, "step": 0.2},
                 "link": "probit", "beta": {"min": -2.0, "max": 2.0, "step": 0.05},
                 "history": ["00"]})";
    }
    auto r = run_cli("extreme-probs --panel " + dir + "/data.csv --spec " + dir +
                     "/model.json --seed 2 --out " + dir);
    REQUIRE(r.exit_code == 0);
    auto j = load(dir + "/extreme_probs.json");
    const auto& b = j["bounds"][0];
    CHECK(b["history"] == "00");
    CHECK(b["p_L"].get<double>() >= 0.0);
    CHECK(b["p_U"].get<double>() <= 1.0);
    CHECK(b["p_L"].get<double>() <= b["p_U"].get<double>());

    // Thread cap via the environment is echoed into the report.
    auto rt = run_cli("extreme-probs --panel " + dir + "/data.csv --spec " + dir +
                      "/model.json --seed 2 --out " + dir,
                      "ROBUST_FORECAST_THREADS=1");
    REQUIRE(rt.exit_code == 0);
    auto jt = load(dir + "/extreme_probs.json");
    CHECK(jt["config"]["threads"] == 1);

    // Posterior weighting is a distinct forecast object with its own bounds.
    auto rp = run_cli("extreme-probs --panel " + dir + "/data.csv --spec " + dir +
                      "/model.json --weighting posterior --seed 2 --out " + dir);
    REQUIRE(rp.exit_code == 0);
    auto jp = load(dir + "/extreme_probs.json");
    CHECK(jp["config"]["weighting"] == "posterior");
    const auto& bp = jp["bounds"][0];
    CHECK(bp["p_L"].get<double>() <= bp["p_U"].get<double>());
}

TEST_CASE("extreme-probs input errors exit with code 2") {
    auto r = run_cli("extreme-probs --panel /tmp/does_not_exist_rfc.csv --out /tmp");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("/tmp/does_not_exist_rfc.csv") != std::string::npos);
    auto r2 = run_cli("extreme-probs --dgp unknown-design --out /tmp");
    CHECK(r2.exit_code == 2);
    auto r3 = run_cli("extreme-probs --panel /tmp/x_rfc.csv --spec /tmp/missing_spec.json");
    CHECK(r3.exit_code == 2);
}

TEST_CASE("forecast: binary, log, classification examples") {
    auto r = run_cli("forecast --pl 0.2997 --pu 0.6803 --loss binary --a01 1 --a10 1 --seed 0");
    REQUIRE(r.exit_code == 0);
    auto j = json::parse(r.out);
    CHECK(j["rules"]["minimax"]["decision"] == 0);
    CHECK(j["rules"]["minimax_regret"]["decision"] == 0);

    auto r2 = run_cli("forecast --pl 0.3 --pu 0.3 --loss log --p 0.3");
    auto j2 = json::parse(r2.out);
    CHECK(j2["rules"]["theta_optimal"]["decision"] == doctest::Approx(0.3));
    CHECK(j2["rules"]["minimax"]["decision"] == doctest::Approx(0.3));
    CHECK(j2["rules"]["minimax_regret"]["decision"] == doctest::Approx(0.3));

    auto r3 = run_cli("forecast --lower 0.2,0.2,0 --gaps 0.6,0.6,0.8,0.5 --loss classification");
    REQUIRE(r3.exit_code == 0);
    auto j3 = json::parse(r3.out);
    CHECK(j3["rules"]["minimax"]["tie_set"] == json::array({0, 1}));
    CHECK(j3["rules"]["minimax_regret"]["decision"] == 3);

    auto bad = run_cli("forecast --pl 0.7 --pu 0.3 --loss binary");
    CHECK(bad.exit_code == 2);
    auto bad2 = run_cli("forecast --loss classification");
    CHECK(bad2.exit_code == 2);
}

TEST_CASE("bayes-forecast: deterministic reports and S=1 bootstrap reduction") {
    const std::string dir = make_dir("bayes");
    auto design = honore_tamer_dgp(2);
    auto sim = simulate_histories(design.dgp, design.model.lambda_grid, 2, 500, 314159);
    write_panel_csv(sim, dir + "/panel.csv");

    const std::string cmd = "bayes-forecast --panel " + dir + "/panel.csv --S 8 --seed 99 "
                            "--history 00 --beta-step 0.2 --out " + dir;
    auto r1 = run_cli(cmd);
    REQUIRE(r1.exit_code == 0);
    const std::string rep1 = file_text(dir + "/bayes_forecast.json");
    auto r2 = run_cli(cmd);
    REQUIRE(r2.exit_code == 0);
    const std::string rep2 = file_text(dir + "/bayes_forecast.json");
    // Byte-identical apart from the wall clock.
    auto strip_clock = [](std::string s) {
        const auto pos = s.find("\"wall_clock\"");
        REQUIRE(pos != std::string::npos);
        const auto end = s.find('\n', pos);
        return s.erase(pos, end - pos);
    };
    CHECK(strip_clock(rep1) == strip_clock(rep2));

    auto j = json::parse(rep1);
    CHECK(j["S"] == 8);
    CHECK(j["skipped"].is_number());
    CHECK(j["seed"] == 99);

    // S=1 bootstrap: the report equals the oracle rules on the resampled P,
    // reproduced here through the library.
    auto rb = run_cli("bayes-forecast --panel " + dir + "/panel.csv --S 1 --seed 7 "
                      "--source bootstrap --history 00 --beta-step 0.2 --out " + dir);
    REQUIRE(rb.exit_code == 0);
    auto jb = load(dir + "/bayes_forecast.json");

    auto draws = draw_posterior(sim, 1, 7, PosteriorSource::Bootstrap);
    HistoryDistribution d;
    d.T = 2;
    d.probs = draws.draws[0];
    PanelModelSpec model = design.model;
    model.history = {0, 0};
    model.beta_step = 0.2;
    auto spec = build_panel_spec(model, d, ForecastWeighting::LastState);
    auto bounds = extreme_probs_binary(spec);
    auto loss = LossSpec::binary(1, 1);
    CHECK(jb["rules"]["bayes_minimax_binary"]["decision"].get<int>() ==
          *minimax_binary(loss, bounds).first.discrete);
    CHECK(jb["rules"]["bayes_mmr_binary"]["decision"].get<int>() ==
          *minimax_regret_binary(loss, bounds).first.discrete);
    CHECK(jb["rules"]["bayes_minimax_quadratic"]["decision"].get<double>() ==
          doctest::Approx(*minimax_quadratic(bounds).continuous).epsilon(1e-6));
    CHECK(jb["mean_pL"].get<double>() == doctest::Approx(bounds.p_lower).epsilon(1e-5));
}

TEST_CASE("bayes-forecast rejects empty panels with exit 2") {
    const std::string dir = make_dir("bayes_empty");
    {
        std::ofstream f(dir + "/empty.csv");
        f << "y1,y2\n";
    }
    auto r = run_cli("bayes-forecast --panel " + dir + "/empty.csv --S 4 --out " + dir);
    CHECK(r.exit_code == 2);
}

TEST_CASE("limit-experiment emits curves, ratios and mc checks") {
    const std::string dir = make_dir("limit");
    auto r = run_cli("limit-experiment --h0-max 8 --step 0.01 --seed 5 --mc-check 50000 "
                     "--out " + dir);
    REQUIRE(r.exit_code == 0);
    auto j = load(dir + "/limit_summary.json");
    CHECK(j["config"]["h0_max"] == doctest::Approx(8.0));
    CHECK(j["config"]["step"] == doctest::Approx(0.01));

    bool found = false;
    for (const auto& e : j["risk_ratios_pct"]) {
        if (e["a"] == "plugin" && e["b"] == "bayes_mm") {
            found = true;
            CHECK(e["integrated_pct"].get<double>() > 15.0);
            CHECK(e["integrated_pct"].get<double>() < 25.0);
        }
    }
    CHECK(found);
    for (const auto& c : j["mc_check"]) CHECK(c["within_3se"] == true);

    CHECK(file_text(dir + "/limit_risk.csv").rfind("h0,", 0) == 0);
    CHECK(file_text(dir + "/limit_regret.csv").rfind("h0,", 0) == 0);

    auto r2 = run_cli("limit-experiment --rules plugin --mc-check 10000 --seed 5 --out " + dir);
    REQUIRE(r2.exit_code == 0);
    auto j2 = load(dir + "/limit_summary.json");
    CHECK(j2["config"]["rules"] == json::array({"plugin"}));

    auto bad = run_cli("limit-experiment --rules nonsense --out " + dir);
    CHECK(bad.exit_code == 2);
}

TEST_CASE("kl-bounds: small discrete spec, input and numerical failures") {
    const std::string dir = make_dir("kl");
    {
        std::ofstream f(dir + "/spec.json");
        f << R"({
  "phi_grid": [0.0],
  "delta": 0.05,
  "sample_size": 30000,
  "seed": 4,
  "reference": {"type": "discrete", "points": [0, 1, 2, 3], "probs": [0.4, 0.3, 0.2, 0.1]},
  "objective": {"type": "indicator", "threshold": 1.5}
})";
    }
    auto r = run_cli("kl-bounds --spec " + dir + "/spec.json --out " + dir);
    REQUIRE(r.exit_code == 0);
    auto j = load(dir + "/kl_bounds.json");
    CHECK(j["p_L"].get<double>() <= j["p_U"].get<double>());
    CHECK(j["p_L"].get<double>() >= 0.0);
    CHECK(j["p_U"].get<double>() <= 1.0);
    CHECK(j["seed"] == 4);

    auto missing = run_cli("kl-bounds --spec " + dir + "/nope.json --out " + dir);
    CHECK(missing.exit_code == 2);

    {
        std::ofstream f(dir + "/bad.json");
        f << R"({"phi_grid": [0.0], "delta": -1})";
    }
    auto bad = run_cli("kl-bounds --spec " + dir + "/bad.json --out " + dir);
    CHECK(bad.exit_code == 2);

    // A moment target sitting on the edge of the attainable range stalls the
    // inner optimizer: numerical failure, exit 3.
    {
        std::ofstream f(dir + "/stall.json");
        f << R"({
  "phi_grid": [0.0],
  "delta": 0.1,
  "sample_size": 20000,
  "seed": 3,
  "reference": {"type": "discrete", "points": [0.0, 1.0], "probs": [0.5, 0.5]},
  "objective": {"type": "indicator", "threshold": 0.5},
  "moments": {"type": "mean", "r": [0.723]}
})";
    }
    auto stall = run_cli("kl-bounds --spec " + dir + "/stall.json --out " + dir);
    CHECK(stall.exit_code == 3);
    CHECK(stall.err.find("numerical failure") != std::string::npos);
}

TEST_CASE("unknown arguments and missing subcommand exit with code 2") {
    auto r = run_cli("no-such-subcommand");
    CHECK(r.exit_code == 2);
    auto r2 = run_cli("forecast --no-such-flag 1");
    CHECK(r2.exit_code == 2);
    auto r3 = run_cli("");
    CHECK(r3.exit_code == 2);
}
