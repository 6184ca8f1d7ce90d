#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "dagbo/errors.hpp"
#include "dagbo/harness.hpp"
#include "dagbo/rng.hpp"

using namespace dagbo;
namespace fs = std::filesystem;

namespace {

std::string small_config_json(const std::string& extra = "") {
    return R"({
  "testbed": "branin-currin",
  "iterations": 3,
  "init_size": 4,
  "pool_size": 12,
  "batch_size": 2,
  "mc_samples": 32,
  "trials": 2,
  "modes": ["random", "qnehvi", "qnehvi-dag"],
  "master_seed": 17,
  "gp_restarts": 0,
  "gp_max_iterations": 30)" + extra + "\n}";
}

CampaignConfig small_config() { return parse_config(small_config_json()); }

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("dagbo_test_harness_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

// Branin on [0,1]^2, transcribed independently of the library.
double branin_oracle(double x0, double x1) {
    const double u = 15.0 * x0 - 5.0, v = 15.0 * x1;
    const double pi = std::numbers::pi;
    const double b = 5.1 / (4.0 * pi * pi), c = 5.0 / pi, t = 1.0 / (8.0 * pi);
    return std::pow(v - b * u * u + c * u - 6.0, 2) + 10.0 * (1.0 - t) * std::cos(u) + 10.0;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DAGBO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config parsing accepts the documented fields and rejects bad ones") {
    const CampaignConfig c = small_config();
    CHECK(c.iterations == 3);
    CHECK(c.modes.size() == 3);
    CHECK(c.master_seed == 17);
    CHECK_FALSE(c.dag_edges.has_value());

    // Round trip through the serializer.
    const CampaignConfig again = parse_config(config_to_json(c));
    CHECK(config_to_json(again) == config_to_json(c));

    const CampaignConfig full = parse_config(small_config_json(R"(,
  "dag_edges": [["branin_pass", "currin"]],
  "thresholds": {"branin_pass": -30.0, "currin": null},
  "ref_point": [0.0, 0.0],
  "output_dir": "elsewhere")"));
    REQUIRE(full.dag_edges.has_value());
    CHECK(full.dag_edges->size() == 1);
    CHECK(full.output_dir == "elsewhere");

    const std::vector<std::string> bad = {
        "[1, 2]",
        "{not json",
        small_config_json(R"(, "colour": "blue")"),
        R"({"testbed": "rosenbrock"})",
        R"({"batch_size": 5, "pool_size": 4})",
        R"({"trials": 0})",
        R"({"mc_samples": -1})",
        R"({"modes": []})",
        R"({"modes": ["random", "random"]})",
        R"({"modes": ["greedy"]})",
        R"({"master_seed": -3})",
        R"({"dag_edges": [["branin_pass", "potency"]]})",
        R"({"dag_edges": [["branin_pass", "currin"], ["currin", "branin_pass"]]})",
        R"({"thresholds": {"currin": 3.0}})",
        R"({"ref_point": [0.0]})",
        R"({"testbed": "penicillin", "thresholds": {"neg_co2": 1.0}})",
    };
    for (const auto& text : bad) {
        CAPTURE(text);
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/dagbo.json"), ConfigError);
}

TEST_CASE("zero iterations records only the initial design") {
    CampaignConfig c = small_config();
    c.iterations = 0;
    const CampaignRecord r = run_campaign(c);
    CHECK(r.iterations.empty());
    REQUIRE(r.selections.size() == static_cast<std::size_t>(c.trials * c.init_size));
    for (const auto& s : r.selections) {
        CHECK(s.mode == "init");
        CHECK(s.iteration == 0);
    }
}

TEST_CASE("random mode replays exactly and trials differ") {
    CampaignConfig c = small_config();
    c.modes = {"random"};
    const CampaignRecord a = run_campaign(c);
    const CampaignRecord b = run_campaign(c);
    REQUIRE(a.selections.size() == b.selections.size());
    for (std::size_t i = 0; i < a.selections.size(); ++i) {
        CHECK(a.selections[i].input == b.selections[i].input);
        CHECK(a.selections[i].pool_index == b.selections[i].pool_index);
        CHECK(a.selections[i].noise_seed == b.selections[i].noise_seed);
    }
    REQUIRE(a.iterations.size() == static_cast<std::size_t>(c.trials * c.iterations));
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
        CHECK(a.iterations[i].cum_joint_positives == b.iterations[i].cum_joint_positives);
        CHECK(a.iterations[i].seed == b.iterations[i].seed);
    }

    // Seed isolation: another trial index draws another initial design, while
    // the testbed constants stay put.
    CHECK(a.selections[0].input != a.selections[c.init_size].input);
    CHECK(a.seeds[0].trial != a.seeds[1].trial);
    CampaignConfig other = c;
    other.master_seed = 99;
    CHECK(make_testbed(other).thresholds == make_testbed(c).thresholds);
}

TEST_CASE("modes share the initial design, pools and noise seeds") {
    const CampaignConfig c = small_config();
    const CampaignRecord r = run_campaign(c);

    // (trial, iteration, pool index) -> input and noise seed seen by the first mode.
    std::map<std::tuple<int, int, int>, const SelectionRecord*> seen;
    int coincidences = 0;
    for (const auto& s : r.selections) {
        if (s.mode == "init") continue;
        const auto key = std::make_tuple(s.trial, s.iteration, s.pool_index);
        auto it = seen.find(key);
        if (it == seen.end()) {
            seen.emplace(key, &s);
            continue;
        }
        ++coincidences;
        CHECK(it->second->input == s.input);
        CHECK(it->second->noise_seed == s.noise_seed);
        CHECK(it->second->values.size() == s.values.size());
        for (std::size_t k = 0; k < s.values.size(); ++k) {
            if (std::isnan(s.values[k])) CHECK(std::isnan(it->second->values[k]));
            else CHECK(it->second->values[k] == s.values[k]);
        }
    }
    CHECK(coincidences > 0);

    // Each (mode, trial, iteration) has exactly q selections.
    std::map<std::tuple<std::string, int, int>, int> per;
    for (const auto& s : r.selections) per[{s.mode, s.trial, s.iteration}]++;
    for (const auto& [key, n] : per) {
        if (std::get<0>(key) == "init") CHECK(n == c.init_size);
        else CHECK(n == c.batch_size);
    }
}

TEST_CASE("cumulative joint positives match a ground-truth recount") {
    const CampaignConfig c = small_config();
    const CampaignRecord r = run_campaign(c);
    const double thr = make_testbed(c).thresholds[0];

    std::map<std::pair<std::string, int>, int> running;  // (mode, trial)
    std::map<std::tuple<std::string, int, int>, int> expected;
    for (const auto& s : r.selections) {
        if (s.mode == "init") continue;
        const bool pass = -branin_oracle(s.input(0), s.input(1)) >= thr;
        CHECK(pass == s.joint_positive);
        running[{s.mode, s.trial}] += pass ? 1 : 0;
        expected[{s.mode, s.trial, s.iteration}] = running[{s.mode, s.trial}];
    }
    std::map<std::pair<std::string, int>, int> last;
    for (const auto& it : r.iterations) {
        CHECK(it.cum_joint_positives == expected[{it.mode, it.trial, it.iteration}]);
        auto& prev = last[{it.mode, it.trial}];
        CHECK(it.cum_joint_positives >= prev);
        prev = it.cum_joint_positives;
        CHECK_FALSE(it.fallback);
    }
}

TEST_CASE("joint_positive_count") {
    const ObjectiveDag dag = build_dag(3, {{0, 1}, {1, 2}});
    CHECK(joint_positive_count({}, {0.0, 0.0, kNoThreshold}, dag) == 0);

    const std::vector<std::vector<double>> rows = {
        {5.0, 2.0, -1.0}, {0.5, 9.0, 3.0}, {1.0, 1.0, 0.0}, {7.0, 0.99, 4.0}, {-2.0, -2.0, -2.0}};
    CHECK(joint_positive_count(rows, {kNoThreshold, kNoThreshold, kNoThreshold}, dag) == 5);

    // Thresholds 1 and 1, leaf free: by hand rows 0 and 2 pass.
    const std::vector<double> thr = {1.0, 1.0, kNoThreshold};
    int brute = 0;
    for (const auto& row : rows) brute += (row[0] >= thr[0] && row[1] >= thr[1]) ? 1 : 0;
    CHECK(brute == 2);
    CHECK(joint_positive_count(rows, thr, dag) == brute);

    CHECK_THROWS_AS(joint_positive_count(rows, {1.0, 1.0}, dag), DimensionError);
}

TEST_CASE("log_posterior_density") {
    // Hand-built one-objective surrogates with known predictive distributions.
    auto surrogate = [](double p, double center, double sd) {
        ZeroInflatedSurrogate s;
        s.dim = 1;
        ObjectiveModel m;
        m.kind = ObjectiveKind::ZeroInflated;
        m.classifier = gp::GpClassifier::constant(1, p);
        m.regressor = gp::GpRegressor::narrow(1, center, 1.0, sd);
        s.objectives.push_back(m);
        return s;
    };
    auto test_set = [](std::vector<double> values) {
        Observations t;
        const int n = static_cast<int>(values.size());
        t.X = Eigen::MatrixXd::Constant(n, 1, 0.3);
        t.values = Eigen::Map<Eigen::VectorXd>(values.data(), n);
        t.measured.setConstant(n, 1, true);
        return t;
    };

    SUBCASE("zero at p(b=0) = 0.5") {
        const auto r = log_posterior_density(surrogate(0.5, 2.0, 1.0), test_set({0.0}), 0);
        CHECK(r.value == doctest::Approx(std::log(0.5)).epsilon(1e-12));
        CHECK(r.floored == 0);
        CHECK(r.points == 1);
    }
    SUBCASE("density one gives zero") {
        const double sd = 1.0 / std::sqrt(2.0 * std::numbers::pi);
        const auto r = log_posterior_density(surrogate(1.0, 3.0, sd), test_set({3.0}), 0);
        CHECK(std::abs(r.value) < 1e-12);
    }
    SUBCASE("Gaussian-only surrogate matches the closed form") {
        const boost::math::normal_distribution<double> n(1.5, 0.7);
        const std::vector<double> vals = {0.2, 1.5, 2.9, 1.1};
        double want = 0.0;
        for (double v : vals) want += std::log(boost::math::pdf(n, v));
        want /= static_cast<double>(vals.size());
        const auto r = log_posterior_density(surrogate(1.0, 1.5, 0.7), test_set(vals), 0);
        CHECK(r.value == doctest::Approx(want).epsilon(1e-12));
    }
    SUBCASE("Gaussian-only fitted regressor matches its own predictive normal") {
        Rng rng(5);
        Observations d;
        const int n = 15;
        d.X.resize(n, 1);
        d.values.resize(n, 1);
        d.measured.setConstant(n, 1, true);
        for (int i = 0; i < n; ++i) {
            d.X(i, 0) = rng.uniform();
            d.values(i, 0) = 2.0 + std::sin(5.0 * d.X(i, 0)) + 0.1 * rng.normal();
        }
        SurrogateConfig cfg;
        cfg.kinds = {ObjectiveKind::ContinuousNoInflation};
        cfg.gp.restarts = 1;
        const ZeroInflatedSurrogate s = fit_surrogates(d, ObjectiveDag::empty(1), cfg);
        Observations t;
        t.X = Eigen::MatrixXd(3, 1);
        t.X << 0.1, 0.5, 0.9;
        t.values = Eigen::MatrixXd(3, 1);
        t.values << 2.3, 2.6, 1.0;
        t.measured.setConstant(3, 1, true);
        const gp::Prediction pr = s.objectives[0].regressor.predict(t.X, true);
        double want = 0.0;
        for (int i = 0; i < 3; ++i) {
            const boost::math::normal_distribution<double> nd(pr.mean(i), std::sqrt(pr.variance(i)));
            want += std::log(boost::math::pdf(nd, t.values(i, 0)));
        }
        CHECK(log_posterior_density(s, t, 0).value == doctest::Approx(want / 3.0).epsilon(1e-10));
    }
    SUBCASE("impossible zero is floored and flagged") {
        const auto r = log_posterior_density(surrogate(1.0, 2.0, 1.0), test_set({0.0, 2.0}), 0, -50.0);
        CHECK(r.floored == 1);
        const double gauss = std::log(1.0 / std::sqrt(2.0 * std::numbers::pi));
        CHECK(r.value == doctest::Approx((-50.0 + gauss) / 2.0).epsilon(1e-12));
    }
    SUBCASE("unmeasured rows are skipped; none measured is an error") {
        Observations t = test_set({0.0, 2.0});
        t.measured(0, 0) = false;
        CHECK(log_posterior_density(surrogate(0.5, 2.0, 1.0), t, 0).points == 1);
        t.measured(1, 0) = false;
        CHECK_THROWS_AS(log_posterior_density(surrogate(0.5, 2.0, 1.0), t, 0), EmptyDataError);
    }
}

TEST_CASE("export writes the expected files and replays byte for byte") {
    const CampaignConfig c = small_config();
    const CampaignRecord r = run_campaign(c);
    const fs::path a = scratch_dir("export_a"), b = scratch_dir("export_b");
    export_results(r, a);
    export_results(r, b);
    for (const char* f : {"iterations.csv", "selections.csv", "diagnostics.csv", "manifest.json"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }

    const auto it_lines = lines_of(slurp(a / "iterations.csv"));
    CHECK(it_lines.front() == "mode,trial,iteration,cum_joint_positives,wall_time_s,seed");
    CHECK(it_lines.size() == static_cast<std::size_t>(1 + c.modes.size() * c.trials * c.iterations));
    const auto sel_lines = lines_of(slurp(a / "selections.csv"));
    CHECK(sel_lines.size() ==
          static_cast<std::size_t>(1 + c.trials * (c.init_size + c.modes.size() * c.iterations * c.batch_size)));

    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest.contains("git_hash"));
    CHECK(manifest.contains("environment"));
    CHECK(manifest.at("config").at("master_seed") == 17);
    CHECK(manifest.at("seeds").size() == static_cast<std::size_t>(c.trials));

    // An empty record still gets every header.
    CampaignRecord empty;
    empty.config = c;
    empty.objective_names = {"branin_pass", "currin"};
    const fs::path e = scratch_dir("export_empty");
    export_results(empty, e);
    CHECK(lines_of(slurp(e / "iterations.csv")).size() == 1);
    CHECK(lines_of(slurp(e / "selections.csv")).size() == 1);
    CHECK(lines_of(slurp(e / "diagnostics.csv")).size() == 1);

    // A regular file in the way of the directory is an I/O error.
    const fs::path blocked = scratch_dir("export_blocked");
    std::ofstream(blocked) << "x";
    CHECK_THROWS_AS(export_results(r, blocked / "sub"), IoError);

    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(e);
    fs::remove(blocked);
}

TEST_CASE("report aggregates mean and SD per mode and iteration") {
    const fs::path dir = scratch_dir("report");
    fs::create_directories(dir);
    std::ofstream(dir / "iterations.csv") << "mode,trial,iteration,cum_joint_positives,wall_time_s,seed\n"
                                             "random,0,1,1,0,11\n"
                                             "random,1,1,2,0,12\n"
                                             "random,2,1,6,0,13\n"
                                             "qnehvi,0,1,4,0,11\n"
                                             "qnehvi,1,1,4,0,12\n"
                                             "qnehvi,2,1,4,0,13\n";
    write_report(dir, dir / "summary.csv");
    const auto rows = lines_of(slurp(dir / "summary.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "mode,iteration,trials,mean_cum_joint_positives,sd_cum_joint_positives");

    // random: mean 3, sample variance ((1-3)^2 + (2-3)^2 + (6-3)^2) / 2 = 7.
    std::stringstream ss(rows[1]);
    std::string mode, iteration, trials, mean, sd;
    std::getline(ss, mode, ',');
    std::getline(ss, iteration, ',');
    std::getline(ss, trials, ',');
    std::getline(ss, mean, ',');
    std::getline(ss, sd, ',');
    CHECK(mode == "random");
    CHECK(iteration == "1");
    CHECK(trials == "3");
    CHECK(std::stod(mean) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(std::stod(sd) == doctest::Approx(std::sqrt(7.0)).epsilon(1e-15));
    CHECK(rows[2].rfind("qnehvi,1,3,4,0", 0) == 0);

    CHECK_THROWS_AS(write_report(dir / "missing", dir / "x.csv"), IoError);
    fs::remove_all(dir);
}

TEST_CASE("command-line exit codes and replay") {
    const fs::path dir = scratch_dir("cli");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "ok.json") << small_config_json();
        std::ofstream(dir / "bad.json") << small_config_json(R"(, "colour": "blue")");
    }
    const std::string ok = (dir / "ok.json").string();

    CHECK(run_cli("run --config " + ok + " --trials 1 --modes random qnehvi-dag --quiet --out " +
                  (dir / "r1").string()) == 0);
    CHECK(run_cli("run --config " + ok + " --trials 1 --modes random qnehvi-dag --quiet --out " +
                  (dir / "r2").string()) == 0);
    for (const char* f : {"iterations.csv", "selections.csv", "diagnostics.csv"}) {
        CAPTURE(f);
        CHECK(slurp(dir / "r1" / f) == slurp(dir / "r2" / f));
    }
    CHECK_FALSE(fs::exists(dir / "r1" / "progress.csv"));
    CHECK(run_cli("report --in " + (dir / "r1").string() + " --out " + (dir / "s.csv").string()) == 0);
    CHECK(lines_of(slurp(dir / "s.csv")).size() == 1 + 2 * 3);
    CHECK(run_cli("thresholds --testbed branin-currin --samples 50 --seed 1") == 0);

    CHECK(run_cli("run --config " + (dir / "bad.json").string()) == 1);
    CHECK(run_cli("run --config " + (dir / "nope.json").string()) == 1);
    CHECK(run_cli("run --config " + ok + " --modes sideways") == 1);
    CHECK(run_cli("run --config " + ok + " --trials 0") == 1);
    CHECK(run_cli("run") == 1);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("thresholds --testbed rosenbrock") == 1);

    std::ofstream(dir / "file") << "x";
    CHECK(run_cli("run --config " + ok + " --trials 1 --modes random --out " + (dir / "file" / "sub").string()) == 2);
    CHECK(run_cli("report --in " + (dir / "missing").string() + " --out " + (dir / "t.csv").string()) == 2);
    fs::remove_all(dir);
}
