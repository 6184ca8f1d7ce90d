#include "dagbo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "dagbo/acquisition.hpp"
#include "dagbo/errors.hpp"
#include "dagbo/rng.hpp"

#ifndef DAGBO_GIT_HASH
#define DAGBO_GIT_HASH "unknown"
#endif

namespace dagbo {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

namespace {

const std::vector<std::string>& objective_names_of(const std::string& testbed) {
    static const std::vector<std::string> bc = {"branin_pass", "currin"};
    static const std::vector<std::string> pen = {"yield", "neg_time", "neg_co2"};
    if (testbed == "branin-currin") return bc;
    if (testbed == "penicillin") return pen;
    throw ConfigError("unknown testbed '" + testbed + "' (expected branin-currin or penicillin)");
}

int name_index(const std::vector<std::string>& names, const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("unknown objective name '" + name + "'");
    return static_cast<int>(it - names.begin());
}

template <typename T>
T get_as(const json& j, const char* key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config field '") + key + "' has the wrong type");
    }
}

int get_count(const json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(std::string("config field '") + key + "' must be an integer");
    return v.get<int>();
}

}  // namespace

CampaignConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> allowed = {
        "testbed", "dag_edges", "iterations", "init_size", "pool_size", "batch_size",
        "mc_samples", "trials", "modes", "master_seed", "thresholds", "ref_point",
        "output_dir", "input_noise", "record_wall_time", "gp_restarts", "gp_max_iterations", "threads"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown config field '" + key + "'");
        }
    }

    CampaignConfig c;
    if (j.contains("testbed")) c.testbed = get_as<std::string>(j.at("testbed"), "testbed");
    if (j.contains("dag_edges") && !j.at("dag_edges").is_null()) {
        const json& e = j.at("dag_edges");
        if (!e.is_array()) throw ConfigError("dag_edges must be an array of [parent, child] pairs");
        std::vector<std::pair<std::string, std::string>> edges;
        for (const json& pair : e) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
                throw ConfigError("dag_edges entries must be [parent, child] name pairs");
            }
            edges.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
        }
        c.dag_edges = edges;
    }
    c.iterations = get_count(j, "iterations", c.iterations);
    c.init_size = get_count(j, "init_size", c.init_size);
    c.pool_size = get_count(j, "pool_size", c.pool_size);
    c.batch_size = get_count(j, "batch_size", c.batch_size);
    c.mc_samples = get_count(j, "mc_samples", c.mc_samples);
    c.trials = get_count(j, "trials", c.trials);
    if (j.contains("modes")) c.modes = get_as<std::vector<std::string>>(j.at("modes"), "modes");
    if (j.contains("master_seed")) {
        if (!j.at("master_seed").is_number_unsigned()) throw ConfigError("master_seed must be a non-negative integer");
        c.master_seed = j.at("master_seed").get<std::uint64_t>();
    }
    if (j.contains("thresholds") && !j.at("thresholds").is_null()) {
        const json& t = j.at("thresholds");
        if (!t.is_object()) throw ConfigError("thresholds must be an object of name -> number|null");
        std::vector<std::pair<std::string, std::optional<double>>> th;
        for (const auto& [name, v] : t.items()) {
            if (v.is_null()) {
                th.emplace_back(name, std::nullopt);
            } else if (v.is_number()) {
                th.emplace_back(name, v.get<double>());
            } else {
                throw ConfigError("threshold for '" + name + "' must be a number or null");
            }
        }
        c.thresholds = th;
    }
    if (j.contains("ref_point") && !j.at("ref_point").is_null()) {
        c.ref_point = get_as<std::vector<double>>(j.at("ref_point"), "ref_point");
    }
    if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j.at("output_dir"), "output_dir");
    if (j.contains("input_noise") && !j.at("input_noise").is_null()) {
        c.input_noise = get_as<double>(j.at("input_noise"), "input_noise");
    }
    if (j.contains("record_wall_time")) c.record_wall_time = get_as<bool>(j.at("record_wall_time"), "record_wall_time");
    c.gp_restarts = get_count(j, "gp_restarts", c.gp_restarts);
    c.gp_max_iterations = get_count(j, "gp_max_iterations", c.gp_max_iterations);
    c.threads = get_count(j, "threads", c.threads);
    validate_config(c);
    return c;
}

CampaignConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const CampaignConfig& c, int indent) {
    json j;
    j["testbed"] = c.testbed;
    if (c.dag_edges) {
        j["dag_edges"] = json::array();
        for (const auto& [p, ch] : *c.dag_edges) j["dag_edges"].push_back({p, ch});
    } else {
        j["dag_edges"] = nullptr;
    }
    j["iterations"] = c.iterations;
    j["init_size"] = c.init_size;
    j["pool_size"] = c.pool_size;
    j["batch_size"] = c.batch_size;
    j["mc_samples"] = c.mc_samples;
    j["trials"] = c.trials;
    j["modes"] = c.modes;
    j["master_seed"] = c.master_seed;
    if (c.thresholds) {
        j["thresholds"] = json::object();
        for (const auto& [name, v] : *c.thresholds) {
            j["thresholds"][name] = v ? json(*v) : json(nullptr);
        }
    } else {
        j["thresholds"] = nullptr;
    }
    j["ref_point"] = c.ref_point ? json(*c.ref_point) : json(nullptr);
    j["output_dir"] = c.output_dir;
    j["input_noise"] = c.input_noise ? json(*c.input_noise) : json(nullptr);
    j["record_wall_time"] = c.record_wall_time;
    j["gp_restarts"] = c.gp_restarts;
    j["gp_max_iterations"] = c.gp_max_iterations;
    j["threads"] = c.threads;
    return j.dump(indent);
}

void validate_config(const CampaignConfig& c) {
    const auto& names = objective_names_of(c.testbed);
    const int K = static_cast<int>(names.size());
    if (c.iterations < 0) throw ConfigError("iterations must be >= 0");
    if (c.init_size < 1) throw ConfigError("init_size must be positive");
    if (c.pool_size < 1) throw ConfigError("pool_size must be positive");
    if (c.batch_size < 1) throw ConfigError("batch_size must be positive");
    if (c.batch_size > c.pool_size) throw ConfigError("batch_size must not exceed pool_size");
    if (c.mc_samples < 1) throw ConfigError("mc_samples must be positive");
    if (c.trials < 1) throw ConfigError("trials must be positive");
    if (c.gp_restarts < 0) throw ConfigError("gp_restarts must be >= 0");
    if (c.gp_max_iterations < 1) throw ConfigError("gp_max_iterations must be positive");
    if (c.threads < 1) throw ConfigError("threads must be positive");
    if (c.modes.empty()) throw ConfigError("modes must not be empty");
    for (const auto& m : c.modes) {
        if (std::find(known_modes().begin(), known_modes().end(), m) == known_modes().end()) {
            throw ConfigError("unknown mode '" + m + "' (expected random, qnehvi or qnehvi-dag)");
        }
        if (std::count(c.modes.begin(), c.modes.end(), m) > 1) throw ConfigError("duplicate mode '" + m + "'");
    }
    if (c.dag_edges) {
        std::vector<DagEdge> edges;
        for (const auto& [p, ch] : *c.dag_edges) edges.push_back({name_index(names, p), name_index(names, ch)});
        try {
            build_dag(K, edges);
        } catch (const CycleError& e) {
            throw ConfigError(std::string("dag_edges: ") + e.what());
        }
    }
    if (c.thresholds) {
        const std::string leaf = c.testbed == "branin-currin" ? "currin" : "neg_co2";
        for (const auto& [name, v] : *c.thresholds) {
            name_index(names, name);
            if (name == leaf && v) throw ConfigError("objective '" + leaf + "' does not take a threshold");
            if (v && !std::isfinite(*v)) throw ConfigError("threshold for '" + name + "' must be finite");
        }
    }
    if (c.ref_point) {
        if (static_cast<int>(c.ref_point->size()) != K) throw ConfigError("ref_point must have one entry per objective");
        for (double r : *c.ref_point) {
            if (!std::isfinite(r)) throw ConfigError("ref_point entries must be finite");
        }
    }
    if (c.input_noise && !(*c.input_noise >= 0.0)) throw ConfigError("input_noise must be >= 0");
    if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

Testbed make_testbed(const CampaignConfig& c) {
    validate_config(c);
    auto lookup = [&](const std::string& name) -> std::optional<std::optional<double>> {
        if (!c.thresholds) return std::nullopt;
        for (const auto& [n, v] : *c.thresholds) {
            if (n == name) return v;
        }
        return std::nullopt;
    };
    auto level = [](const std::optional<double>& v) { return v ? *v : kNoThreshold; };
    if (c.testbed == "branin-currin") {
        BraninCurrinParams p = default_branin_currin_params();
        if (auto t = lookup("branin_pass")) p.branin_threshold = level(*t);
        if (c.input_noise) p.input_noise = *c.input_noise;
        return make_branin_currin(p);
    }
    PenicillinParams p = default_penicillin_params();
    if (auto t = lookup("yield")) p.yield_threshold = level(*t);
    if (auto t = lookup("neg_time")) p.neg_time_threshold = level(*t);
    if (c.input_noise) p.input_noise = *c.input_noise;
    return make_penicillin(p);
}

// ---------------------------------------------------------------------------
// Campaign

std::uint64_t trial_seed(std::uint64_t master, int trial) {
    return derive_seed(master, {0x7472ULL, static_cast<std::uint64_t>(trial)});
}

std::uint64_t iteration_seed(std::uint64_t trial_seed, int iteration) {
    return derive_seed(trial_seed, {0x6974ULL, static_cast<std::uint64_t>(iteration)});
}

namespace {

// Streams hanging off an iteration seed.
enum Stream : std::uint64_t { kPool = 1, kNoise = 2, kMc = 3, kRandom = 4, kFit = 5 };

Eigen::VectorXd to_unit(const Testbed& tb, const Eigen::VectorXd& x) {
    Eigen::VectorXd u(x.size());
    for (Eigen::Index d = 0; d < x.size(); ++d) {
        u(d) = (x(d) - tb.bounds[d].first) / (tb.bounds[d].second - tb.bounds[d].first);
    }
    return u;
}

Eigen::MatrixXd uniform_design(const Testbed& tb, int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd X(n, tb.dim());
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < tb.dim(); ++d) X(i, d) = rng.uniform(tb.bounds[d].first, tb.bounds[d].second);
    }
    return X;
}

struct Evaluated {
    Observation obs;
    bool joint_positive = false;
};

// Surrogate view of the data. The plain baseline sees unmeasured children as
// zeros (no ordering information); the ordered mode keeps them missing.
Observations build_observations(const Testbed& tb, const std::vector<Observation>& raw, bool plain) {
    const int n = static_cast<int>(raw.size());
    const int K = tb.num_objectives();
    Observations d;
    d.X.resize(n, tb.dim());
    d.values.resize(n, K);
    d.measured.resize(n, K);
    for (int i = 0; i < n; ++i) {
        d.X.row(i) = to_unit(tb, raw[i].input).transpose();
        for (int k = 0; k < K; ++k) {
            const bool m = raw[i].measured[k];
            d.measured(i, k) = plain ? true : m;
            d.values(i, k) = m ? raw[i].values[k] : (plain ? 0.0 : std::numeric_limits<double>::quiet_NaN());
        }
    }
    return d;
}

struct ModeState {
    std::string mode;
    int mode_index = 0;
    std::vector<Observation> data;
    std::optional<ZeroInflatedSurrogate> previous;
    int cum = 0;
};

struct TrialOutput {
    TrialSeeds seeds;
    std::vector<IterationRecord> iterations;
    std::vector<SelectionRecord> selections;
};

SelectionRecord selection_row(const std::string& mode, int trial, int iteration, int pool_index,
                              const Evaluated& e) {
    SelectionRecord s;
    s.mode = mode;
    s.trial = trial;
    s.iteration = iteration;
    s.pool_index = pool_index;
    s.input = e.obs.input;
    s.values = e.obs.values;
    s.measured = e.obs.measured;
    s.joint_positive = e.joint_positive;
    s.noise_seed = e.obs.noise_seed;
    return s;
}

TrialOutput run_trial(const CampaignConfig& c, const Testbed& tb, int trial, const ProgressFn& progress) {
    TrialOutput out;
    const std::uint64_t ts = trial_seed(c.master_seed, trial);
    out.seeds.trial = ts;
    const int K = tb.num_objectives();
    const auto& names = tb.objective_names;

    std::vector<DagEdge> edges = tb.edges;
    if (c.dag_edges) {
        edges.clear();
        for (const auto& [p, ch] : *c.dag_edges) edges.push_back({name_index(names, p), name_index(names, ch)});
    }
    const ObjectiveDag dag = build_dag(K, edges);
    const ObjectiveDag flat = ObjectiveDag::empty(K);
    const ObjectiveVector reference = c.ref_point ? *c.ref_point : ObjectiveVector(K, 0.0);

    // Shared initial design.
    const std::uint64_t init_seed = iteration_seed(ts, 0);
    const Eigen::MatrixXd X0 = uniform_design(tb, c.init_size, derive_seed(init_seed, {kPool}));
    std::vector<Observation> init;
    for (int i = 0; i < c.init_size; ++i) {
        const Eigen::VectorXd x = X0.row(i).transpose();
        Evaluated e{tb.evaluate(x, derive_seed(init_seed, {kNoise, static_cast<std::uint64_t>(i)})),
                    tb.joint_positive(x)};
        out.selections.push_back(selection_row("init", trial, 0, i, e));
        init.push_back(std::move(e.obs));
    }

    std::vector<ModeState> states;
    for (const auto& m : c.modes) {
        ModeState s;
        s.mode = m;
        s.mode_index = static_cast<int>(std::find(known_modes().begin(), known_modes().end(), m) - known_modes().begin());
        s.data = init;
        states.push_back(std::move(s));
    }

    for (int it = 1; it <= c.iterations; ++it) {
        const std::uint64_t is = iteration_seed(ts, it);
        out.seeds.iterations.push_back(is);
        const Eigen::MatrixXd pool = uniform_design(tb, c.pool_size, derive_seed(is, {kPool}));
        Eigen::MatrixXd pool_unit(pool.rows(), pool.cols());
        for (Eigen::Index i = 0; i < pool.rows(); ++i) pool_unit.row(i) = to_unit(tb, pool.row(i).transpose()).transpose();
        // Pool entries picked by several modes are evaluated once: same input, same noise seed.
        std::map<int, Evaluated> evaluated;
        auto evaluate = [&](int j) -> const Evaluated& {
            auto found = evaluated.find(j);
            if (found != evaluated.end()) return found->second;
            const Eigen::VectorXd x = pool.row(j).transpose();
            Evaluated e{tb.evaluate(x, derive_seed(is, {kNoise, static_cast<std::uint64_t>(j)})), tb.joint_positive(x)};
            return evaluated.emplace(j, std::move(e)).first->second;
        };

        for (auto& st : states) {
            const auto start = std::chrono::steady_clock::now();
            IterationRecord rec;
            rec.mode = st.mode;
            rec.trial = trial;
            rec.iteration = it;
            rec.seed = is;
            std::vector<int> picks;
            if (st.mode == "random") {
                picks = select_random(c.pool_size, c.batch_size, derive_seed(is, {kRandom}));
            } else {
                const bool plain = st.mode == "qnehvi";
                try {
                    const Observations data = build_observations(tb, st.data, plain);
                    SurrogateConfig sc;
                    sc.kinds = plain ? std::vector<ObjectiveKind>(K, ObjectiveKind::ContinuousNoInflation) : tb.kinds;
                    sc.gp.restarts = c.gp_restarts;
                    sc.gp.max_iterations = c.gp_max_iterations;
                    sc.gp.seed = derive_seed(is, {kFit, static_cast<std::uint64_t>(st.mode_index)});
                    for (int k = 0; k < K; ++k) {
                        sc.prior_mean.push_back(0.5 * tb.value_scale[k]);
                        sc.prior_scale.push_back(0.5 * tb.value_scale[k]);
                    }
                    const ObjectiveDag& g = plain ? flat : dag;
                    ZeroInflatedSurrogate sur =
                        fit_surrogates(data, g, sc, st.previous ? &*st.previous : nullptr);
                    for (const auto& w : sur.warnings()) {
                        rec.note += (rec.note.empty() ? "" : "; ") + w;
                    }
                    const AcquisitionContext ctx =
                        prepare_context(sur, g, data.X, reference, c.mc_samples,
                                        derive_seed(is, {kMc, static_cast<std::uint64_t>(st.mode_index)}));
                    double mean = 0.0, sq = 0.0;
                    for (double h : ctx.baseline_hv) mean += h;
                    mean /= static_cast<double>(ctx.baseline_hv.size());
                    for (double h : ctx.baseline_hv) sq += (h - mean) * (h - mean);
                    rec.baseline_hv_mean = mean;
                    rec.baseline_hv_sd = ctx.baseline_hv.size() > 1
                                             ? std::sqrt(sq / static_cast<double>(ctx.baseline_hv.size() - 1))
                                             : 0.0;
                    picks = select_batch(ctx, pool_unit, c.batch_size).indices;
                    st.previous = std::move(sur);
                } catch (const Error& e) {
                    rec.fallback = true;
                    rec.note = std::string("fallback to random: ") + e.what();
                    std::cerr << "[FALLBACK] mode=" << st.mode << " trial=" << trial << " iteration=" << it
                              << ": " << e.what() << "\n";
                    picks = select_random(c.pool_size, c.batch_size, derive_seed(is, {kRandom}));
                }
            }
            for (int j : picks) {
                const Evaluated& e = evaluate(j);
                st.data.push_back(e.obs);
                st.cum += e.joint_positive ? 1 : 0;
                out.selections.push_back(selection_row(st.mode, trial, it, j, e));
            }
            rec.cum_joint_positives = st.cum;
            if (c.record_wall_time) {
                rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            }
            if (progress) progress(rec);
            out.iterations.push_back(std::move(rec));
        }
    }
    return out;
}

}  // namespace

CampaignRecord run_campaign(const CampaignConfig& config, const ProgressFn& progress) {
    validate_config(config);
    const Testbed tb = make_testbed(config);
    CampaignRecord rec;
    rec.config = config;
    rec.objective_names = tb.objective_names;

    std::vector<TrialOutput> outputs(static_cast<std::size_t>(config.trials));
    if (config.threads <= 1) {
        for (int t = 0; t < config.trials; ++t) outputs[t] = run_trial(config, tb, t, progress);
    } else {
        std::mutex progress_mutex;
        const ProgressFn locked = [&](const IterationRecord& r) {
            if (!progress) return;
            std::lock_guard<std::mutex> lock(progress_mutex);
            progress(r);
        };
        for (int first = 0; first < config.trials; first += config.threads) {
            std::vector<std::future<TrialOutput>> jobs;
            const int last = std::min(config.trials, first + config.threads);
            for (int t = first; t < last; ++t) {
                jobs.push_back(std::async(std::launch::async, [&, t] { return run_trial(config, tb, t, locked); }));
            }
            for (int t = first; t < last; ++t) outputs[t] = jobs[t - first].get();
        }
    }

    // Rows ordered by mode (config order), then trial, then iteration.
    for (const auto& mode : config.modes) {
        for (const auto& o : outputs) {
            for (const auto& r : o.iterations) {
                if (r.mode == mode) rec.iterations.push_back(r);
            }
        }
    }
    for (const auto& o : outputs) {
        rec.seeds.push_back(o.seeds);
        for (const auto& s : o.selections) rec.selections.push_back(s);
    }
    return rec;
}

int joint_positive_count(const std::vector<std::vector<double>>& truth, const std::vector<double>& thresholds,
                         const ObjectiveDag& dag) {
    if (static_cast<int>(thresholds.size()) != dag.size()) {
        throw DimensionError("joint_positive_count: one threshold per objective is required");
    }
    int count = 0;
    for (const auto& row : truth) {
        if (static_cast<int>(row.size()) != dag.size()) throw DimensionError("joint_positive_count: row width");
        bool pass = true;
        for (int k = 0; k < dag.size() && pass; ++k) pass = row[k] >= thresholds[k];
        count += pass ? 1 : 0;
    }
    return count;
}

LogDensityResult log_posterior_density(const ZeroInflatedSurrogate& surrogate, const Observations& test, int k,
                                       double log_floor) {
    if (k < 0 || k >= surrogate.num_objectives()) throw IndexError("log_posterior_density: bad objective index");
    LogDensityResult r;
    double total = 0.0;
    for (int i = 0; i < test.size(); ++i) {
        if (!test.measured(i, k)) continue;
        const double d = zero_inflated_density(surrogate, test.X.row(i).transpose(), k, test.values(i, k));
        double l = std::log(d);
        if (!(l >= log_floor)) {
            l = log_floor;
            ++r.floored;
        }
        total += l;
        ++r.points;
    }
    if (r.points == 0) throw EmptyDataError("log_posterior_density: no measured test rows");
    r.value = total / r.points;
    return r;
}

// ---------------------------------------------------------------------------
// Export

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

}  // namespace

void export_results(const CampaignRecord& record, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    const auto& names = record.objective_names;
    int dim = 0;
    if (!record.selections.empty()) dim = static_cast<int>(record.selections.front().input.size());
    else if (record.config.testbed == "penicillin") dim = 7;
    else dim = 2;

    {
        auto out = open_out(dir / "iterations.csv");
        out << "mode,trial,iteration,cum_joint_positives,wall_time_s,seed\n";
        for (const auto& r : record.iterations) {
            out << r.mode << ',' << r.trial << ',' << r.iteration << ',' << r.cum_joint_positives << ','
                << fmt(r.wall_time_s) << ',' << r.seed << '\n';
        }
        if (!out) throw IoError("failed writing iterations.csv");
    }
    {
        auto out = open_out(dir / "selections.csv");
        out << "mode,trial,iteration,pool_index";
        for (int d = 0; d < dim; ++d) out << ",x" << d;
        for (const auto& n : names) out << ',' << n;
        for (const auto& n : names) out << ",measured_" << n;
        out << ",joint_positive,noise_seed\n";
        for (const auto& s : record.selections) {
            out << s.mode << ',' << s.trial << ',' << s.iteration << ',' << s.pool_index;
            for (Eigen::Index d = 0; d < s.input.size(); ++d) out << ',' << fmt(s.input(d));
            for (double v : s.values) out << ',' << fmt(v);
            for (bool m : s.measured) out << ',' << (m ? 1 : 0);
            out << ',' << (s.joint_positive ? 1 : 0) << ',' << s.noise_seed << '\n';
        }
        if (!out) throw IoError("failed writing selections.csv");
    }
    {
        auto out = open_out(dir / "diagnostics.csv");
        out << "mode,trial,iteration,fallback,baseline_hv_mean,baseline_hv_sd,note\n";
        for (const auto& r : record.iterations) {
            out << r.mode << ',' << r.trial << ',' << r.iteration << ',' << (r.fallback ? 1 : 0) << ','
                << fmt(r.baseline_hv_mean) << ',' << fmt(r.baseline_hv_sd) << ',' << csv_field(r.note) << '\n';
        }
        if (!out) throw IoError("failed writing diagnostics.csv");
    }
    {
        json m;
        m["config"] = json::parse(config_to_json(record.config));
        m["objective_names"] = names;
        json env;
#if defined(__clang__)
        env["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
        env["compiler"] = std::string("gcc ") + __VERSION__;
#else
        env["compiler"] = "unknown";
#endif
        env["cplusplus"] = static_cast<long>(__cplusplus);
        env["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
        m["environment"] = env;
        m["git_hash"] = DAGBO_GIT_HASH;
        json seeds = json::array();
        for (std::size_t t = 0; t < record.seeds.size(); ++t) {
            seeds.push_back({{"trial", t}, {"trial_seed", record.seeds[t].trial},
                             {"iteration_seeds", record.seeds[t].iterations}});
        }
        m["seeds"] = seeds;
        m["files"] = {"iterations.csv", "selections.csv", "diagnostics.csv"};
        auto out = open_out(dir / "manifest.json");
        out << m.dump(2) << '\n';
        if (!out) throw IoError("failed writing manifest.json");
    }
}

void write_report(const std::filesystem::path& in_dir, const std::filesystem::path& out_csv) {
    const auto path = in_dir / "iterations.csv";
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != "mode,trial,iteration,cum_joint_positives,wall_time_s,seed") {
        throw IoError("'" + path.string() + "' does not have the expected header");
    }
    std::vector<std::string> mode_order;
    std::map<std::pair<std::string, int>, std::vector<double>> groups;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 6) throw IoError("malformed row in iterations.csv: " + line);
        int iteration = 0;
        double value = 0.0;
        try {
            iteration = std::stoi(f[2]);
            value = std::stod(f[3]);
        } catch (const std::exception&) {
            throw IoError("malformed row in iterations.csv: " + line);
        }
        if (std::find(mode_order.begin(), mode_order.end(), f[0]) == mode_order.end()) mode_order.push_back(f[0]);
        groups[{f[0], iteration}].push_back(value);
    }
    auto out = open_out(out_csv);
    out << "mode,iteration,trials,mean_cum_joint_positives,sd_cum_joint_positives\n";
    for (const auto& mode : mode_order) {
        for (const auto& [key, values] : groups) {
            if (key.first != mode) continue;
            const double n = static_cast<double>(values.size());
            const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            out << mode << ',' << key.second << ',' << values.size() << ',' << fmt(mean) << ',' << fmt(sd) << '\n';
        }
    }
    if (!out) throw IoError("failed writing '" + out_csv.string() + "'");
}

}  // namespace dagbo
