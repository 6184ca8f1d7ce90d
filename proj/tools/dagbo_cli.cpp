// Command-line front end: run campaigns, summarize them, and regenerate the
// frozen testbed thresholds.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dagbo/errors.hpp"
#include "dagbo/harness.hpp"
#include "dagbo/testbeds.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

int run_command(const std::string& config_path, const std::vector<std::string>& modes, int trials,
                long long seed, const std::string& out_dir, int threads, bool quiet) {
    dagbo::CampaignConfig cfg = dagbo::load_config(config_path);
    if (!modes.empty()) cfg.modes = modes;
    if (trials > 0) cfg.trials = trials;
    if (seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (threads > 0) cfg.threads = threads;
    dagbo::validate_config(cfg);

    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw dagbo::IoError("cannot create output directory '" + cfg.output_dir + "': " + ec.message());
    // Rows land here as iterations finish (in completion order) so an aborted run leaves partial results.
    const std::filesystem::path partial = std::filesystem::path(cfg.output_dir) / "progress.csv";
    std::ofstream log(partial);
    if (!log) throw dagbo::IoError("cannot write " + partial.string());
    log << "mode,trial,iteration,cum_joint_positives,fallback\n" << std::flush;
    std::mutex mu;

    const auto progress = [&](const dagbo::IterationRecord& r) {
        std::lock_guard lock(mu);
        log << r.mode << ',' << r.trial << ',' << r.iteration << ',' << r.cum_joint_positives << ','
            << (r.fallback ? 1 : 0) << std::endl;
        if (quiet) return;
        std::cerr << r.mode << " trial " << r.trial << " iteration " << r.iteration
                  << " cum_joint_positives " << r.cum_joint_positives << (r.fallback ? " [FALLBACK]" : "") << "\n";
    };
    const dagbo::CampaignRecord record = dagbo::run_campaign(cfg, progress);
    dagbo::export_results(record, cfg.output_dir);
    log.close();
    std::filesystem::remove(partial, ec);
    std::cerr << "wrote " << cfg.output_dir << "\n";
    return 0;
}

int thresholds_command(const std::string& testbed, int samples, std::uint64_t seed) {
    const dagbo::ThresholdReport rep = dagbo::compute_thresholds(testbed, samples, seed);
    nlohmann::json j;
    j["testbed"] = rep.testbed;
    j["samples"] = rep.samples;
    j["seed"] = rep.seed;
    j["failures"] = rep.failures;
    j["objectives"] = nlohmann::json::array();
    for (std::size_t k = 0; k < rep.names.size(); ++k) {
        char thr[32], lo[32], hi[32], sh[32];
        std::snprintf(thr, sizeof thr, "%.17g", rep.threshold[k]);
        std::snprintf(lo, sizeof lo, "%.17g", rep.minimum[k]);
        std::snprintf(hi, sizeof hi, "%.17g", rep.maximum[k]);
        std::snprintf(sh, sizeof sh, "%.17g", rep.shift[k]);
        nlohmann::json o;
        o["name"] = rep.names[k];
        o["minimum"] = nlohmann::json::parse(lo);
        o["maximum"] = nlohmann::json::parse(hi);
        o["threshold"] = std::isfinite(rep.threshold[k]) ? nlohmann::json::parse(thr) : nlohmann::json(nullptr);
        o["shift"] = nlohmann::json::parse(sh);
        j["objectives"].push_back(o);
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-objective Bayesian optimization campaigns with ordered, zero-inflated objectives"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a campaign from a JSON config");
    std::string config_path, out_dir;
    std::vector<std::string> modes;
    int trials = 0, threads = 0;
    long long seed = -1;
    bool quiet = false;
    run->add_option("--config", config_path, "campaign config (JSON)")->required();
    run->add_option("--modes", modes, "subset of: random qnehvi qnehvi-dag");
    run->add_option("--trials", trials, "override the number of trials")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "override the master seed")->check(CLI::NonNegativeNumber);
    run->add_option("--out", out_dir, "override the output directory");
    run->add_option("--threads", threads, "trials run in parallel")->check(CLI::PositiveNumber);
    run->add_flag("--quiet", quiet, "no per-iteration progress");

    auto* report = app.add_subcommand("report", "mean and SD of joint positives per iteration and mode");
    std::string in_dir, summary;
    report->add_option("--in", in_dir, "directory written by run")->required();
    report->add_option("--out", summary, "summary CSV path")->required();

    auto* thresholds = app.add_subcommand("thresholds", "recompute the frozen thresholds and shifts");
    std::string testbed;
    int samples = 10000;
    std::uint64_t thr_seed = 20240;
    thresholds->add_option("--testbed", testbed, "branin-currin or penicillin")->required();
    thresholds->add_option("--samples", samples, "uniform design samples")->check(CLI::PositiveNumber);
    thresholds->add_option("--seed", thr_seed, "sweep seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (run->parsed()) return run_command(config_path, modes, trials, seed, out_dir, threads, quiet);
        if (report->parsed()) {
            dagbo::write_report(in_dir, summary);
            return 0;
        }
        if (thresholds->parsed()) return thresholds_command(testbed, samples, thr_seed);
    } catch (const dagbo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return 0;
}
