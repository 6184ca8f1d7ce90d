#ifndef DAGBO_HARNESS_HPP
#define DAGBO_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dagbo/dag.hpp"
#include "dagbo/testbeds.hpp"
#include "dagbo/zimodel.hpp"

namespace dagbo {

/// "random", "qnehvi" (plain GPs, no ordering) or "qnehvi-dag".
inline const std::vector<std::string>& known_modes() {
    static const std::vector<std::string> m = {"random", "qnehvi", "qnehvi-dag"};
    return m;
}

struct CampaignConfig {
    std::string testbed = "branin-currin";
    /// Edges by objective name; nullopt means the testbed's own ordering.
    std::optional<std::vector<std::pair<std::string, std::string>>> dag_edges;
    int iterations = 20;
    int init_size = 6;
    int pool_size = 40;
    int batch_size = 4;
    int mc_samples = 512;
    int trials = 10;
    std::vector<std::string> modes = known_modes();
    std::uint64_t master_seed = 0;
    /// Objective name -> pass level (null for none); nullopt keeps the frozen defaults.
    std::optional<std::vector<std::pair<std::string, std::optional<double>>>> thresholds;
    /// nullopt means the origin.
    std::optional<std::vector<double>> ref_point;
    std::string output_dir = "results";

    // Optional knobs beyond the core fields.
    std::optional<double> input_noise;
    bool record_wall_time = false;
    int gp_restarts = 2;
    int gp_max_iterations = 60;
    int threads = 1;
};

/// Parses and validates a JSON config. Throws ConfigError.
CampaignConfig parse_config(const std::string& json_text);
CampaignConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const CampaignConfig& config, int indent = 2);

/// Checks counts, modes and names against the testbed. Throws ConfigError.
void validate_config(const CampaignConfig& config);

/// Testbed instance with the config's thresholds and noise applied.
Testbed make_testbed(const CampaignConfig& config);

struct IterationRecord {
    std::string mode;
    int trial = 0;
    int iteration = 0;
    int cum_joint_positives = 0;
    double wall_time_s = 0.0;
    std::uint64_t seed = 0;
    bool fallback = false;  // surrogate failure, random selection used
    std::string note;
    double baseline_hv_mean = 0.0;
    double baseline_hv_sd = 0.0;
};

struct SelectionRecord {
    std::string mode;  // "init" for the shared initial design
    int trial = 0;
    int iteration = 0;
    int pool_index = -1;
    Eigen::VectorXd input;
    std::vector<double> values;
    std::vector<bool> measured;
    bool joint_positive = false;
    std::uint64_t noise_seed = 0;
};

struct TrialSeeds {
    std::uint64_t trial = 0;
    std::vector<std::uint64_t> iterations;  // index i is iteration i + 1
};

struct CampaignRecord {
    CampaignConfig config;
    std::vector<std::string> objective_names;
    std::vector<TrialSeeds> seeds;
    std::vector<IterationRecord> iterations;
    std::vector<SelectionRecord> selections;
};

/// Seed tree: trial = derive(master, {'tr', trial}); iteration = derive(trial, {'it', iteration});
/// the pool, noise, MC, random-selection and fit streams hang off the iteration seed.
std::uint64_t trial_seed(std::uint64_t master, int trial);
std::uint64_t iteration_seed(std::uint64_t trial_seed, int iteration);

/// Called after each finished iteration (mode, trial, iteration).
using ProgressFn = std::function<void(const IterationRecord&)>;

/// Runs every mode on every trial. Modes within a trial share the initial
/// design, each iteration's pool and the noise seed of each pool entry.
CampaignRecord run_campaign(const CampaignConfig& config, const ProgressFn& progress = {});

/// Rows whose noiseless values pass every threshold. `truth` is N x K in the
/// maximization convention; thresholds use kNoThreshold for "none". The DAG
/// only fixes K: passing every threshold covers every ancestor chain.
int joint_positive_count(const std::vector<std::vector<double>>& truth,
                         const std::vector<double>& thresholds, const ObjectiveDag& dag);

struct LogDensityResult {
    double value = 0.0;
    int floored = 0;  // points whose log density was clamped to the floor
    int points = 0;
};

/// Mean log mixture density of objective k over the measured test rows.
LogDensityResult log_posterior_density(const ZeroInflatedSurrogate& surrogate, const Observations& test,
                                       int k, double log_floor = -1e3);

/// Writes iterations.csv, selections.csv, diagnostics.csv and manifest.json.
/// Throws IoError.
void export_results(const CampaignRecord& record, const std::filesystem::path& dir);

/// Per-(mode, iteration) mean and sample SD of cum_joint_positives across trials,
/// read from an iterations.csv in `in_dir`.
void write_report(const std::filesystem::path& in_dir, const std::filesystem::path& out_csv);

}  // namespace dagbo

#endif  // DAGBO_HARNESS_HPP
