#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "pushsim/episode.hpp"
#include "pushsim/scenario.hpp"
#include "pushsim/sim.hpp"

namespace pushsim {

using json = nlohmann::json;

std::string artifact_version();

// Config I/O. Absent fields keep their defaults; unknown fields and
// out-of-domain values are rejected with the field name in the message.
json config_to_json(const ScenarioConfig& config);
ScenarioConfig config_from_json(const json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
void save_config(const ScenarioConfig& config, const std::filesystem::path& path);

/// Sweepable parameters: "delivery_rate" (bits/s per MS), "beta" (sets both
/// the catalog and the per-user Zipf exponent), "n_s" (also sets the catalog
/// to 100 * n_s files) and "none" (single point, config unchanged).
void apply_sweep(ScenarioConfig& config, const std::string& param, double value);

struct ExperimentPreset {
    std::string name;  // fig2 | fig4a | fig4b | fig5a | fig5b | custom
    std::string sweep_param = "none";
    std::vector<double> values{0.0};
    json overrides = json::object();

    void validate() const;
};

ExperimentPreset make_preset(const std::string& name);
std::vector<std::string> preset_names();

/// Base config with the preset overrides applied on top.
ScenarioConfig preset_config(const ExperimentPreset& preset, const ScenarioConfig& base);

struct RunOptions {
    int n_trials = 200;
    int threads = 1;
    double fig2_push_bits = 1e8;
};

struct SweepPoint {
    double value = 0.0;
    std::vector<StrategySummary> strategies;
};

struct RunRecord {
    std::string version;
    ExperimentPreset preset;
    ScenarioConfig config;
    RunOptions options;
    std::vector<SweepPoint> points;
    std::vector<EpisodeResult> episodes;  // fig2 only
    int infeasible_episodes = 0;
    double wall_clock_seconds = 0.0;
    std::filesystem::path csv_path;

    json to_json() const;
};

inline constexpr const char* kSweepCsvHeader =
    "sweep_value,strategy,mean_throughput_bps,se_throughput,mean_energy_J,se_energy,cache_hit_rate";
inline constexpr const char* kFig2CsvHeader = "episode,nu_star,nu_hat,gth_star,gth_hat";

/// Runs every sweep point for all three strategies, appending CSV rows and
/// rewriting the <name>.run.json sidecar after each point.
RunRecord run_preset(const ExperimentPreset& preset, const ScenarioConfig& base,
                     const std::filesystem::path& out_dir, const RunOptions& options);

/// Single-user episodes; writes fig2.csv, fig2_cdf.csv and fig2.run.json.
RunRecord run_fig2(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                   const RunOptions& options);

/// Rebuilds the preset, base config and options stored in a sidecar file.
struct ReplaySpec {
    ExperimentPreset preset;
    ScenarioConfig config;
    RunOptions options;
};
ReplaySpec replay_from_record(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace pushsim
