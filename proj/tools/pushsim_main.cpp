// Command-line driver: runs a figure preset and writes CSV plus a run record.
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "pushsim/errors.hpp"
#include "pushsim/experiment.hpp"

using namespace pushsim;

int main(int argc, char** argv) {
    CLI::App app{"Energy-saving push simulator for small-cell networks"};
    std::string preset_name;
    std::string config_path;
    std::string out_dir = "out";
    std::string replay_path;
    std::string dump_config;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    double fig2_bits = 1e8;
    std::string sweep_param;
    std::vector<double> sweep_values;

    app.add_option("-p,--preset", preset_name, "fig2 | fig4a | fig4b | fig5a | fig5b | custom")
        ->check(CLI::IsMember(preset_names()));
    app.add_option("-c,--config", config_path, "JSON config file (absent fields keep defaults)")
        ->check(CLI::ExistingFile);
    app.add_option("-o,--out", out_dir, "output directory")->capture_default_str();
    app.add_option("-n,--trials", trials, "Monte Carlo trials per point (episodes for fig2)")
        ->check(CLI::PositiveNumber);
    app.add_option("-s,--seed", seed, "master seed");
    app.add_option("-j,--threads", threads, "OpenMP threads for trials")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--fig2-bits", fig2_bits, "push volume for fig2 episodes, bits")->capture_default_str();
    app.add_option("--sweep-param", sweep_param, "custom preset: delivery_rate | beta | n_s | none");
    app.add_option("--sweep-values", sweep_values, "custom preset: values to sweep")->delimiter(',');
    app.add_option("--replay", replay_path, "rerun the experiment stored in a .run.json record")
        ->check(CLI::ExistingFile);
    app.add_option("--dump-config", dump_config, "write the resolved config to this path and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentPreset preset;
        ScenarioConfig config;
        RunOptions options;
        if (!replay_path.empty()) {
            const ReplaySpec spec = replay_from_record(replay_path);
            preset = spec.preset;
            config = spec.config;
            options = spec.options;
        } else {
            if (preset_name.empty()) throw DomainError("--preset or --replay is required");
            preset = make_preset(preset_name);
            if (!config_path.empty()) config = load_config(config_path);
            options.n_trials = config.n_trials;
            options.fig2_push_bits = fig2_bits;
        }
        if (preset.name == "custom" && !sweep_param.empty()) {
            preset.sweep_param = sweep_param;
            preset.values = sweep_values.empty() ? std::vector<double>{0.0} : sweep_values;
        }
        if (trials) options.n_trials = *trials;
        if (seed) config.master_seed = *seed;
        options.threads = threads;
        preset.validate();

        if (!dump_config.empty()) {
            save_config(preset_config(preset, config), dump_config);
            return 0;
        }

        const RunRecord record = run_preset(preset, config, out_dir, options);
        std::cout << "wrote " << record.csv_path.string() << " (" << record.wall_clock_seconds << " s)\n";
        if (preset.name == "fig2" && record.infeasible_episodes > 0)
            std::cout << record.infeasible_episodes << " infeasible episodes excluded\n";
        return 0;
    } catch (const DomainError& e) {
        std::cerr << "pushsim: invalid input: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "pushsim: error: " << e.what() << '\n';
        return 1;
    }
}
