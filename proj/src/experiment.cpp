#include "pushsim/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "pushsim/errors.hpp"

#ifndef PUSHSIM_VERSION
#define PUSHSIM_VERSION "0.0.0-unknown"
#endif

namespace pushsim {

std::string artifact_version() { return PUSHSIM_VERSION; }

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Config I/O

json config_to_json(const ScenarioConfig& c) {
    return {
        {"n_cells", c.n_cells},
        {"cell_radius", c.cell_radius},
        {"macro_radius", c.macro_radius},
        {"n_antennas", c.n_antennas},
        {"users_per_cell", c.users_per_cell},
        {"slot_duration", c.slot_duration},
        {"slots_per_frame", c.slots_per_frame},
        {"offpeak_duration", c.offpeak_duration},
        {"peak_duration", c.peak_duration},
        {"offpeak_total_duration", c.offpeak_total_duration},
        {"cache_files_broadcast", c.cache_files_broadcast},
        {"cache_files_unicast", c.cache_files_unicast},
        {"min_distance_lo", c.min_distance_lo},
        {"min_distance_hi", c.min_distance_hi},
        {"speed", c.speed},
        {"delivery_rate", c.delivery_rate},
        {"beta_s", c.beta_s},
        {"n_s", c.n_s},
        {"n_trials", c.n_trials},
        {"master_seed", c.master_seed},
        {"occupancy_warmup_slots", c.occupancy_warmup_slots},
        {"path_loss",
         {{"intercept_db", c.path_loss.intercept_db},
          {"slope_db_per_decade", c.path_loss.slope_db_per_decade},
          {"noise_psd", c.path_loss.noise_psd},
          {"max_bandwidth", c.path_loss.max_bandwidth}}},
        {"power",
         {{"amp_efficiency", c.power.amp_efficiency},
          {"p_active", c.power.p_active},
          {"p_sleep", c.power.p_sleep},
          {"p_max", c.power.p_max}}},
        {"rt",
         {{"arrival_rate", c.rt.arrival_rate},
          {"mean_service", c.rt.mean_service},
          {"bandwidth_fraction", c.rt.bandwidth_fraction},
          {"power_fraction", c.rt.power_fraction}}},
        {"catalog",
         {{"n_files", c.catalog.n_files},
          {"file_size_bits", c.catalog.file_size_bits},
          {"zipf_beta", c.catalog.zipf_beta}}},
    };
}

namespace {

class FieldReader {
public:
    FieldReader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) throw DomainError(where() + "must be an object");
    }

    template <class T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return;
        try {
            if constexpr (std::is_integral_v<T>) {
                if (!it->is_number_integer()) throw DomainError("expected an integer");
            } else {
                if (!it->is_number()) throw DomainError("expected a number");
            }
            out = it->template get<T>();
        } catch (const std::exception& e) {
            throw DomainError(where() + key + ": " + e.what());
        }
    }

    const json& child(const char* key) {
        seen_.insert(key);
        static const json empty = json::object();
        auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? empty : *it;
    }

    void reject_unknown() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.contains(it.key())) throw DomainError("unknown config field '" + where() + it.key() + "'");
    }

private:
    std::string where() const { return prefix_.empty() ? "" : prefix_ + "."; }
    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

}  // namespace

ScenarioConfig config_from_json(const json& j) {
    ScenarioConfig c;
    if (j.is_null()) return c;
    FieldReader r(j, "");
    r.read("n_cells", c.n_cells);
    r.read("cell_radius", c.cell_radius);
    r.read("macro_radius", c.macro_radius);
    r.read("n_antennas", c.n_antennas);
    r.read("users_per_cell", c.users_per_cell);
    r.read("slot_duration", c.slot_duration);
    r.read("slots_per_frame", c.slots_per_frame);
    r.read("offpeak_duration", c.offpeak_duration);
    r.read("peak_duration", c.peak_duration);
    r.read("offpeak_total_duration", c.offpeak_total_duration);
    r.read("cache_files_broadcast", c.cache_files_broadcast);
    r.read("cache_files_unicast", c.cache_files_unicast);
    r.read("min_distance_lo", c.min_distance_lo);
    r.read("min_distance_hi", c.min_distance_hi);
    r.read("speed", c.speed);
    r.read("delivery_rate", c.delivery_rate);
    r.read("beta_s", c.beta_s);
    r.read("n_s", c.n_s);
    r.read("n_trials", c.n_trials);
    r.read("master_seed", c.master_seed);
    r.read("occupancy_warmup_slots", c.occupancy_warmup_slots);

    FieldReader pl(r.child("path_loss"), "path_loss");
    pl.read("intercept_db", c.path_loss.intercept_db);
    pl.read("slope_db_per_decade", c.path_loss.slope_db_per_decade);
    pl.read("noise_psd", c.path_loss.noise_psd);
    pl.read("max_bandwidth", c.path_loss.max_bandwidth);
    pl.reject_unknown();

    FieldReader pw(r.child("power"), "power");
    pw.read("amp_efficiency", c.power.amp_efficiency);
    pw.read("p_active", c.power.p_active);
    pw.read("p_sleep", c.power.p_sleep);
    pw.read("p_max", c.power.p_max);
    pw.reject_unknown();

    FieldReader rt(r.child("rt"), "rt");
    rt.read("arrival_rate", c.rt.arrival_rate);
    rt.read("mean_service", c.rt.mean_service);
    rt.read("bandwidth_fraction", c.rt.bandwidth_fraction);
    rt.read("power_fraction", c.rt.power_fraction);
    rt.reject_unknown();

    FieldReader cat(r.child("catalog"), "catalog");
    cat.read("n_files", c.catalog.n_files);
    cat.read("file_size_bits", c.catalog.file_size_bits);
    cat.read("zipf_beta", c.catalog.zipf_beta);
    cat.reject_unknown();

    r.reject_unknown();
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return config_from_json(json(nullptr));
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DomainError("cannot parse " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config(const ScenarioConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << config_to_json(config).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Presets

void apply_sweep(ScenarioConfig& config, const std::string& param, double value) {
    if (param == "none") return;
    if (param == "delivery_rate") {
        require(value >= 0.0, "sweep delivery_rate must be >= 0");
        config.delivery_rate = value;
    } else if (param == "beta") {
        require(value >= 0.0 && value <= 1.0, "sweep beta must be in [0,1]");
        config.catalog.zipf_beta = value;
        config.beta_s = value;
    } else if (param == "n_s") {
        require(value >= 1.0 && value == std::floor(value), "sweep n_s must be a positive integer");
        config.n_s = static_cast<int>(value);
        config.catalog.n_files = 100 * config.n_s;
    } else {
        throw DomainError("unknown sweep parameter '" + param + "'");
    }
}

void ExperimentPreset::validate() const {
    const auto names = preset_names();
    require(std::ranges::find(names, name) != names.end(), "unknown preset '" + name + "'");
    require(!values.empty(), "preset needs at least one sweep value");
    ScenarioConfig probe;
    for (double v : values) apply_sweep(probe, sweep_param, v);
}

std::vector<std::string> preset_names() { return {"fig2", "fig4a", "fig4b", "fig5a", "fig5b", "custom"}; }

ExperimentPreset make_preset(const std::string& name) {
    ExperimentPreset p;
    p.name = name;
    if (name == "fig2") {
        p.overrides = {{"users_per_cell", 1}};
    } else if (name == "fig4a") {
        p.sweep_param = "delivery_rate";
        p.values = {0.4e6, 0.8e6, 1.2e6, 1.6e6, 2.0e6};
        p.overrides = {{"beta_s", 1.0}, {"catalog", {{"zipf_beta", 1.0}}}};
    } else if (name == "fig4b" || name == "fig5b") {
        p.sweep_param = "beta";
        p.values = {0.0, 0.25, 0.5, 0.75, 1.0};
        p.overrides = {{"delivery_rate", 1.2e6}, {"n_s", 100}};
    } else if (name == "fig5a") {
        p.sweep_param = "n_s";
        p.values = {50, 100, 200, 400};
        p.overrides = {{"beta_s", 1.0}, {"catalog", {{"zipf_beta", 1.0}}}};
    } else if (name != "custom") {
        throw DomainError("unknown preset '" + name + "'");
    }
    return p;
}

ScenarioConfig preset_config(const ExperimentPreset& preset, const ScenarioConfig& base) {
    json j = config_to_json(base);
    j.merge_patch(preset.overrides);
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Records

namespace {

json summary_json(const MetricSummary& m) {
    return {{"mean", m.mean}, {"se", m.std_error}, {"ci_low", m.ci_low}, {"ci_high", m.ci_high}, {"n", m.n}};
}

json number_or_string(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

double number_from(const json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

void write_text_atomically(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

json RunRecord::to_json() const {
    json j;
    j["artifact_version"] = version;
    j["preset"] = {{"name", preset.name},
                   {"sweep_param", preset.sweep_param},
                   {"values", preset.values},
                   {"overrides", preset.overrides}};
    j["config"] = config_to_json(config);
    j["master_seed"] = config.master_seed;
    j["options"] = {{"n_trials", options.n_trials},
                    {"threads", options.threads},
                    {"fig2_push_bits", options.fig2_push_bits}};
    j["points"] = json::array();
    for (const auto& p : points) {
        json pj = {{"sweep_value", p.value}, {"strategies", json::array()}};
        for (const auto& s : p.strategies) {
            pj["strategies"].push_back({{"strategy", std::string(to_string(s.strategy))},
                                        {"throughput_bps", summary_json(s.throughput)},
                                        {"total_energy_J", summary_json(s.total_energy)},
                                        {"push_energy_J", summary_json(s.push_energy)},
                                        {"delivery_energy_J", summary_json(s.delivery_energy)},
                                        {"cache_hit_rate", summary_json(s.cache_hit_rate)},
                                        {"delivered_bits", summary_json(s.delivered_bits)},
                                        {"plan_feasible_fraction", summary_json(s.plan_feasible_fraction)}});
        }
        j["points"].push_back(std::move(pj));
    }
    if (preset.name == "fig2") {
        j["episodes"] = static_cast<int>(episodes.size()) + infeasible_episodes;
        j["infeasible_episodes"] = infeasible_episodes;
        json eps = json::array();
        for (const auto& e : episodes)
            eps.push_back({{"episode", e.episode},
                           {"nu_star", e.nu_star},
                           {"nu_hat", e.nu_hat},
                           {"gth_star", number_or_string(e.gth_star)},
                           {"gth_hat", number_or_string(e.gth_hat)},
                           {"oracle_energy_J", e.oracle_energy},
                           {"realized_energy_J", e.realized_energy},
                           {"realized_bits", e.realized_bits}});
        j["episode_results"] = std::move(eps);
    }
    j["csv"] = csv_path.filename().string();
    j["wall_clock_seconds"] = wall_clock_seconds;
    return j;
}

ReplaySpec replay_from_record(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open run record " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DomainError("cannot parse " + path.string() + ": " + e.what());
    }
    ReplaySpec r;
    try {
        const auto& p = j.at("preset");
        r.preset.name = p.at("name").get<std::string>();
        r.preset.sweep_param = p.at("sweep_param").get<std::string>();
        r.preset.values = p.at("values").get<std::vector<double>>();
        r.preset.overrides = p.at("overrides");
        r.config = config_from_json(j.at("config"));
        const auto& o = j.at("options");
        r.options.n_trials = o.at("n_trials").get<int>();
        r.options.threads = o.at("threads").get<int>();
        r.options.fig2_push_bits = number_from(o.at("fig2_push_bits"));
    } catch (const json::exception& e) {
        throw DomainError("malformed run record " + path.string() + ": " + e.what());
    }
    r.preset.validate();
    return r;
}

// ---------------------------------------------------------------------------
// Runs

RunRecord run_preset(const ExperimentPreset& preset, const ScenarioConfig& base,
                     const std::filesystem::path& out_dir, const RunOptions& options) {
    if (preset.name == "fig2") return run_fig2(preset_config(preset, base), out_dir, options);
    preset.validate();
    require(options.n_trials >= 1, "trial count must be >= 1");
    const auto start = std::chrono::steady_clock::now();

    RunRecord record;
    record.version = artifact_version();
    record.preset = preset;
    record.options = options;
    record.config = preset_config(preset, base);
    record.config.n_trials = options.n_trials;

    std::filesystem::create_directories(out_dir);
    record.csv_path = out_dir / (preset.name + ".csv");
    const auto sidecar = out_dir / (preset.name + ".run.json");
    std::ofstream csv(record.csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + record.csv_path.string());
    csv << kSweepCsvHeader << '\n';

    for (double v : preset.values) {
        ScenarioConfig c = record.config;
        apply_sweep(c, preset.sweep_param, v);
        c.validate();
        Deployment dep = build_deployment(c);
        if (options.threads > 1)
            solve_deployment_plans_parallel(dep, c, options.threads);
        else
            solve_deployment_plans(dep, c);

        SweepPoint point{v, monte_carlo(c, dep, kAllStrategies, options.n_trials, options.threads)};
        for (const auto& s : point.strategies) {
            csv << format_double(v) << ',' << to_string(s.strategy) << ','
                << format_double(s.throughput.mean) << ',' << format_double(s.throughput.std_error) << ','
                << format_double(s.total_energy.mean) << ',' << format_double(s.total_energy.std_error)
                << ',' << format_double(s.cache_hit_rate.mean) << '\n';
        }
        csv.flush();
        record.points.push_back(std::move(point));
        record.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_text_atomically(sidecar, record.to_json().dump(2) + '\n');
    }
    return record;
}

RunRecord run_fig2(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                   const RunOptions& options) {
    require(options.n_trials >= 1, "episode count must be >= 1");
    require(options.fig2_push_bits > 0.0, "fig2 push volume must be > 0");
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    RunRecord record;
    record.version = artifact_version();
    record.preset = make_preset("fig2");
    record.options = options;
    record.config = config;
    record.config.n_trials = options.n_trials;

    auto results = run_single_user_episodes(config, options.fig2_push_bits, options.n_trials, options.threads);
    for (auto& r : results) {
        if (r.feasible)
            record.episodes.push_back(r);
        else
            ++record.infeasible_episodes;
    }

    std::filesystem::create_directories(out_dir);
    record.csv_path = out_dir / "fig2.csv";
    {
        std::ofstream csv(record.csv_path, std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write " + record.csv_path.string());
        csv << kFig2CsvHeader << '\n';
        for (const auto& e : record.episodes)
            csv << e.episode << ',' << format_double(e.nu_star) << ',' << format_double(e.nu_hat) << ','
                << format_double(e.gth_star) << ',' << format_double(e.gth_hat) << '\n';
    }
    {
        // Empirical CDFs: each column sorted on its own, cdf = rank / n.
        auto column = [&](double EpisodeResult::*f) {
            std::vector<double> v;
            for (const auto& e : record.episodes) v.push_back(e.*f);
            std::ranges::sort(v);
            return v;
        };
        const auto ns = column(&EpisodeResult::nu_star);
        const auto nh = column(&EpisodeResult::nu_hat);
        const auto gs = column(&EpisodeResult::gth_star);
        const auto gh = column(&EpisodeResult::gth_hat);
        std::ofstream cdf(out_dir / "fig2_cdf.csv", std::ios::binary);
        cdf << "cdf,nu_star,nu_hat,gth_star,gth_hat\n";
        const std::size_t n = ns.size();
        for (std::size_t i = 0; i < n; ++i)
            cdf << format_double(static_cast<double>(i + 1) / n) << ',' << format_double(ns[i]) << ','
                << format_double(nh[i]) << ',' << format_double(gs[i]) << ',' << format_double(gh[i]) << '\n';
    }
    record.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text_atomically(out_dir / "fig2.run.json", record.to_json().dump(2) + '\n');
    return record;
}

}  // namespace pushsim
