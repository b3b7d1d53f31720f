#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pushsim/context.hpp"
#include "pushsim/scenario.hpp"
#include "pushsim/waterfill.hpp"

namespace pushsim {

enum class Strategy { Unicast, Broadcast, Baseline };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);
inline constexpr Strategy kAllStrategies[] = {Strategy::Unicast, Strategy::Broadcast,
                                              Strategy::Baseline};

/// Everything that stays fixed across the trials of one experiment.
struct UserSetup {
    int home_cell = 0;
    Trajectory trajectory;
    UserInterestProfile profile;
    UserContext offpeak;  // per off-peak frame
    UserContext peak;     // per peak frame
};

struct Deployment {
    CellLayout layout;
    NetworkContext network;
    std::vector<UserSetup> users;
    /// Per user: the plan from its scaled context, or nullopt when the solver
    /// reports the push target infeasible.
    std::vector<std::optional<WaterfillPlan>> plans;

    /// K_i^j: users served by cell i in off-peak frame j.
    std::vector<std::vector<int>> users_per_cell_frame;
};

/// Builds layout, trajectories, profiles and contexts from config.master_seed.
/// Plans are left empty; see solve_deployment_plans.
Deployment build_deployment(const ScenarioConfig& config);

/// Scaled context for one user (its occupancy rows divided by K_i^j).
ScaledContext user_scaled_context(const Deployment& deployment, int user);

/// Solves all unicast plans (serially).
void solve_deployment_plans(Deployment& deployment, const ScenarioConfig& config);

/// The same, with users spread over OpenMP threads.
void solve_deployment_plans_parallel(Deployment& deployment, const ScenarioConfig& config,
                                     int threads);

PushTarget unicast_push_target(const ScenarioConfig& config);

using CacheState = std::vector<std::vector<int>>;  // per user, sorted catalog indices

struct EnergyLedger {
    double push_energy = 0.0;
    double delivery_energy = 0.0;

    double total() const { return push_energy + delivery_energy; }
};

struct OffpeakResult {
    CacheState caches;
    EnergyLedger ledger;
    std::vector<double> pushed_bits;  // per user
    double completed_fraction = 0.0;  // users that finished their push target
    /// Sum over slots of slot_push_power_total * slot_duration, recomputed
    /// independently of the ledger for the accounting identity.
    double audit_energy = 0.0;
};

/// Context-driven unicast pushing with a random scheduler over each cell's
/// conflict set.
OffpeakResult run_offpeak_unicast(const ScenarioConfig& config, const Deployment& deployment,
                                  std::uint64_t trial_seed);

/// Every user caches the globally most popular files; broadcast energy is not counted.
CacheState run_offpeak_broadcast(const ScenarioConfig& config, std::size_t n_users);

struct PeakResult {
    double delivered_bits = 0.0;
    int n_requests = 0;
    int n_hits = 0;
    EnergyLedger ledger;
    double audit_energy = 0.0;
};

/// Delivery of the peak-time requests. Hits cost nothing; misses are served
/// FIFO per SBS at full residual power, one MS per SBS per slot.
PeakResult run_peak_delivery(const ScenarioConfig& config, const Deployment& deployment,
                             const CacheState& caches, std::uint64_t trial_seed);

struct TrialMetrics {
    double delivered_bits = 0.0;
    double throughput = 0.0;  // bits/s over the peak window
    double push_energy = 0.0;
    double delivery_energy = 0.0;
    double total_energy = 0.0;
    double cache_hit_rate = 0.0;
    double plan_feasible_fraction = 1.0;
    int n_requests = 0;

    friend bool operator==(const TrialMetrics&, const TrialMetrics&) = default;
};

std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

TrialMetrics run_trial(const ScenarioConfig& config, const Deployment& deployment, Strategy strategy,
                       std::uint64_t trial_seed);

/// Convenience overload that builds (and plans) the deployment itself.
TrialMetrics run_trial(const ScenarioConfig& config, Strategy strategy, std::uint64_t trial_seed);

struct MetricSummary {
    double mean = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n = 0;

    bool overlaps(const MetricSummary& other) const {
        return ci_low <= other.ci_high && other.ci_low <= ci_high;
    }
};

MetricSummary summarize(std::span<const double> values);

struct StrategySummary {
    Strategy strategy = Strategy::Unicast;
    MetricSummary throughput;
    MetricSummary total_energy;
    MetricSummary push_energy;
    MetricSummary delivery_energy;
    MetricSummary cache_hit_rate;
    MetricSummary delivered_bits;
    MetricSummary plan_feasible_fraction;
    std::vector<TrialMetrics> trials;
};

StrategySummary summarize(Strategy strategy, std::vector<TrialMetrics> trials);

/// Runs n_trials per strategy with seeds derived from config.master_seed.
/// threads <= 1 runs the serial reference path.
std::vector<StrategySummary> monte_carlo(const ScenarioConfig& config, const Deployment& deployment,
                                         std::span<const Strategy> strategies, int n_trials,
                                         int threads = 1);

}  // namespace pushsim
