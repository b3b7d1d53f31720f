#pragma once

#include <cstdint>
#include <vector>

#include "pushsim/context.hpp"
#include "pushsim/scenario.hpp"
#include "pushsim/waterfill.hpp"

namespace pushsim {

/// One user alone in the center cell (K = 1) with a fresh trajectory, RT
/// realization and fading realization per episode.
struct SingleUserEpisode {
    UserContext user;
    std::vector<SlotState> slots;  // realized off-peak window
    PushTarget target;
};

SingleUserEpisode make_single_user_episode(const ScenarioConfig& config, const NetworkContext& network,
                                           double push_bits, int episode);

/// Network context used by every episode of an experiment.
NetworkContext single_user_network(const ScenarioConfig& config);

struct EpisodeResult {
    int episode = 0;
    bool feasible = false;
    double nu_star = 0.0;   // offline oracle
    double nu_hat = 0.0;    // context-driven plan
    double gth_star = 0.0;
    double gth_hat = 0.0;
    double oracle_energy = 0.0;   // J
    double realized_energy = 0.0; // J, plan applied to the realized slots
    double realized_bits = 0.0;
    double target_bits = 0.0;
    int oracle_idle_slots = 0;
    int plan_idle_slots = 0;
};

EpisodeResult run_single_user_episode(const ScenarioConfig& config, const NetworkContext& network,
                                      double push_bits, int episode);

/// Episodes 0..n-1. threads <= 1 runs the serial reference loop.
std::vector<EpisodeResult> run_single_user_episodes(const ScenarioConfig& config, double push_bits,
                                                    int n_episodes, int threads = 1);

/// |a - b| / |b|, with equal values (both +inf included) at 0 and a single
/// infinite side at +inf.
double relative_gap(double a, double b);

}  // namespace pushsim
