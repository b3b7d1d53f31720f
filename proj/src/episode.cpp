#include "pushsim/episode.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pushsim/errors.hpp"

namespace pushsim {

NetworkContext single_user_network(const ScenarioConfig& config) {
    Rng rng = make_rng(config.master_seed, {tag(Stream::Occupancy)});
    return estimate_occupancy(config.rt, config.offpeak_frames(), config.occupancy_warmup_slots, rng);
}

SingleUserEpisode make_single_user_episode(const ScenarioConfig& config, const NetworkContext& network,
                                           double push_bits, int episode) {
    config.validate();
    require(network.occupancy.n_frames() == config.offpeak_frames(),
            "network context does not match the off-peak frame count");
    const auto ep = static_cast<std::uint64_t>(episode);
    const CellLayout layout = build_layout(config);
    const HexCell home = layout.cell(0);
    const double w_max = config.path_loss.max_bandwidth;

    SingleUserEpisode out;
    Rng traj_rng = make_rng(config.master_seed, {tag(Stream::Episode), ep, tag(Stream::Trajectory)});
    const Trajectory traj = sample_trajectory(home, config.min_distance_lo, config.min_distance_hi,
                                              config.speed, traj_rng);
    out.user = build_user_context(traj, home, layout.sbs_positions, config.path_loss,
                                  config.n_antennas, config.offpeak_frames(), config.frame_duration());
    out.target = {push_bits, config.offpeak_slots(), config.slot_duration};

    Rng rt_rng = make_rng(config.master_seed, {tag(Stream::Episode), ep, tag(Stream::OffpeakRt)});
    Rng fade_rng = make_rng(config.master_seed, {tag(Stream::Episode), ep, tag(Stream::OffpeakFading)});
    int active = 0;
    for (int i = 0; i < 100; ++i) active = step_rt_queue(active, config.rt, rt_rng);
    out.slots.reserve(config.offpeak_slots());
    for (long t = 0; t < config.offpeak_slots(); ++t) {
        const int j = static_cast<int>(t / config.slots_per_frame);
        active = step_rt_queue(active, config.rt, rt_rng);
        const RtReservation rt = rt_reservation(active, config.rt, config.power.p_max, w_max);
        const double h = sample_h_norm_sq(config.n_antennas, fade_rng);
        const double gt = equivalent_gain_tilde(out.user.frame_gains[j], h, config.path_loss);
        out.slots.push_back(SlotState::from_tilde(gt, rt, w_max));
    }
    return out;
}

EpisodeResult run_single_user_episode(const ScenarioConfig& config, const NetworkContext& network,
                                      double push_bits, int episode) {
    const SingleUserEpisode ep = make_single_user_episode(config, network, push_bits, episode);
    const double w_max = config.path_loss.max_bandwidth;
    EpisodeResult r;
    r.episode = episode;
    r.target_bits = push_bits;
    try {
        const OfflineSolution oracle = solve_offline_oracle(ep.slots, ep.target, config.power, w_max);
        const WaterfillPlan plan = solve_plan(network.occupancy, ep.user, ep.target, config.power, w_max);
        const RealizedPush realized = apply_plan(ep.slots, plan, config.power, w_max, config.slot_duration);
        r.feasible = true;
        r.nu_star = oracle.plan.nu;
        r.gth_star = oracle.plan.g_th;
        r.nu_hat = plan.nu;
        r.gth_hat = plan.g_th;
        r.oracle_energy = oracle.energy;
        r.oracle_idle_slots = oracle.idle_slots_used;
        r.realized_energy = realized.energy;
        r.realized_bits = realized.nats / std::numbers::ln2;
        r.plan_idle_slots = realized.idle_slots_used;
    } catch (const InfeasibleError&) {
        r.feasible = false;
    }
    return r;
}

std::vector<EpisodeResult> run_single_user_episodes(const ScenarioConfig& config, double push_bits,
                                                    int n_episodes, int threads) {
    require(n_episodes >= 1, "episode count must be >= 1");
    const NetworkContext network = single_user_network(config);
    std::vector<EpisodeResult> out(n_episodes);
    if (threads <= 1) {
        for (int e = 0; e < n_episodes; ++e) out[e] = run_single_user_episode(config, network, push_bits, e);
    } else {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (int e = 0; e < n_episodes; ++e) out[e] = run_single_user_episode(config, network, push_bits, e);
    }
    return out;
}

double relative_gap(double a, double b) {
    if (a == b) return 0.0;
    if (std::isinf(a) || std::isinf(b)) return std::numeric_limits<double>::infinity();
    return std::abs(a - b) / std::abs(b);
}

}  // namespace pushsim
