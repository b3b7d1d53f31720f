#include "pushsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pushsim/errors.hpp"

namespace pushsim {

namespace {

constexpr int kRtBurnIn = 100;

int serving_cell(const UserContext& ctx, int frame) {
    return ctx.serving_cell[std::min(frame, ctx.n_frames() - 1)];
}

// residents[frame][cell] = users served by that cell in that frame.
std::vector<std::vector<std::vector<int>>> residents_by_frame(const std::vector<UserSetup>& users,
                                                              int n_cells, int n_frames,
                                                              bool peak) {
    std::vector<std::vector<std::vector<int>>> out(n_frames, std::vector<std::vector<int>>(n_cells));
    for (int u = 0; u < static_cast<int>(users.size()); ++u) {
        const auto& ctx = peak ? users[u].peak : users[u].offpeak;
        for (int j = 0; j < n_frames; ++j) out[j][serving_cell(ctx, j)].push_back(u);
    }
    return out;
}

int warm_rt(const RTTrafficModel& model, Rng& rng) {
    int active = 0;
    for (int i = 0; i < kRtBurnIn; ++i) active = step_rt_queue(active, model, rng);
    return active;
}

void check_slot_feasible(double p, const SlotState& slot, const PowerModel& power) {
    if (p < 0.0 || p > power.p_max - slot.p_rt + 1e-12) {
        std::ostringstream msg;
        msg << "slot power " << p << " outside [0, " << power.p_max - slot.p_rt << "]";
        throw std::logic_error(msg.str());
    }
}

std::vector<int> cached_prefix(const UserInterestProfile& profile, int n) {
    std::vector<int> files(profile.subset.begin(),
                           profile.subset.begin() + std::min<std::size_t>(n, profile.subset.size()));
    std::ranges::sort(files);
    return files;
}

}  // namespace

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Unicast: return "unicast";
        case Strategy::Broadcast: return "broadcast";
        case Strategy::Baseline: return "baseline";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    for (auto s : kAllStrategies)
        if (to_string(s) == name) return s;
    throw DomainError("unknown strategy '" + std::string(name) + "'");
}

Deployment build_deployment(const ScenarioConfig& config) {
    config.validate();
    Deployment dep;
    dep.layout = build_layout(config);
    const int n_cells = dep.layout.n_cells();
    const int off_frames = config.offpeak_frames();
    const int peak_frames = config.peak_frames();

    Rng occ_rng = make_rng(config.master_seed, {tag(Stream::Occupancy)});
    dep.network = estimate_occupancy(config.rt, off_frames, config.occupancy_warmup_slots, occ_rng);

    for (int c = 0; c < n_cells; ++c) {
        const HexCell cell = dep.layout.cell(c);
        for (int k = 0; k < config.users_per_cell; ++k) {
            const auto index = static_cast<std::uint64_t>(dep.users.size());
            UserSetup u;
            u.home_cell = c;
            Rng traj_rng = make_rng(config.master_seed, {tag(Stream::Trajectory), index});
            u.trajectory = sample_trajectory(cell, config.min_distance_lo, config.min_distance_hi,
                                             config.speed, traj_rng);
            Rng prof_rng = make_rng(config.master_seed, {tag(Stream::Profiles), index});
            u.profile = sample_user_subset(config.catalog, config.n_s, config.beta_s, prof_rng);
            u.offpeak = build_user_context(u.trajectory, cell, dep.layout.sbs_positions,
                                           config.path_loss, config.n_antennas, off_frames,
                                           config.frame_duration());
            u.peak = build_user_context(u.trajectory, cell, dep.layout.sbs_positions,
                                        config.path_loss, config.n_antennas, peak_frames,
                                        config.frame_duration(), config.offpeak_duration);
            dep.users.push_back(std::move(u));
        }
    }

    dep.users_per_cell_frame.assign(n_cells, std::vector<int>(off_frames, 0));
    for (const auto& u : dep.users)
        for (int j = 0; j < off_frames; ++j) ++dep.users_per_cell_frame[u.offpeak.serving_cell[j]][j];
    dep.plans.assign(dep.users.size(), std::nullopt);
    return dep;
}

ScaledContext user_scaled_context(const Deployment& deployment, int user) {
    const auto& ctx = deployment.users.at(user).offpeak;
    std::vector<int> k(ctx.n_frames());
    for (int j = 0; j < ctx.n_frames(); ++j) k[j] = deployment.users_per_cell_frame[ctx.serving_cell[j]][j];
    return scale_for_multiuser(deployment.network, k);
}

PushTarget unicast_push_target(const ScenarioConfig& config) {
    return {config.push_bits_per_user(), config.offpeak_slots(), config.slot_duration};
}

namespace {

std::optional<WaterfillPlan> solve_user_plan(const Deployment& dep, const ScenarioConfig& config,
                                             int user) {
    const ScaledContext scaled = user_scaled_context(dep, user);
    try {
        return solve_plan(scaled.occupancy, dep.users[user].offpeak, unicast_push_target(config),
                          config.power, config.path_loss.max_bandwidth);
    } catch (const InfeasibleError&) {
        return std::nullopt;
    }
}

}  // namespace

void solve_deployment_plans(Deployment& deployment, const ScenarioConfig& config) {
    deployment.plans.assign(deployment.users.size(), std::nullopt);
    for (int u = 0; u < static_cast<int>(deployment.users.size()); ++u)
        deployment.plans[u] = solve_user_plan(deployment, config, u);
}

void solve_deployment_plans_parallel(Deployment& deployment, const ScenarioConfig& config,
                                     int threads) {
    const int n = static_cast<int>(deployment.users.size());
    deployment.plans.assign(n, std::nullopt);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(threads, 1))
    for (int u = 0; u < n; ++u) deployment.plans[u] = solve_user_plan(deployment, config, u);
}

OffpeakResult run_offpeak_unicast(const ScenarioConfig& config, const Deployment& deployment,
                                  std::uint64_t seed) {
    const auto& users = deployment.users;
    const int n_users = static_cast<int>(users.size());
    const int n_cells = deployment.layout.n_cells();
    const int n_frames = config.offpeak_frames();
    const long n_slots = config.offpeak_slots();
    const double w_max = config.path_loss.max_bandwidth;
    const double dt = config.slot_duration;
    const double target_bits = config.push_bits_per_user();

    OffpeakResult out;
    out.pushed_bits.assign(n_users, 0.0);
    out.caches.assign(n_users, {});
    if (n_users == 0) return out;

    std::vector<WaterfillPlan> plans(n_users);
    for (int u = 0; u < n_users; ++u) {
        const bool solved = u < static_cast<int>(deployment.plans.size()) && deployment.plans[u];
        plans[u] = solved ? *deployment.plans[u] : full_power_plan(config.power);
    }
    std::vector<char> done(n_users, 0);
    const auto residents = residents_by_frame(users, n_cells, n_frames, false);

    struct Candidate {
        int user;
        SlotState slot;
        double p;
    };
    std::vector<Candidate> conflict;
    std::vector<double> cell_energy(n_cells, 0.0);

    for (int c = 0; c < n_cells; ++c) {
        const auto cs = static_cast<std::uint64_t>(c);
        Rng rt_rng = make_rng(seed, {tag(Stream::OffpeakRt), cs});
        Rng fade_rng = make_rng(seed, {tag(Stream::OffpeakFading), cs});
        Rng sched_rng = make_rng(seed, {tag(Stream::OffpeakScheduler), cs});
        int active = warm_rt(config.rt, rt_rng);

        for (long t = 0; t < n_slots; ++t) {
            const int j = static_cast<int>(t / config.slots_per_frame);
            active = step_rt_queue(active, config.rt, rt_rng);
            const RtReservation rt = rt_reservation(active, config.rt, config.power.p_max, w_max);

            conflict.clear();
            for (int u : residents[j][c]) {
                if (done[u]) continue;
                const double h = sample_h_norm_sq(config.n_antennas, fade_rng);
                const double gt = equivalent_gain_tilde(users[u].offpeak.frame_gains[j], h, config.path_loss);
                const SlotState slot = SlotState::from_tilde(gt, rt, w_max);
                const double p = allocate_slot_power(slot, plans[u], config.power, w_max);
                if (p > 0.0) conflict.push_back({u, slot, p});
            }
            if (conflict.empty()) continue;

            std::uniform_int_distribution<std::size_t> pick(0, conflict.size() - 1);
            const Candidate& chosen = conflict[pick(sched_rng)];
            check_slot_feasible(chosen.p, chosen.slot, config.power);
            const double e = slot_push_power_total(chosen.p, chosen.slot, config.power) * dt;
            cell_energy[c] += e;
            out.audit_energy += e;
            out.pushed_bits[chosen.user] += slot_rate(chosen.slot, chosen.p) * dt / std::numbers::ln2;
            if (out.pushed_bits[chosen.user] >= target_bits) done[chosen.user] = 1;
        }
    }

    out.ledger.push_energy = std::accumulate(cell_energy.begin(), cell_energy.end(), 0.0);
    int completed = 0;
    for (int u = 0; u < n_users; ++u) {
        const double frac = std::min(1.0, out.pushed_bits[u] / target_bits);
        if (done[u]) ++completed;
        const int n_files = done[u] ? config.cache_files_unicast
                                    : static_cast<int>(std::floor(config.cache_files_unicast * frac));
        out.caches[u] = cached_prefix(users[u].profile, n_files);
    }
    out.completed_fraction = static_cast<double>(completed) / n_users;
    return out;
}

CacheState run_offpeak_broadcast(const ScenarioConfig& config, std::size_t n_users) {
    std::vector<int> top(config.cache_files_broadcast);
    std::iota(top.begin(), top.end(), 1);
    return CacheState(n_users, top);
}

PeakResult run_peak_delivery(const ScenarioConfig& config, const Deployment& deployment,
                             const CacheState& caches, std::uint64_t seed) {
    const auto& users = deployment.users;
    const int n_users = static_cast<int>(users.size());
    const int n_cells = deployment.layout.n_cells();
    const long n_slots = config.peak_slots();
    const double w_max = config.path_loss.max_bandwidth;
    const double dt = config.slot_duration;
    const double file_bits = config.catalog.file_size_bits;
    require(caches.size() == users.size(), "one cache per user required");

    struct Pending {
        int arrival_slot;
        int user;
        double remaining;
    };
    std::vector<Pending> pending;
    PeakResult out;
    const DeliveryProcess process = config.delivery_process();
    for (int u = 0; u < n_users; ++u) {
        Rng req_rng = make_rng(seed, {tag(Stream::Requests), static_cast<std::uint64_t>(u)});
        const auto requests =
            generate_delivery_requests(users[u].profile, process, file_bits, dt, req_rng);
        for (const auto& r : requests) {
            ++out.n_requests;
            if (std::ranges::binary_search(caches[u], r.file)) {
                ++out.n_hits;
                out.delivered_bits += file_bits;
            } else {
                pending.push_back({r.arrival_slot, u, file_bits});
            }
        }
    }
    std::ranges::stable_sort(pending, {}, &Pending::arrival_slot);

    std::vector<Rng> rt_rng, fade_rng;
    std::vector<int> active(n_cells);
    for (int c = 0; c < n_cells; ++c) {
        const auto cs = static_cast<std::uint64_t>(c);
        rt_rng.push_back(make_rng(seed, {tag(Stream::PeakRt), cs}));
        fade_rng.push_back(make_rng(seed, {tag(Stream::PeakFading), cs}));
        active[c] = warm_rt(config.rt, rt_rng[c]);
    }
    std::vector<double> cell_energy(n_cells, 0.0);
    std::vector<int> head(n_cells);

    std::size_t first_open = 0;  // pending[0..first_open) are all finished
    for (long t = 0; t < n_slots; ++t) {
        const int j = static_cast<int>(t / config.slots_per_frame);
        for (int c = 0; c < n_cells; ++c) active[c] = step_rt_queue(active[c], config.rt, rt_rng[c]);

        // FIFO head per cell: earliest arrived, unfinished request of a resident user.
        std::ranges::fill(head, -1);
        int unassigned = n_cells;
        for (std::size_t i = first_open; i < pending.size() && unassigned > 0; ++i) {
            const Pending& q = pending[i];
            if (q.arrival_slot > t) break;
            if (q.remaining <= 0.0) continue;
            const int c = serving_cell(users[q.user].peak, j);
            if (head[c] < 0) {
                head[c] = static_cast<int>(i);
                --unassigned;
            }
        }

        for (int c = 0; c < n_cells; ++c) {
            if (head[c] < 0) continue;
            const RtReservation rt = rt_reservation(active[c], config.rt, config.power.p_max, w_max);
            const double p = config.power.p_max - rt.p_rt;
            if (rt.w_available <= 0.0 || p <= 0.0) continue;
            Pending& q = pending[head[c]];
            const double h = sample_h_norm_sq(config.n_antennas, fade_rng[c]);
            const double gt = equivalent_gain_tilde(users[q.user].peak.frame_gains[j], h, config.path_loss);
            const SlotState slot = SlotState::from_tilde(gt, rt, w_max);
            check_slot_feasible(p, slot, config.power);
            const double e = slot_push_power_total(p, slot, config.power) * dt;
            cell_energy[c] += e;
            out.audit_energy += e;
            const double bits = std::min(q.remaining, slot_rate(slot, p) * dt / std::numbers::ln2);
            q.remaining -= bits;
            out.delivered_bits += bits;
            if (q.remaining <= 0.0) q.remaining = 0.0;
        }
        while (first_open < pending.size() && pending[first_open].remaining <= 0.0) ++first_open;
    }
    out.ledger.delivery_energy = std::accumulate(cell_energy.begin(), cell_energy.end(), 0.0);
    return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
    return derive_seed(master_seed, {tag(Stream::Trial), static_cast<std::uint64_t>(trial)});
}

TrialMetrics run_trial(const ScenarioConfig& config, const Deployment& deployment, Strategy strategy,
                       std::uint64_t seed) {
    TrialMetrics m;
    CacheState caches;
    switch (strategy) {
        case Strategy::Unicast: {
            OffpeakResult off = run_offpeak_unicast(config, deployment, seed);
            m.push_energy = off.ledger.push_energy;
            m.plan_feasible_fraction = off.completed_fraction;
            caches = std::move(off.caches);
            break;
        }
        case Strategy::Broadcast:
            caches = run_offpeak_broadcast(config, deployment.users.size());
            break;
        case Strategy::Baseline:
            caches.assign(deployment.users.size(), {});
            break;
    }
    const PeakResult peak = run_peak_delivery(config, deployment, caches, seed);
    m.delivered_bits = peak.delivered_bits;
    m.throughput = peak.delivered_bits / config.peak_duration;
    m.delivery_energy = peak.ledger.delivery_energy;
    m.total_energy = m.push_energy + m.delivery_energy;
    m.n_requests = peak.n_requests;
    m.cache_hit_rate = peak.n_requests > 0 ? static_cast<double>(peak.n_hits) / peak.n_requests : 0.0;
    return m;
}

TrialMetrics run_trial(const ScenarioConfig& config, Strategy strategy, std::uint64_t seed) {
    Deployment dep = build_deployment(config);
    if (strategy == Strategy::Unicast) solve_deployment_plans(dep, config);
    return run_trial(config, dep, strategy, seed);
}

MetricSummary summarize(std::span<const double> values) {
    require(!values.empty(), "summarize needs at least one value");
    MetricSummary s;
    s.n = static_cast<int>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std_error = std::sqrt(ss / (s.n - 1) / s.n);
    }
    s.ci_low = s.mean - 1.959963984540054 * s.std_error;
    s.ci_high = s.mean + 1.959963984540054 * s.std_error;
    return s;
}

StrategySummary summarize(Strategy strategy, std::vector<TrialMetrics> trials) {
    StrategySummary out;
    out.strategy = strategy;
    auto field = [&](double TrialMetrics::*f) {
        std::vector<double> v;
        v.reserve(trials.size());
        for (const auto& t : trials) v.push_back(t.*f);
        return summarize(v);
    };
    out.throughput = field(&TrialMetrics::throughput);
    out.total_energy = field(&TrialMetrics::total_energy);
    out.push_energy = field(&TrialMetrics::push_energy);
    out.delivery_energy = field(&TrialMetrics::delivery_energy);
    out.cache_hit_rate = field(&TrialMetrics::cache_hit_rate);
    out.delivered_bits = field(&TrialMetrics::delivered_bits);
    out.plan_feasible_fraction = field(&TrialMetrics::plan_feasible_fraction);
    out.trials = std::move(trials);
    return out;
}

std::vector<StrategySummary> monte_carlo(const ScenarioConfig& config, const Deployment& deployment,
                                         std::span<const Strategy> strategies, int n_trials,
                                         int threads) {
    require(n_trials >= 1, "n_trials must be >= 1");
    std::vector<StrategySummary> out;
    for (Strategy s : strategies) {
        std::vector<TrialMetrics> trials(n_trials);
        if (threads <= 1) {
            for (int i = 0; i < n_trials; ++i)
                trials[i] = run_trial(config, deployment, s, trial_seed(config.master_seed, i));
        } else {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
            for (int i = 0; i < n_trials; ++i)
                trials[i] = run_trial(config, deployment, s, trial_seed(config.master_seed, i));
        }
        out.push_back(summarize(s, std::move(trials)));
    }
    return out;
}

}  // namespace pushsim
