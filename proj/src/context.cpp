#include "pushsim/context.hpp"

#include <numeric>

#include "pushsim/errors.hpp"

namespace pushsim {

OccupancyMatrix::OccupancyMatrix(int n_frames, int capacity)
    : n_frames_(n_frames), capacity_(capacity),
      data_(static_cast<std::size_t>(n_frames) * (capacity + 1), 0.0) {
    require(n_frames >= 1, "occupancy matrix needs >= 1 frame");
    require(capacity >= 1, "occupancy matrix needs capacity >= 1");
}

std::span<const double> OccupancyMatrix::row(int frame) const {
    return {data_.data() + index(frame, 0), static_cast<std::size_t>(capacity_ + 1)};
}

double OccupancyMatrix::row_sum(int frame) const {
    const auto r = row(frame);
    return std::accumulate(r.begin(), r.end(), 0.0);
}

NetworkContext estimate_occupancy(const RTTrafficModel& model, int n_frames, long warmup_slots,
                                  Rng& rng) {
    model.validate();
    require(warmup_slots >= 10'000, "warmup_slots must be >= 1e4");
    const int cap = model.capacity();
    std::vector<long> counts(cap + 1, 0);
    int active = 0;
    for (int i = 0; i < 100; ++i) active = step_rt_queue(active, model, rng);
    for (long s = 0; s < warmup_slots; ++s) {
        active = step_rt_queue(active, model, rng);
        ++counts[cap - active];
    }
    std::vector<double> probs(cap + 1);
    for (int l = 0; l <= cap; ++l) probs[l] = static_cast<double>(counts[l]) / warmup_slots;
    return occupancy_from_levels(probs, n_frames);
}

NetworkContext occupancy_from_levels(std::span<const double> level_probs, int n_frames) {
    require(level_probs.size() >= 2, "need at least two occupancy levels");
    NetworkContext ctx{OccupancyMatrix(n_frames, static_cast<int>(level_probs.size()) - 1)};
    for (int j = 0; j < n_frames; ++j)
        for (std::size_t l = 0; l < level_probs.size(); ++l)
            ctx.occupancy(j, static_cast<int>(l)) = level_probs[l];
    return ctx;
}

int closest_site(Vec2 p, std::span<const Vec2> sites) {
    require(!sites.empty(), "no sites");
    int best = 0;
    double best_d = norm(p - sites[0]);
    for (std::size_t i = 1; i < sites.size(); ++i) {
        const double d = norm(p - sites[i]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

UserContext build_user_context(const Trajectory& trajectory, const HexCell& home_cell,
                               std::span<const Vec2> sbs_positions, const PathLossParams& params,
                               int n_antennas, int n_frames, double frame_duration, double t0) {
    trajectory.validate();
    require(n_frames >= 1, "n_frames must be >= 1");
    UserContext ctx;
    ctx.frame_gains.reserve(n_frames);
    ctx.channel_dists.reserve(n_frames);
    ctx.serving_cell.reserve(n_frames);
    for (int j = 0; j < n_frames; ++j) {
        const Vec2 p = position_at(trajectory, t0 + j * frame_duration, home_cell);
        const int site = closest_site(p, sbs_positions);
        const double alpha = large_scale_gain(norm(p - sbs_positions[site]), params);
        ctx.frame_gains.push_back(alpha);
        ctx.channel_dists.push_back(GammaChannelDist::from_gain(alpha, n_antennas, params));
        ctx.serving_cell.push_back(site);
    }
    return ctx;
}

ScaledContext scale_for_multiuser(const NetworkContext& ctx, std::span<const int> users_per_frame) {
    const auto& occ = ctx.occupancy;
    require(static_cast<int>(users_per_frame.size()) == occ.n_frames(),
            "one user count per frame required");
    ScaledContext out{occ, {users_per_frame.begin(), users_per_frame.end()}};
    for (int j = 0; j < occ.n_frames(); ++j) {
        const int k = users_per_frame[j];
        require(k >= 1, "users per cell per frame must be >= 1");
        if (k == 1) continue;
        for (int l = 0; l <= occ.capacity(); ++l) out.occupancy(j, l) = occ(j, l) / k;
    }
    return out;
}

}  // namespace pushsim
