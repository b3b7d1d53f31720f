#pragma once

#include <span>
#include <vector>

#include "pushsim/channel.hpp"
#include "pushsim/rng.hpp"
#include "pushsim/traffic.hpp"

namespace pushsim {

/// Row-major [frame][level] table of P(W = l/L * W_max), l = 0..L.
class OccupancyMatrix {
public:
    OccupancyMatrix() = default;
    OccupancyMatrix(int n_frames, int capacity);

    int n_frames() const { return n_frames_; }
    int capacity() const { return capacity_; }
    double operator()(int frame, int level) const { return data_[index(frame, level)]; }
    double& operator()(int frame, int level) { return data_[index(frame, level)]; }
    std::span<const double> row(int frame) const;
    double row_sum(int frame) const;

    friend bool operator==(const OccupancyMatrix&, const OccupancyMatrix&) = default;

private:
    std::size_t index(int frame, int level) const {
        return static_cast<std::size_t>(frame) * (capacity_ + 1) + level;
    }
    int n_frames_ = 0;
    int capacity_ = 0;
    std::vector<double> data_;
};

/// Network-level context: rows are probability distributions.
struct NetworkContext {
    OccupancyMatrix occupancy;
};

/// Network context seen by one of K users sharing an SBS: frame j's row is
/// divided by K_j, so rows sum to 1/K_j. The missing mass is "slot not
/// available to this user" and contributes nothing to rate or power.
struct ScaledContext {
    OccupancyMatrix occupancy;
    std::vector<int> users_per_frame;
};

struct UserContext {
    std::vector<double> frame_gains;  // alpha^j, linear
    std::vector<GammaChannelDist> channel_dists;
    std::vector<int> serving_cell;  // closest SBS per frame

    int n_frames() const { return static_cast<int>(frame_gains.size()); }
};

/// Empirical distribution of the free-bandwidth level l = L - n over
/// warmup_slots steps of the RT chain, replicated for every frame.
NetworkContext estimate_occupancy(const RTTrafficModel& model, int n_frames, long warmup_slots,
                                  Rng& rng);

/// Exact row (no sampling), from the RT chain's stationary law; used by tests
/// and by synthetic contexts.
NetworkContext occupancy_from_levels(std::span<const double> level_probs, int n_frames);

/// Index of the closest site; ties go to the lowest index.
int closest_site(Vec2 p, std::span<const Vec2> sites);

/// alpha^j is the path-loss gain to the closest SBS at the start of frame j
/// (time t0 + j * frame_duration).
UserContext build_user_context(const Trajectory& trajectory, const HexCell& home_cell,
                               std::span<const Vec2> sbs_positions, const PathLossParams& params,
                               int n_antennas, int n_frames, double frame_duration,
                               double t0 = 0.0);

ScaledContext scale_for_multiuser(const NetworkContext& ctx, std::span<const int> users_per_frame);

}  // namespace pushsim
