#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pushsim/context.hpp"
#include "pushsim/traffic.hpp"

namespace testsupport {

/// Context with `n_frames` frames whose users sit at the given distances.
inline pushsim::UserContext user_at_distances(const std::vector<double>& distances, int n_antennas = 4,
                                              const pushsim::PathLossParams& params = {}) {
    pushsim::UserContext u;
    for (double d : distances) {
        const double alpha = pushsim::large_scale_gain(d, params);
        u.frame_gains.push_back(alpha);
        u.channel_dists.push_back(pushsim::GammaChannelDist::from_gain(alpha, n_antennas, params));
        u.serving_cell.push_back(0);
    }
    return u;
}

/// Erlang-loss level row (index = free level l = L - n).
inline std::vector<double> erlang_levels(const pushsim::RTTrafficModel& model = {}) {
    auto byn = pushsim::erlang_loss_distribution(model);
    std::reverse(byn.begin(), byn.end());
    return byn;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace testsupport
