#pragma once

#include <cstdint>

#include "pushsim/context.hpp"
#include "pushsim/waterfill.hpp"

namespace pushsim {

/// Monte Carlo estimate of the per-slot expected push power (W, transmit/xi
/// plus wake cost) and rate (nats/s) under (occupancy, user) context: frames in turn,
/// level from the frame's normalized row weighted by the row mass,
/// small-scale fading from the frame's Gamma law.
struct SampledBreakdown {
    double power = 0.0;
    double rate = 0.0;
    long samples = 0;
};

inline constexpr long kSamplingChunk = 1 << 14;

/// Serial reference. Chunk c draws from derive_seed(seed, {Sampling, c}) and
/// chunk sums are combined in chunk order.
SampledBreakdown sample_breakdown_serial(const WaterfillPlan& plan, const OccupancyMatrix& occupancy,
                                         const UserContext& user, const PowerModel& power,
                                         double w_max, long n_samples, std::uint64_t seed);

/// OpenMP version; bit-identical to the serial one for any thread count.
SampledBreakdown sample_breakdown_parallel(const WaterfillPlan& plan, const OccupancyMatrix& occupancy,
                                           const UserContext& user, const PowerModel& power,
                                           double w_max, long n_samples, std::uint64_t seed,
                                           int threads);

}  // namespace pushsim
