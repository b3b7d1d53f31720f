#include "pushsim/kernels.hpp"

#include <algorithm>
#include <random>
#include <vector>

#include "pushsim/errors.hpp"

namespace pushsim {

namespace {

struct ChunkSums {
    double power = 0.0;
    double rate = 0.0;
};

ChunkSums sample_chunk(const WaterfillPlan& plan, const OccupancyMatrix& occ, const UserContext& user,
                       const PowerModel& power, double w_max, long count, std::uint64_t seed,
                       long chunk) {
    Rng rng = make_rng(seed, {tag(Stream::Sampling), static_cast<std::uint64_t>(chunk)});
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int cap = occ.capacity();
    const long first = chunk * kSamplingChunk;
    std::vector<double> mass(user.n_frames());
    for (int j = 0; j < user.n_frames(); ++j) mass[j] = occ.row_sum(j);
    ChunkSums s;
    for (long i = 0; i < count; ++i) {
        // frames are stratified: sample k of the run uses frame k mod n_frames
        const int j = static_cast<int>((first + i) % user.n_frames());
        const GammaChannelDist& d = user.channel_dists[j];
        std::gamma_distribution<double> fading(d.shape, 1.0 / d.rate);
        const double g_tilde = fading(rng);

        // Level drawn from the normalized row; the sample is weighted by the
        // row mass (missing mass means the slot is not available).
        double v = unit(rng) * mass[j];
        int level = cap;
        for (int l = 0; l <= cap; ++l) {
            v -= occ(j, l);
            if (v < 0.0) {
                level = l;
                break;
            }
        }
        while (level > 0 && occ(j, level) == 0.0) --level;
        if (level <= 0) continue;

        RtReservation rt;
        rt.level = level;
        rt.w_available = static_cast<double>(level) / cap * w_max;
        rt.p_rt = static_cast<double>(cap - level) / cap * power.p_max;
        rt.idle = level == cap;
        const SlotState slot = SlotState::from_tilde(g_tilde, rt, w_max);
        const double p = allocate_slot_power(slot, plan, power, w_max);
        s.power += mass[j] * slot_push_power_total(p, slot, power);
        s.rate += mass[j] * slot_rate(slot, p);
    }
    return s;
}

void check_args(const OccupancyMatrix& occ, const UserContext& user, long n_samples) {
    require(n_samples >= 1, "sample count must be >= 1");
    require(occ.n_frames() == user.n_frames() && user.n_frames() >= 1,
            "occupancy and user context frame counts differ");
}

SampledBreakdown combine(const std::vector<ChunkSums>& chunks, long n_samples) {
    SampledBreakdown out;
    for (const auto& c : chunks) {
        out.power += c.power;
        out.rate += c.rate;
    }
    out.samples = n_samples;
    out.power /= static_cast<double>(n_samples);
    out.rate /= static_cast<double>(n_samples);
    return out;
}

}  // namespace

SampledBreakdown sample_breakdown_serial(const WaterfillPlan& plan, const OccupancyMatrix& occupancy,
                                         const UserContext& user, const PowerModel& power,
                                         double w_max, long n_samples, std::uint64_t seed) {
    check_args(occupancy, user, n_samples);
    const long n_chunks = (n_samples + kSamplingChunk - 1) / kSamplingChunk;
    std::vector<ChunkSums> chunks(n_chunks);
    for (long c = 0; c < n_chunks; ++c) {
        const long count = std::min(kSamplingChunk, n_samples - c * kSamplingChunk);
        chunks[c] = sample_chunk(plan, occupancy, user, power, w_max, count, seed, c);
    }
    return combine(chunks, n_samples);
}

SampledBreakdown sample_breakdown_parallel(const WaterfillPlan& plan, const OccupancyMatrix& occupancy,
                                           const UserContext& user, const PowerModel& power,
                                           double w_max, long n_samples, std::uint64_t seed,
                                           int threads) {
    check_args(occupancy, user, n_samples);
    const long n_chunks = (n_samples + kSamplingChunk - 1) / kSamplingChunk;
    std::vector<ChunkSums> chunks(n_chunks);
#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1))
    for (long c = 0; c < n_chunks; ++c) {
        const long count = std::min(kSamplingChunk, n_samples - c * kSamplingChunk);
        chunks[c] = sample_chunk(plan, occupancy, user, power, w_max, count, seed, c);
    }
    return combine(chunks, n_samples);
}

}  // namespace pushsim
