#pragma once

#include <cstdint>
#include <vector>

#include "pushsim/channel.hpp"
#include "pushsim/traffic.hpp"
#include "pushsim/waterfill.hpp"

namespace pushsim {

/// Full simulation setup. Defaults are the reference small-cell scenario:
/// 19 cells of radius 50 m, 10 MHz, 0.2 W, 10 ms slots, 100-slot frames.
struct ScenarioConfig {
    int n_cells = 19;
    double cell_radius = 50.0;
    double macro_radius = 250.0;
    int n_antennas = 4;
    int users_per_cell = 10;
    double slot_duration = 0.01;
    int slots_per_frame = 100;
    double offpeak_duration = 120.0;
    double peak_duration = 60.0;
    /// Length of the whole off-peak period; the simulated off-peak window is
    /// a sample of it and carries the pro-rata share of each user's push.
    double offpeak_total_duration = 6.0 * 3600.0;
    int cache_files_broadcast = 10;
    int cache_files_unicast = 10;

    double min_distance_lo = 5.0;
    double min_distance_hi = 40.0;
    double speed = 1.0;

    PathLossParams path_loss;
    PowerModel power;
    RTTrafficModel rt;
    ContentCatalog catalog;
    double delivery_rate = 1.2e6;  // offered bits/s per MS during the peak

    double beta_s = 1.0;
    int n_s = 100;
    int n_trials = 200;
    std::uint64_t master_seed = 20150601;
    long occupancy_warmup_slots = 200'000;

    void validate() const;

    long offpeak_slots() const;
    long peak_slots() const;
    int offpeak_frames() const;
    int peak_frames() const;
    double frame_duration() const { return slots_per_frame * slot_duration; }
    /// Bits pushed to each unicast user inside the simulated window.
    double push_bits_per_user() const;
    DeliveryProcess delivery_process() const { return {delivery_rate, peak_duration}; }

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&);
};

/// Sites of a centered hexagonal cluster, center first then ring by ring.
struct CellLayout {
    std::vector<Vec2> sbs_positions;
    double cell_radius = 50.0;

    int n_cells() const { return static_cast<int>(sbs_positions.size()); }
    HexCell cell(int i) const { return {sbs_positions[i], cell_radius}; }
    int closest(Vec2 p) const;
};

/// Number of rings k with 3k(k+1)+1 == n_cells; -1 otherwise.
int hexagonal_rings(int n_cells);

CellLayout build_layout(const ScenarioConfig& config);

}  // namespace pushsim
