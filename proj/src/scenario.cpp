#include "pushsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "pushsim/context.hpp"
#include "pushsim/errors.hpp"

namespace pushsim {

namespace {

long whole_slots(double duration, double slot, const char* what) {
    const double n = duration / slot;
    const long r = std::lround(n);
    require(r >= 1 && std::abs(n - r) < 1e-6, std::string(what) + " must be a whole number of slots");
    return r;
}

}  // namespace

void ScenarioConfig::validate() const {
    require(n_cells >= 1, "n_cells must be >= 1");
    require(hexagonal_rings(n_cells) >= 0, "n_cells must be a centered hexagonal number (1, 7, 19, 37, ...)");
    require(cell_radius > 0.0, "cell_radius must be > 0");
    require(macro_radius > 0.0, "macro_radius must be > 0");
    require(n_antennas >= 1, "n_antennas must be >= 1");
    require(users_per_cell >= 0, "users_per_cell must be >= 0");
    require(slot_duration > 0.0, "slot_duration must be > 0");
    require(slots_per_frame >= 1, "slots_per_frame must be >= 1");
    require(offpeak_duration > 0.0, "offpeak_duration must be > 0");
    require(peak_duration > 0.0, "peak_duration must be > 0");
    require(offpeak_total_duration >= offpeak_duration,
            "offpeak_total_duration must be >= offpeak_duration");
    require(cache_files_broadcast >= 1, "cache_files_broadcast must be >= 1");
    require(cache_files_unicast >= 1, "cache_files_unicast must be >= 1");
    require(min_distance_lo >= 0.0 && min_distance_lo <= min_distance_hi,
            "min_distance_lo must be in [0, min_distance_hi]");
    require(min_distance_hi <= cell_radius * std::sqrt(3.0) / 2.0,
            "min_distance_hi must not exceed the cell apothem");
    require(speed >= 0.0, "speed must be >= 0");
    path_loss.validate();
    power.validate();
    rt.validate();
    catalog.validate();
    require(delivery_rate >= 0.0, "delivery_rate must be >= 0");
    require(beta_s >= 0.0 && beta_s <= 1.0, "beta_s must be in [0,1]");
    require(n_s >= 1 && n_s <= catalog.n_files, "n_s must be in [1, catalog.n_files]");
    require(cache_files_unicast <= n_s, "cache_files_unicast must be <= n_s");
    require(cache_files_broadcast <= catalog.n_files, "cache_files_broadcast must be <= catalog.n_files");
    require(n_trials >= 1, "n_trials must be >= 1");
    require(occupancy_warmup_slots >= 10'000, "occupancy_warmup_slots must be >= 1e4");
    const long off = whole_slots(offpeak_duration, slot_duration, "offpeak_duration");
    whole_slots(peak_duration, slot_duration, "peak_duration");
    require(off % slots_per_frame == 0, "offpeak slots must be divisible by slots_per_frame");
}

long ScenarioConfig::offpeak_slots() const { return std::lround(offpeak_duration / slot_duration); }
long ScenarioConfig::peak_slots() const { return std::lround(peak_duration / slot_duration); }
int ScenarioConfig::offpeak_frames() const {
    return static_cast<int>(offpeak_slots() / slots_per_frame);
}
int ScenarioConfig::peak_frames() const {
    return static_cast<int>((peak_slots() + slots_per_frame - 1) / slots_per_frame);
}

double ScenarioConfig::push_bits_per_user() const {
    return cache_files_unicast * catalog.file_size_bits * (offpeak_duration / offpeak_total_duration);
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    auto pl = [](const PathLossParams& p) {
        return std::tie(p.intercept_db, p.slope_db_per_decade, p.noise_psd, p.max_bandwidth);
    };
    auto pw = [](const PowerModel& p) { return std::tie(p.amp_efficiency, p.p_active, p.p_sleep, p.p_max); };
    auto rt = [](const RTTrafficModel& r) {
        return std::tie(r.arrival_rate, r.mean_service, r.bandwidth_fraction, r.power_fraction);
    };
    auto cat = [](const ContentCatalog& c) { return std::tie(c.n_files, c.file_size_bits, c.zipf_beta); };
    auto head = [](const ScenarioConfig& c) {
        return std::tie(c.n_cells, c.cell_radius, c.macro_radius, c.n_antennas, c.users_per_cell,
                        c.slot_duration, c.slots_per_frame, c.offpeak_duration, c.peak_duration,
                        c.offpeak_total_duration, c.cache_files_broadcast, c.cache_files_unicast,
                        c.min_distance_lo, c.min_distance_hi, c.speed, c.delivery_rate, c.beta_s,
                        c.n_s, c.n_trials, c.master_seed, c.occupancy_warmup_slots);
    };
    return head(a) == head(b) && pl(a.path_loss) == pl(b.path_loss) && pw(a.power) == pw(b.power) &&
           rt(a.rt) == rt(b.rt) && cat(a.catalog) == cat(b.catalog);
}

int CellLayout::closest(Vec2 p) const { return closest_site(p, sbs_positions); }

int hexagonal_rings(int n_cells) {
    for (int k = 0; 3 * k * (k + 1) + 1 <= n_cells; ++k)
        if (3 * k * (k + 1) + 1 == n_cells) return k;
    return -1;
}

CellLayout build_layout(const ScenarioConfig& config) {
    const int rings = hexagonal_rings(config.n_cells);
    require(rings >= 0, "n_cells must be a centered hexagonal number (1, 7, 19, 37, ...)");
    const double isd = std::sqrt(3.0) * config.cell_radius;

    // Axial lattice with basis vectors at 0 and 60 degrees.
    const Vec2 a1{isd, 0.0};
    const Vec2 a2{isd / 2.0, isd * std::sqrt(3.0) / 2.0};
    struct Site {
        int ring;
        double angle;
        Vec2 p;
    };
    std::vector<Site> sites;
    for (int q = -rings; q <= rings; ++q) {
        for (int r = -rings; r <= rings; ++r) {
            const int ring = std::max({std::abs(q), std::abs(r), std::abs(q + r)});
            if (ring > rings) continue;
            const Vec2 p = static_cast<double>(q) * a1 + static_cast<double>(r) * a2;
            double angle = std::atan2(p.y, p.x);
            if (angle < -1e-12) angle += 2.0 * std::numbers::pi;
            sites.push_back({ring, ring == 0 ? 0.0 : angle, p});
        }
    }
    std::ranges::sort(sites, [](const Site& x, const Site& y) {
        if (x.ring != y.ring) return x.ring < y.ring;
        return x.angle < y.angle - 1e-12;
    });

    CellLayout layout;
    layout.cell_radius = config.cell_radius;
    for (const auto& s : sites) {
        if (norm(s.p) + config.cell_radius > config.macro_radius + 1e-9) {
            std::ostringstream msg;
            msg << "cell at (" << s.p.x << ", " << s.p.y << ") does not fit in the macro radius "
                << config.macro_radius;
            throw DomainError(msg.str());
        }
        layout.sbs_positions.push_back(s.p);
    }
    return layout;
}

}  // namespace pushsim
