#include "pushsim/channel.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "pushsim/errors.hpp"

namespace pushsim {

void PathLossParams::validate() const {
    require(slope_db_per_decade > 0.0, "path_loss.slope_db_per_decade must be > 0");
    require(max_bandwidth > 0.0, "path_loss.max_bandwidth must be > 0");
    require(noise_psd > 0.0, "path_loss.noise_psd must be > 0");
}

double dbm_per_hz_to_w_per_hz(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double w_per_hz_to_dbm_per_hz(double w) { return 10.0 * std::log10(w) + 30.0; }

double path_loss_db(double distance_m, const PathLossParams& params) {
    const double d = std::max(distance_m, 1.0);
    return params.intercept_db + params.slope_db_per_decade * std::log10(d);
}

double large_scale_gain(double distance_m, const PathLossParams& params) {
    return std::pow(10.0, -path_loss_db(distance_m, params) / 10.0);
}

double sample_h_norm_sq(int n_antennas, Rng& rng) {
    require(n_antennas >= 1, "n_antennas must be >= 1");
    std::exponential_distribution<double> exp1(1.0);
    double s = 0.0;
    for (int i = 0; i < n_antennas; ++i) s += exp1(rng);
    return s;
}

double equivalent_gain_tilde(double alpha, double h_norm_sq, const PathLossParams& params) {
    return alpha * h_norm_sq / params.noise_power();
}

double gain_at_bandwidth(double g_tilde, double w, const PathLossParams& params) {
    if (!(w > 0.0)) throw DomainError("slot has no residual bandwidth");
    return params.max_bandwidth / w * g_tilde;
}

GammaChannelDist GammaChannelDist::from_gain(double alpha, int n_antennas,
                                             const PathLossParams& params) {
    require(alpha > 0.0, "large-scale gain must be > 0");
    require(n_antennas >= 1, "n_antennas must be >= 1");
    return {n_antennas, params.noise_power() / alpha};
}

void GammaChannelDist::validate() const {
    require(shape >= 1, "gamma shape must be >= 1");
    require(rate > 0.0, "gamma rate must be > 0");
}

double gamma_pdf(double g, const GammaChannelDist& dist) {
    if (g < 0.0) return 0.0;
    const double u = dist.rate * g;
    if (dist.shape == 1) return dist.rate * std::exp(-u);
    if (u == 0.0) return 0.0;
    return dist.rate * std::exp((dist.shape - 1) * std::log(u) - u - std::lgamma(dist.shape));
}

double gamma_tail(double g, const GammaChannelDist& dist) {
    if (g <= 0.0) return 1.0;
    if (std::isinf(g)) return 0.0;
    return boost::math::gamma_q(static_cast<double>(dist.shape), dist.rate * g);
}

double gamma_quantile(double p, const GammaChannelDist& dist) {
    require(p > 0.0 && p < 1.0, "quantile level must be in (0,1)");
    return boost::math::gamma_p_inv(static_cast<double>(dist.shape), p) / dist.rate;
}

const std::array<Vec2, 6>& HexCell::edge_normals() {
    static const std::array<Vec2, 6> normals = [] {
        std::array<Vec2, 6> n{};
        for (int k = 0; k < 6; ++k) {
            const double a = k * std::numbers::pi / 3.0;
            n[k] = {std::cos(a), std::sin(a)};
        }
        return n;
    }();
    return normals;
}

bool HexCell::contains(Vec2 p, double tol) const {
    const Vec2 r = p - center;
    const double a = apothem();
    return std::ranges::all_of(edge_normals(), [&](Vec2 n) { return dot(r, n) <= a + tol; });
}

std::array<Vec2, 6> HexCell::vertices() const {
    std::array<Vec2, 6> v{};
    for (int k = 0; k < 6; ++k) {
        const double a = std::numbers::pi / 6.0 + k * std::numbers::pi / 3.0;
        v[k] = center + radius * Vec2{std::cos(a), std::sin(a)};
    }
    return v;
}

void Trajectory::validate() const {
    require(speed >= 0.0, "trajectory speed must be >= 0");
    require(std::abs(norm(direction) - 1.0) < 1e-9, "trajectory direction must be a unit vector");
}

Vec2 position_at(const Trajectory& trajectory, double time, const HexCell& cell) {
    require(time >= 0.0, "time must be >= 0");
    Vec2 pos = trajectory.start;
    Vec2 dir = trajectory.direction;
    double remaining = trajectory.speed * time;
    const double a = cell.apothem();
    const auto& normals = cell.edge_normals();

    // Each bounce consumes at least a sliver of path; the cap only guards
    // against pathological corner grazing.
    for (int bounce = 0; remaining > 0.0 && bounce < 1'000'000; ++bounce) {
        double hit = std::numeric_limits<double>::infinity();
        int edge = -1;
        for (int k = 0; k < 6; ++k) {
            const double approach = dot(dir, normals[k]);
            if (approach <= 1e-15) continue;
            const double gap = std::max(0.0, a - dot(pos - cell.center, normals[k]));
            const double t = gap / approach;
            if (t < hit) {
                hit = t;
                edge = k;
            }
        }
        if (edge < 0 || hit >= remaining) {
            pos = pos + remaining * dir;
            break;
        }
        pos = pos + hit * dir;
        remaining -= hit;
        const Vec2 n = normals[edge];
        dir = dir - (2.0 * dot(dir, n)) * n;
    }
    return pos;
}

Trajectory sample_trajectory(const HexCell& cell, double min_distance_lo, double min_distance_hi,
                             double speed, Rng& rng) {
    require(0.0 <= min_distance_lo && min_distance_lo <= min_distance_hi,
            "trajectory min distance range is empty");
    require(min_distance_hi <= cell.apothem(),
            "trajectory min distance must fit inside the cell's inscribed circle");
    require(speed >= 0.0, "trajectory speed must be >= 0");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    const double d = min_distance_lo + (min_distance_hi - min_distance_lo) * unit(rng);
    const Vec2 normal{std::cos(theta), std::sin(theta)};
    const Vec2 dir{-normal.y, normal.x};
    const double half_chord = std::sqrt(std::max(0.0, cell.apothem() * cell.apothem() - d * d));
    const double offset = half_chord * (2.0 * unit(rng) - 1.0);

    Trajectory t;
    t.start = cell.center + d * normal + offset * dir;
    t.direction = dir;
    t.speed = speed;
    t.min_sbs_distance = d;
    return t;
}

}  // namespace pushsim
