#pragma once

#include <array>
#include <cmath>
#include <span>

#include "pushsim/rng.hpp"

namespace pushsim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Log-distance path loss plus receiver noise. noise_psd is in W/Hz.
struct PathLossParams {
    double intercept_db = 30.5;
    double slope_db_per_decade = 36.7;
    double noise_psd = 3.1622776601683794e-20;  // -165 dBm/Hz
    double max_bandwidth = 10e6;

    double noise_power() const { return noise_psd * max_bandwidth; }
    void validate() const;
};

double dbm_per_hz_to_w_per_hz(double dbm);
double w_per_hz_to_dbm_per_hz(double w);

/// Path loss in dB; distances below 1 m are clamped to 1 m.
double path_loss_db(double distance_m, const PathLossParams& params = {});

/// Linear large-scale gain alpha = 10^(-loss/10).
double large_scale_gain(double distance_m, const PathLossParams& params = {});

/// ||h||^2 for an i.i.d. unit-variance complex Gaussian vector of n_antennas
/// entries: a sum of n_antennas unit-mean exponentials.
double sample_h_norm_sq(int n_antennas, Rng& rng);

/// Equivalent gain at full bandwidth, alpha*||h||^2 / (N_0 W_max), in 1/W.
double equivalent_gain_tilde(double alpha, double h_norm_sq, const PathLossParams& params);

/// Gain at the residual bandwidth w: (W_max / w) * g_tilde. Throws when w <= 0.
double gain_at_bandwidth(double g_tilde, double w, const PathLossParams& params);

/// Distribution of g_tilde within one frame: Gamma(shape = N_t, rate = N_0 W_max / alpha).
struct GammaChannelDist {
    int shape = 1;
    double rate = 1.0;

    static GammaChannelDist from_gain(double alpha, int n_antennas, const PathLossParams& params);
    double mean() const { return shape / rate; }
    void validate() const;
};

double gamma_pdf(double g, const GammaChannelDist& dist);
/// P(G >= g).
double gamma_tail(double g, const GammaChannelDist& dist);
double gamma_quantile(double p, const GammaChannelDist& dist);

/// Pointy-top regular hexagon: circumradius `radius`, edges normal to
/// 0, 60, ..., 300 degrees. This is the Voronoi cell of a hexagonal site
/// lattice with inter-site distance sqrt(3) * radius.
struct HexCell {
    Vec2 center;
    double radius = 50.0;

    double apothem() const { return radius * std::sqrt(3.0) / 2.0; }
    bool contains(Vec2 p, double tol = 1e-9) const;
    std::array<Vec2, 6> vertices() const;
    static const std::array<Vec2, 6>& edge_normals();
};

struct Trajectory {
    Vec2 start;
    Vec2 direction{1.0, 0.0};
    double speed = 1.0;
    double min_sbs_distance = 0.0;

    void validate() const;
};

/// Straight-line motion with specular reflection at the cell boundary.
Vec2 position_at(const Trajectory& trajectory, double time, const HexCell& cell);

/// Random line through the cell: uniform direction, closest approach to the
/// SBS uniform in [min_distance_lo, min_distance_hi], start point uniform on
/// the chord of the inscribed circle.
Trajectory sample_trajectory(const HexCell& cell, double min_distance_lo, double min_distance_hi,
                             double speed, Rng& rng);

}  // namespace pushsim
