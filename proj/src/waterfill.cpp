#include "pushsim/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "pushsim/errors.hpp"

namespace pushsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-10;

/// Integral over [lower_u, inf) of h(u) * u^(k-1) e^-u / Gamma(k): the
/// integrand is expressed in the normalized variable u = rate * g.
bool negligible_tail(int shape, double lower_u) { return lower_u > 750.0 + 10.0 * shape; }

template <class H>
double gamma_tail_integral(H&& h, int shape, double lower_u) {
    // Upper tail mass below 1e-300 for any shape used here.
    if (negligible_tail(shape, lower_u)) return 0.0;
    const double lg = std::lgamma(static_cast<double>(shape));
    auto f = [&](double u) {
        if (u <= 0.0) return shape == 1 ? h(u) : 0.0;
        const double dens = std::exp((shape - 1) * std::log(u) - u - lg);
        return dens == 0.0 ? 0.0 : h(u) * dens;
    };
    double error = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, std::max(lower_u, 0.0), kInf, 20, kQuadTol, &error, &l1);
    if (!std::isfinite(value) || error > 1e-7 * l1 + 1e-300) {
        std::ostringstream msg;
        msg << "quadrature did not converge: shape=" << shape << " lower_u=" << lower_u
            << " value=" << value << " error=" << error << " L1=" << l1;
        throw NumericalError(msg.str());
    }
    return value;
}

struct LevelWeights {
    double occupied = 0.0;  // sum_{l=1}^{L-1} P_l * l / L
    double idle = 0.0;      // P_L
};

LevelWeights level_weights(const OccupancyMatrix& occ, int frame) {
    const int cap = occ.capacity();
    LevelWeights w;
    for (int l = 1; l < cap; ++l) w.occupied += occ(frame, l) * l / cap;
    w.idle = occ(frame, cap);
    return w;
}

void check_frames(const OccupancyMatrix& occ, const UserContext& user) {
    require(occ.n_frames() == user.n_frames(), "occupancy and user context frame counts differ");
    require(user.n_frames() >= 1, "context has no frames");
}

}  // namespace

TailMoments gamma_tail_moments(int shape, double lower, TailIntegration method) {
    require(shape >= 1, "gamma shape must be >= 1");
    TailMoments m;
    if (negligible_tail(shape, lower)) return m;
    const double a = std::max(lower, 0.0);
    if (method == TailIntegration::Quadrature) {
        m.mass = gamma_tail_integral([](double) { return 1.0; }, shape, a);
        m.inv = shape == 1 && a == 0.0 ? kInf
                                       : gamma_tail_integral([](double u) { return 1.0 / u; }, shape, a);
        m.log = gamma_tail_integral([](double u) { return std::log(u); }, shape, a);
        return m;
    }
    namespace bm = boost::math;
    const double k = shape;
    m.mass = a == 0.0 ? 1.0 : bm::gamma_q(k, a);
    if (shape > 1)
        m.inv = a == 0.0 ? 1.0 / (k - 1.0) : bm::gamma_q(k - 1.0, a) / (k - 1.0);
    else
        m.inv = a == 0.0 ? kInf : bm::expint(1, a);
    if (a == 0.0) {
        m.log = bm::digamma(k);
    } else {
        // Parts: ln(a) Q(k,a) + int_a^inf Q(k,u)/u du, and for integer k the
        // last integral is E1(a) + sum_{m=1}^{k-1} Q(m,a)/m.
        double s = bm::expint(1, a);
        for (int j = 1; j < shape; ++j) s += bm::gamma_q(static_cast<double>(j), a) / j;
        m.log = std::log(a) * m.mass + s;
    }
    return m;
}

void PowerModel::validate() const {
    require(amp_efficiency > 0.0 && amp_efficiency <= 1.0, "power.amp_efficiency must be in (0,1]");
    require(p_active > p_sleep, "power.p_active must exceed power.p_sleep");
    require(p_sleep >= 0.0, "power.p_sleep must be >= 0");
    require(p_max > 0.0, "power.p_max must be > 0");
}

WaterfillPlan full_power_plan(const PowerModel& power) {
    // Any level this far above p_max clips every usable slot.
    return {1e12 * power.p_max, 0.0, true};
}

SlotState SlotState::from_tilde(double g_tilde, const RtReservation& rt, double w_max) {
    SlotState s;
    s.w = rt.w_available;
    s.p_rt = rt.p_rt;
    s.idle = rt.idle;
    s.g = s.w > 0.0 ? w_max / s.w * g_tilde : 0.0;
    return s;
}

double PushTarget::rate_nats() const {
    return bits * std::numbers::ln2 / (static_cast<double>(n_slots) * slot_duration);
}

void PushTarget::validate() const {
    require(bits > 0.0, "push target bits must be > 0");
    require(n_slots > 0, "push target needs >= 1 slot");
    require(slot_duration > 0.0, "slot duration must be > 0");
}

double allocate_slot_power(const SlotState& slot, const WaterfillPlan& plan,
                           const PowerModel& power, double w_max) {
    if (slot.w <= 0.0 || slot.g <= 0.0) return 0.0;
    if (slot.idle && !(slot.g >= plan.g_th)) return 0.0;
    const double cap = power.p_max - slot.p_rt;
    if (cap <= 0.0) return 0.0;
    const double p = slot.w / w_max * plan.nu - 1.0 / slot.g;
    return std::clamp(p, 0.0, cap);
}

double slot_rate(const SlotState& slot, double p) {
    if (p <= 0.0 || slot.w <= 0.0) return 0.0;
    return slot.w * std::log1p(slot.g * p);
}

double slot_push_power_total(double p, const SlotState& slot, const PowerModel& power) {
    if (p <= 0.0) return 0.0;
    return p / power.amp_efficiency + (slot.idle ? power.wake_power() : 0.0);
}

double kkt_residual(double nu, double g_th, const PowerModel& power) {
    require(nu > 0.0 && g_th > 0.0, "kkt_residual needs nu > 0 and g_th > 0");
    if (std::isinf(g_th)) return -kInf;
    return (nu - 1.0 / g_th) + power.amp_efficiency * power.wake_power() -
           nu * (std::log(nu) + std::log(g_th));
}

double solve_nu_given_gth(double g_th, const PowerModel& power, double tol) {
    require(g_th > 0.0 && std::isfinite(g_th), "solve_nu_given_gth needs finite g_th > 0");
    require(tol > 0.0, "tolerance must be > 0");
    const double c = power.amp_efficiency * power.wake_power();
    if (c == 0.0) return 1.0 / g_th;

    double lo = 1.0 / g_th;
    if (kkt_residual(lo, g_th, power) < 0.0)
        throw NumericalError("kkt residual negative at nu = 1/g_th");
    double hi = 2.0 * lo;
    for (int i = 0; kkt_residual(hi, g_th, power) >= 0.0; ++i) {
        if (i > 2000) throw NumericalError("could not bracket the water level");
        hi *= 2.0;
    }
    for (int i = 0; i < 400 && hi - lo > tol * lo; ++i) {
        const double mid = 0.5 * (lo + hi);
        (kkt_residual(mid, g_th, power) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double solve_gth_given_nu(double nu, const PowerModel& power) {
    require(nu > 0.0, "solve_gth_given_nu needs nu > 0");
    // With y = ln(nu g_th): y - 1 + e^-y = xi (p_act - p_sle) / nu.
    const double s = power.amp_efficiency * power.wake_power() / nu;
    if (s == 0.0) return 1.0 / nu;
    if (s > 700.0) return kInf;
    double lo = 0.0;
    double hi = s + 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid - 1.0 + std::exp(-mid) < s ? lo : hi) = mid;
    }
    const double g = std::exp(0.5 * (lo + hi)) / nu;
    return std::isfinite(g) ? g : kInf;
}

ExpectedBreakdown expected_breakdown(const WaterfillPlan& plan, const OccupancyMatrix& occupancy,
                                     const UserContext& user, const PowerModel& power,
                                     double w_max, TailIntegration method) {
    check_frames(occupancy, user);
    ExpectedBreakdown out;
    if (!(plan.nu > 0.0)) return out;
    const double nu = plan.nu;
    const double xi = power.amp_efficiency;

    for (int j = 0; j < user.n_frames(); ++j) {
        const auto& dist = user.channel_dists[j];
        const double r = dist.rate;
        const double log_nu_over_r = std::log(nu / r);
        const auto w = level_weights(occupancy, j);

        if (w.occupied > 0.0) {
            const TailMoments m = gamma_tail_moments(dist.shape, r / nu, method);
            if (m.mass > 0.0) {
                out.occupied_tx += w.occupied * (nu * m.mass - r * m.inv) / xi;
                out.occupied_rate += w.occupied * w_max * (m.log + log_nu_over_r * m.mass);
            }
        }
        if (w.idle > 0.0 && plan.idle_tier_active()) {
            const TailMoments m = gamma_tail_moments(dist.shape, r * plan.g_th, method);
            if (m.mass > 0.0) {
                out.idle_tx += w.idle * (nu * m.mass - r * m.inv) / xi;
                out.idle_rate += w.idle * w_max * (m.log + log_nu_over_r * m.mass);
                out.wake += w.idle * power.wake_power() * m.mass;
            }
        }
    }
    const double tf = user.n_frames();
    out.occupied_tx /= tf;
    out.idle_tx /= tf;
    out.wake /= tf;
    out.occupied_rate /= tf;
    out.idle_rate /= tf;
    return out;
}

double expected_push_power(const WaterfillPlan& plan, const OccupancyMatrix& occupancy,
                           const UserContext& user, const PowerModel& power,
                           TailIntegration method) {
    // Bandwidth only scales the rate terms.
    return expected_breakdown(plan, occupancy, user, power, 1.0, method).power();
}

namespace {

struct RateParts {
    double occupied = 0.0;
    double idle = 0.0;
    double total() const { return occupied + idle; }
};

RateParts rate_parts(double nu, double g_th, const OccupancyMatrix& occupancy,
                     const UserContext& user, double w_max, TailIntegration method) {
    RateParts out;
    if (!(nu > 0.0)) return out;
    auto tail_rate = [&](const GammaChannelDist& dist, double lower, double log_nu_over_r) {
        const TailMoments m = gamma_tail_moments(dist.shape, lower, method);
        return m.mass > 0.0 ? m.log + log_nu_over_r * m.mass : 0.0;
    };
    for (int j = 0; j < user.n_frames(); ++j) {
        const auto& dist = user.channel_dists[j];
        const double log_nu_over_r = std::log(nu / dist.rate);
        const auto w = level_weights(occupancy, j);
        if (w.occupied > 0.0) out.occupied += w.occupied * tail_rate(dist, dist.rate / nu, log_nu_over_r);
        if (w.idle > 0.0 && std::isfinite(g_th))
            out.idle += w.idle * tail_rate(dist, dist.rate * g_th, log_nu_over_r);
    }
    const double scale = w_max / user.n_frames();
    out.occupied *= scale;
    out.idle *= scale;
    return out;
}

/// P(G >= g) under the equal-weight mixture of frame distributions.
double mixture_tail(double g, const UserContext& user) {
    double s = 0.0;
    for (const auto& d : user.channel_dists) s += gamma_tail(g, d);
    return s / user.n_frames();
}

double mixture_quantile(double p, const UserContext& user) {
    double lo = kInf;
    double hi = 0.0;
    for (const auto& d : user.channel_dists) {
        const double q = gamma_quantile(p, d);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    if (hi <= lo) return lo;
    for (int i = 0; i < 100 && hi > lo * (1.0 + 1e-12); ++i) {
        const double mid = std::sqrt(lo * hi);
        (1.0 - mixture_tail(mid, user) < p ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
}

double mixture_mean(const UserContext& user) {
    double s = 0.0;
    for (const auto& d : user.channel_dists) s += d.mean();
    return s / user.n_frames();
}

}  // namespace

double expected_rate(const WaterfillPlan& plan, const OccupancyMatrix& occupancy,
                     const UserContext& user, double w_max, TailIntegration method) {
    check_frames(occupancy, user);
    return rate_parts(plan.nu, plan.g_th, occupancy, user, w_max, method).total();
}

double expected_occupied_rate(double nu, const OccupancyMatrix& occupancy, const UserContext& user,
                              double w_max, TailIntegration method) {
    check_frames(occupancy, user);
    return rate_parts(nu, kInf, occupancy, user, w_max, method).occupied;
}

WaterfillPlan solve_plan(const OccupancyMatrix& occupancy, const UserContext& user,
                         const PushTarget& target, const PowerModel& power, double w_max,
                         const SolverOptions& options) {
    check_frames(occupancy, user);
    target.validate();
    power.validate();
    require(options.tol > 0.0, "solver tolerance must be > 0");
    const double goal = target.rate_nats();
    const double inner_tol = std::min(1e-12, options.tol * 1e-4);

    auto evaluate = [&](double g_th) {
        const double nu = solve_nu_given_gth(g_th, power, inner_tol);
        return std::pair{nu, rate_parts(nu, g_th, occupancy, user, w_max, options.integration)};
    };
    auto finish = [&](double nu, double g_th) {
        return WaterfillPlan{nu, g_th, nu > power.p_max};
    };

    // Lower end of the outer bracket: smallest thresholds use the most idle slots.
    double g_lo = mixture_quantile(1e-3, user);
    for (int i = 0;; ++i) {
        if (evaluate(g_lo).second.total() >= goal) break;
        if (i >= 60) {
            std::ostringstream msg;
            msg << "push target of " << goal << " nats/s is not reachable (g_th down to " << g_lo
                << ")";
            throw InfeasibleError(msg.str());
        }
        g_lo *= 0.5;
    }

    // Upper end: grow until the rate drops below the target. If the idle tier
    // has vanished numerically and the occupied slots alone still exceed the
    // target, the optimum threshold lies beyond any gain the user will see.
    double g_hi = std::max(2.0 * g_lo, mixture_mean(user));
    bool corner = false;
    for (int i = 0;; ++i) {
        const auto [nu, parts] = evaluate(g_hi);
        if (parts.total() < goal) break;
        if (parts.idle <= 1e-12 * goal) {
            corner = true;
            break;
        }
        if (i >= options.max_iterations) throw NumericalError("could not bracket g_th from above");
        g_hi *= 2.0;
    }

    if (corner) {
        double nu_hi = solve_nu_given_gth(g_hi, power, inner_tol);
        double nu_lo = 0.5 * nu_hi;
        for (int i = 0; expected_occupied_rate(nu_lo, occupancy, user, w_max, options.integration) >= goal; ++i) {
            if (i >= 2000) throw NumericalError("could not bracket the occupied-only water level");
            nu_hi = nu_lo;
            nu_lo *= 0.5;
        }
        double nu = std::sqrt(nu_lo * nu_hi);
        for (int i = 0; i < options.max_iterations; ++i) {
            nu = std::sqrt(nu_lo * nu_hi);
            const double rate = expected_occupied_rate(nu, occupancy, user, w_max, options.integration);
            if (std::abs(rate - goal) <= 0.1 * options.tol * goal &&
                nu_hi / nu_lo - 1.0 < options.tol)
                break;
            (rate < goal ? nu_lo : nu_hi) = nu;
        }
        return finish(nu, solve_gth_given_nu(nu, power));
    }

    double g = std::sqrt(g_lo * g_hi);
    for (int i = 0; i < options.max_iterations; ++i) {
        g = std::sqrt(g_lo * g_hi);
        const double rate = evaluate(g).second.total();
        if (std::abs(rate - goal) <= 0.1 * options.tol * goal && g_hi / g_lo - 1.0 < options.tol)
            break;
        (rate >= goal ? g_lo : g_hi) = g;
    }
    return finish(solve_nu_given_gth(g, power, inner_tol), g);
}

// ---------------------------------------------------------------------------
// Offline oracle

namespace {

/// Slots sharing one piecewise-log rate curve: contribution w*ln(nu g~) once
/// nu > 1/g~, frozen at w*ln(1 + g~ c~) once nu > 1/g~ + c~. Prefix sums over
/// activation and clipping order give O(log T) evaluation.
class RateCurve {
public:
    struct Entry {
        double weight;      // w / W_max
        double g_tilde;     // gain at full bandwidth
        double cap_tilde;   // (p_max - p_rt) * W_max / w
        double cap;         // p_max - p_rt
    };

    explicit RateCurve(std::vector<Entry> entries) {
        const std::size_t n = entries.size();
        act_.resize(n);
        act_gain_.resize(n);
        clip_.resize(n);
        auto by_act = entries;
        std::ranges::sort(by_act, [](const Entry& a, const Entry& b) { return a.g_tilde > b.g_tilde; });
        auto by_clip = entries;
        std::ranges::sort(by_clip, [](const Entry& a, const Entry& b) {
            return 1.0 / a.g_tilde + a.cap_tilde < 1.0 / b.g_tilde + b.cap_tilde;
        });
        act_w_.assign(n + 1, 0.0);
        act_wlng_.assign(n + 1, 0.0);
        act_winv_.assign(n + 1, 0.0);
        clip_w_.assign(n + 1, 0.0);
        clip_wlng_.assign(n + 1, 0.0);
        clip_winv_.assign(n + 1, 0.0);
        clip_const_.assign(n + 1, 0.0);
        clip_cap_.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& a = by_act[i];
            act_[i] = 1.0 / a.g_tilde;
            act_gain_[i] = a.g_tilde;
            act_w_[i + 1] = act_w_[i] + a.weight;
            act_wlng_[i + 1] = act_wlng_[i] + a.weight * std::log(a.g_tilde);
            act_winv_[i + 1] = act_winv_[i] + a.weight / a.g_tilde;
            const auto& c = by_clip[i];
            clip_[i] = 1.0 / c.g_tilde + c.cap_tilde;
            clip_w_[i + 1] = clip_w_[i] + c.weight;
            clip_wlng_[i + 1] = clip_wlng_[i] + c.weight * std::log(c.g_tilde);
            clip_winv_[i + 1] = clip_winv_[i] + c.weight / c.g_tilde;
            clip_const_[i + 1] = clip_const_[i] + c.weight * std::log1p(c.g_tilde * c.cap_tilde);
            clip_cap_[i + 1] = clip_cap_[i] + c.cap;
        }
    }

    std::size_t size() const { return act_.size(); }

    /// Counts of activated and clipped slots among the first `limit` in
    /// activation order. Only valid with limit < size() when activation and
    /// clipping orders coincide (uniform cap_tilde).
    std::pair<std::size_t, std::size_t> counts(double nu, std::size_t limit) const {
        const std::size_t a = std::lower_bound(act_.begin(), act_.end(), nu) - act_.begin();
        const std::size_t c = std::lower_bound(clip_.begin(), clip_.end(), nu) - clip_.begin();
        return {std::min(a, limit), std::min(c, limit)};
    }

    /// Sum of w/W_max * ln(1 + g p) over the first `limit` slots.
    double rate(double nu, std::size_t limit) const {
        const auto [a, c] = counts(nu, limit);
        if (a == 0) return 0.0;
        return (act_w_[a] - clip_w_[c]) * std::log(nu) + (act_wlng_[a] - clip_wlng_[c]) +
               clip_const_[c];
    }

    /// Sum of transmit powers over the first `limit` slots.
    double tx_power(double nu, std::size_t limit) const {
        const auto [a, c] = counts(nu, limit);
        return (act_w_[a] - clip_w_[c]) * nu - (act_winv_[a] - clip_winv_[c]) + clip_cap_[c];
    }

    double max_rate(std::size_t limit) const { return clip_const_[std::min(limit, size())]; }
    double min_activation() const { return act_.empty() ? kInf : act_.front(); }
    double max_clip(std::size_t limit) const {
        return limit == 0 ? 0.0 : clip_[std::min(limit, size()) - 1];
    }
    /// Gain of the i-th slot in activation (descending gain) order.
    double gain(std::size_t i) const { return act_gain_[i]; }

private:
    std::vector<double> act_, act_gain_, clip_;
    std::vector<double> act_w_, act_wlng_, act_winv_;
    std::vector<double> clip_w_, clip_wlng_, clip_winv_, clip_const_, clip_cap_;
};

}  // namespace

OfflineSolution solve_offline_oracle(std::span<const SlotState> slots, const PushTarget& target,
                                     const PowerModel& power, double w_max) {
    target.validate();
    power.validate();
    require(static_cast<long>(slots.size()) == target.n_slots,
            "offline oracle needs one slot state per slot of the window");

    std::vector<RateCurve::Entry> occupied, idle;
    for (const auto& s : slots) {
        const double cap = power.p_max - s.p_rt;
        if (s.w <= 0.0 || s.g <= 0.0 || cap <= 0.0) continue;
        const double weight = s.w / w_max;
        const RateCurve::Entry e{weight, s.g * weight, cap / weight, cap};
        (s.idle ? idle : occupied).push_back(e);
    }
    for (const auto& e : idle)
        require(std::abs(e.cap - power.p_max) < 1e-12, "idle slots must carry no RT power");
    const RateCurve occ(std::move(occupied));
    const RateCurve idl(std::move(idle));
    const std::size_t n_idle = idl.size();

    // Goal in units of W_max nats per slot.
    const double goal = target.bits * std::numbers::ln2 / target.slot_duration / w_max;

    std::size_t n_min = 0;
    while (n_min <= n_idle && occ.max_rate(occ.size()) + idl.max_rate(n_min) < goal) ++n_min;
    if (n_min > n_idle) {
        std::ostringstream msg;
        msg << "offline target of " << target.bits << " bits exceeds full-power capacity";
        throw InfeasibleError(msg.str());
    }

    auto total_rate = [&](double nu, std::size_t n) {
        return occ.rate(nu, occ.size()) + idl.rate(nu, n);
    };
    auto solve_level = [&](std::size_t n, double hi) {
        double lo = std::min(occ.min_activation(), idl.min_activation());
        if (!(total_rate(hi, n) >= goal)) hi = std::max(occ.max_clip(occ.size()), idl.max_clip(n)) * 2.0;
        for (int i = 0; i < 200 && hi > lo * (1.0 + 1e-15); ++i) {
            const double mid = std::sqrt(lo * hi);
            (total_rate(mid, n) < goal ? lo : hi) = mid;
        }
        // Inside one segment the curve is A ln(nu) + B: solve exactly.
        const auto [oa, oc] = occ.counts(hi, occ.size());
        const auto [ia, ic] = idl.counts(hi, n);
        const auto [oa2, oc2] = occ.counts(lo, occ.size());
        const auto [ia2, ic2] = idl.counts(lo, n);
        if (oa == oa2 && oc == oc2 && ia == ia2 && ic == ic2) {
            const double r_hi = total_rate(hi, n);
            const double slope = (r_hi - total_rate(lo, n)) / (std::log(hi) - std::log(lo));
            if (slope > 0.0) {
                const double nu = hi * std::exp((goal - r_hi) / slope);
                if (nu >= lo && nu <= hi) return nu;
            }
        }
        return hi;
    };

    double best_energy = kInf;
    double best_nu = 0.0;
    std::size_t best_n = 0;
    double hi = std::max(occ.max_clip(occ.size()), idl.max_clip(n_idle)) * 2.0;
    if (!std::isfinite(hi) || hi <= 0.0) hi = 1.0;
    for (std::size_t n = n_min; n <= n_idle; ++n) {
        const double nu = solve_level(n, hi);
        hi = nu * (1.0 + 1e-12);  // the level can only fall as more idle slots open up
        const auto [ia, ic] = idl.counts(nu, n);
        const double tx = occ.tx_power(nu, occ.size()) + idl.tx_power(nu, n);
        const double energy =
            target.slot_duration * (tx / power.amp_efficiency + static_cast<double>(ia) * power.wake_power());
        if (energy < best_energy) {
            best_energy = energy;
            best_nu = nu;
            best_n = n;
        }
    }

    OfflineSolution out;
    out.plan.nu = best_nu;
    out.plan.g_th = best_n == 0 ? kInf : idl.gain(best_n - 1);
    out.plan.exceeds_power_cap = best_nu > power.p_max;
    out.powers.reserve(slots.size());
    out.energy = 0.0;
    for (const auto& s : slots) {
        const double p = allocate_slot_power(s, out.plan, power, w_max);
        out.powers.push_back(p);
        out.energy += target.slot_duration * slot_push_power_total(p, s, power);
        if (s.idle && p > 0.0) ++out.idle_slots_used;
    }
    return out;
}

RealizedPush apply_plan(std::span<const SlotState> slots, const WaterfillPlan& plan,
                        const PowerModel& power, double w_max, double slot_duration) {
    RealizedPush out;
    for (const auto& s : slots) {
        const double p = allocate_slot_power(s, plan, power, w_max);
        out.energy += slot_duration * slot_push_power_total(p, s, power);
        out.nats += slot_duration * slot_rate(s, p);
        if (s.idle && p > 0.0) ++out.idle_slots_used;
    }
    return out;
}

}  // namespace pushsim
