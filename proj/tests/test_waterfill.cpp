#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "pushsim/errors.hpp"
#include "pushsim/kernels.hpp"
#include "pushsim/waterfill.hpp"
#include "support.hpp"

using namespace pushsim;
using testsupport::rel;

namespace {

constexpr double kWmax = 10e6;

SlotState idle_slot(double g) { return {g, kWmax, 0.0, true}; }

struct Instance {
    OccupancyMatrix occ;
    UserContext user;
    PushTarget target;
};

// 12 frames at 20 m; 1 Gbit over 12 s needs idle slots (finite threshold).
Instance interior(double bits = 1e9) {
    std::vector<double> d(12, 20.0);
    for (int j = 0; j < 12; ++j) d[j] = 15.0 + j;
    return {occupancy_from_levels(testsupport::erlang_levels(), 12).occupancy,
            testsupport::user_at_distances(d), PushTarget{bits, 1200, 0.01}};
}

// Root of 1 - 1/g + c - ln g = 0 for nu = 1, by plain bisection.
double kkt_root_nu1(double c) {
    double lo = 1.0, hi = 100.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (1.0 - 1.0 / mid + c - std::log(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("slot allocation") {
    PowerModel pw{0.08, 3.0, 1.0, 10.0};
    const WaterfillPlan plan{2.0, 1.0, false};
    CHECK(allocate_slot_power(idle_slot(0.5), plan, pw, kWmax) == 0.0);
    CHECK(allocate_slot_power(idle_slot(4.0), plan, pw, kWmax) == doctest::Approx(1.75));
    // tie at the threshold is included
    const WaterfillPlan tie{2.0, 4.0, false};
    CHECK(allocate_slot_power(idle_slot(4.0), tie, pw, kWmax) == doctest::Approx(1.75));
    // occupied slot with clipping at p_max - p_RT
    PowerModel small{0.08, 3.0, 1.0, 0.2};
    const SlotState occupied{10.0, kWmax / 2, 0.04, false};
    CHECK(allocate_slot_power(occupied, plan, small, kWmax) == doctest::Approx(0.16));
    // occupied slots ignore the threshold
    const WaterfillPlan high{2.0, 1e9, false};
    CHECK(allocate_slot_power(occupied, high, small, kWmax) == doctest::Approx(0.16));
    // no bandwidth
    const SlotState none{0.0, 0.0, 0.2, false};
    CHECK(allocate_slot_power(none, plan, small, kWmax) == 0.0);
    // below the water line
    CHECK(allocate_slot_power(idle_slot(0.4), WaterfillPlan{2.0, 0.1, false}, pw, kWmax) == 0.0);
}

TEST_CASE("slot rate and power") {
    CHECK(slot_rate({std::numbers::e - 1.0, 1.0, 0.0, true}, 1.0) == doctest::Approx(1.0));
    CHECK(slot_rate({1.0, 1e7, 0.0, true}, 1.0) == doctest::Approx(1e7 * std::numbers::ln2));
    CHECK(slot_rate(idle_slot(5.0), 0.0) == 0.0);
    const PowerModel pw;
    CHECK(slot_push_power_total(0.1, idle_slot(1.0), pw) == doctest::Approx(3.25));
    CHECK(slot_push_power_total(0.1, {1.0, 8e6, 0.04, false}, pw) == doctest::Approx(1.25));
    CHECK(slot_push_power_total(0.0, idle_slot(1.0), pw) == 0.0);
}

TEST_CASE("slot from full-bandwidth gain") {
    RTTrafficModel m;
    const auto s = SlotState::from_tilde(100.0, rt_reservation(2, m, 0.2, kWmax), kWmax);
    CHECK(s.w == doctest::Approx(6e6));
    CHECK(s.g == doctest::Approx(100.0 * 10.0 / 6.0));
    CHECK(s.p_rt == doctest::Approx(0.08));
    CHECK_FALSE(s.idle);
    const auto full = SlotState::from_tilde(100.0, rt_reservation(5, m, 0.2, kWmax), kWmax);
    CHECK(full.w == 0.0);
    CHECK(full.g == 0.0);
}

TEST_CASE("kkt residual") {
    const PowerModel free_wake{0.08, 1.0, 1.0, 0.2};
    CHECK(kkt_residual(1.0, 1.0, free_wake) == doctest::Approx(0.0));
    const PowerModel pw;  // xi * (p_act - p_sle) = 0.16
    const double g = kkt_root_nu1(0.16);
    CHECK(g == doctest::Approx(1.87).epsilon(0.01));
    CHECK(std::abs(kkt_residual(1.0, 1.87, pw)) < 1e-2);
    CHECK(std::abs(kkt_residual(1.0, g, pw)) < 1e-12);
    // decreasing in nu above 1/g_th
    double prev = kkt_residual(1.0 / 3.0 + 1e-9, 3.0, pw);
    for (double nu = 0.4; nu < 5.0; nu += 0.1) {
        const double r = kkt_residual(nu, 3.0, pw);
        CHECK(r < prev);
        prev = r;
    }
    CHECK(kkt_residual(1.0, std::numeric_limits<double>::infinity(), pw) < 0.0);
    CHECK_THROWS_AS(kkt_residual(0.0, 1.0, pw), DomainError);
}

TEST_CASE("inner tier water level") {
    const PowerModel free_wake{0.08, 1.0, 1.0, 0.2};
    CHECK(solve_nu_given_gth(5.0, free_wake) == 0.2);
    const PowerModel pw;
    const double nu = solve_nu_given_gth(1.87, pw);
    CHECK(nu == doctest::Approx(1.0).epsilon(0.01));
    CHECK(nu * 1.87 >= 1.0);
    CHECK(solve_gth_given_nu(nu, pw) == doctest::Approx(1.87).epsilon(1e-8));
    CHECK(std::isinf(solve_gth_given_nu(1e-6, pw)));
    CHECK_THROWS_AS(solve_nu_given_gth(0.0, pw), DomainError);
    CHECK_THROWS_AS(solve_nu_given_gth(std::numeric_limits<double>::infinity(), pw), DomainError);
}

TEST_CASE("closed-form tail moments agree with quadrature") {
    for (int k = 1; k <= 6; ++k) {
        for (double a : {0.0, 1e-3, 0.5, 3.0, 20.0, 200.0}) {
            if (k == 1 && a == 0.0) continue;  // E[1/U] diverges
            const auto c = gamma_tail_moments(k, a, TailIntegration::ClosedForm);
            const auto q = gamma_tail_moments(k, a, TailIntegration::Quadrature);
            CAPTURE(k);
            CAPTURE(a);
            CHECK(c.mass == doctest::Approx(q.mass).epsilon(1e-8));
            CHECK(c.inv == doctest::Approx(q.inv).epsilon(1e-8));
            CHECK(c.log == doctest::Approx(q.log).epsilon(1e-8));
        }
    }
    // Independent check: composite Simpson on a finite range, shape 3, lower 1.
    auto f = [](double u) { return u * u * std::exp(-u) / 2.0; };
    double mass = 0.0, inv = 0.0, lg = 0.0;
    const int n = 200000;
    const double lo = 1.0, hi = 80.0, h = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) {
        const double u = lo + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        mass += w * f(u);
        inv += w * f(u) / u;
        lg += w * f(u) * std::log(u);
    }
    const auto c = gamma_tail_moments(3, 1.0);
    CHECK(c.mass == doctest::Approx(mass * h / 3.0).epsilon(1e-9));
    CHECK(c.inv == doctest::Approx(inv * h / 3.0).epsilon(1e-9));
    CHECK(c.log == doctest::Approx(lg * h / 3.0).epsilon(1e-9));
    CHECK(gamma_tail_moments(4, 1e4).mass == 0.0);
}

TEST_CASE("expected functionals: degenerate contexts") {
    const auto inst = interior();
    const PowerModel pw;
    CHECK(expected_push_power(WaterfillPlan{0.0, 1.0, false}, inst.occ, inst.user, pw) == 0.0);
    std::vector<double> none(6, 0.0);
    none[0] = 1.0;
    const auto blocked = occupancy_from_levels(none, 12).occupancy;
    const WaterfillPlan plan{0.05, 1e5, false};
    CHECK(expected_push_power(plan, blocked, inst.user, pw) == 0.0);
    CHECK(expected_rate(plan, blocked, inst.user, kWmax) == 0.0);
    // rate falls as the threshold rises, down to the occupied-only floor
    double prev = expected_rate(WaterfillPlan{0.05, 1e4, false}, inst.occ, inst.user, kWmax);
    for (double g = 2e4; g < 1e8; g *= 2.0) {
        const double r = expected_rate(WaterfillPlan{0.05, g, false}, inst.occ, inst.user, kWmax);
        if (g < 2e6) CHECK(r < prev);
        CHECK(r <= prev);
        prev = r;
    }
    CHECK(prev == doctest::Approx(expected_occupied_rate(0.05, inst.occ, inst.user, kWmax)));
    CHECK_THROWS_AS(expected_rate(plan, occupancy_from_levels(testsupport::erlang_levels(), 3).occupancy,
                                  inst.user, kWmax),
                    DomainError);
}

TEST_CASE("expected functionals match sampling on one context") {
    const auto inst = interior();
    const PowerModel pw;
    const double gmed = gamma_quantile(0.5, inst.user.channel_dists[5]);
    const WaterfillPlan plan{0.12, gmed, false};
    const auto mc = sample_breakdown_serial(plan, inst.occ, inst.user, pw, kWmax, 1'000'000, 99);
    const auto quad = expected_breakdown(plan, inst.occ, inst.user, pw, kWmax, TailIntegration::Quadrature);
    CHECK(rel(mc.power, quad.power()) < 0.005);
    CHECK(rel(mc.rate, quad.rate()) < 0.005);
    CHECK(expected_push_power(plan, inst.occ, inst.user, pw) == doctest::Approx(quad.power()).epsilon(1e-8));
}

TEST_CASE("two-tier solver: interior regime") {
    const auto inst = interior();
    const PowerModel pw;
    const SolverOptions opts;
    const auto plan = solve_plan(inst.occ, inst.user, inst.target, pw, kWmax, opts);
    REQUIRE(plan.idle_tier_active());
    CHECK_FALSE(plan.exceeds_power_cap);
    CHECK(plan.nu * plan.g_th > 1.0);
    CHECK(rel(expected_rate(plan, inst.occ, inst.user, kWmax), inst.target.rate_nats()) < opts.tol);
    CHECK(std::abs(kkt_residual(plan.nu, plan.g_th, pw)) / plan.nu < 1e-6);

    // More bits need more idle slots: lower threshold.
    const auto more = solve_plan(inst.occ, inst.user, PushTarget{2e9, 1200, 0.01}, pw, kWmax);
    CHECK(more.g_th < plan.g_th);
    CHECK(more.nu > plan.nu);

    // Quadrature-backed solve lands on the same plan.
    SolverOptions quad = opts;
    quad.integration = TailIntegration::Quadrature;
    const auto q = solve_plan(inst.occ, inst.user, inst.target, pw, kWmax, quad);
    CHECK(q.nu == doctest::Approx(plan.nu).epsilon(1e-6));
    CHECK(q.g_th == doctest::Approx(plan.g_th).epsilon(1e-6));
}

TEST_CASE("two-tier solver: occupied slots suffice") {
    const auto inst = interior(2e7);
    const PowerModel pw;
    const auto plan = solve_plan(inst.occ, inst.user, inst.target, pw, kWmax);
    CHECK_FALSE(plan.idle_tier_active());
    CHECK(rel(expected_rate(plan, inst.occ, inst.user, kWmax), inst.target.rate_nats()) < 1e-8);
    CHECK(pw.amp_efficiency * pw.wake_power() / plan.nu > 700.0);
}

TEST_CASE("two-tier solver: infeasible and invalid targets") {
    const auto inst = interior(1e12);
    const PowerModel pw;
    CHECK_THROWS_AS(solve_plan(inst.occ, inst.user, inst.target, pw, kWmax), InfeasibleError);
    CHECK_THROWS_AS(solve_plan(inst.occ, inst.user, PushTarget{0.0, 1200, 0.01}, pw, kWmax), DomainError);
}

TEST_CASE("offline oracle: single idle slot inverts the rate formula") {
    const PowerModel pw;
    const double dt = 0.01;
    const double bits = kWmax * dt * std::log(1.1) / std::numbers::ln2;
    const std::vector<SlotState> slots{idle_slot(1.0)};
    const auto sol = solve_offline_oracle(slots, PushTarget{bits, 1, dt}, pw, kWmax);
    REQUIRE(sol.powers.size() == 1);
    CHECK(sol.powers[0] == doctest::Approx(std::exp(bits * std::numbers::ln2 / (kWmax * dt)) - 1.0).epsilon(1e-9));
    CHECK(sol.powers[0] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(sol.idle_slots_used == 1);
    CHECK(sol.energy == doctest::Approx(dt * (0.1 / 0.08 + 2.0)).epsilon(1e-9));
}

TEST_CASE("offline oracle: wake cost favours one good slot") {
    const PowerModel pw;
    const std::vector<SlotState> slots{idle_slot(4.0), idle_slot(1.0)};
    const auto sol = solve_offline_oracle(slots, PushTarget{1e3, 2, 0.01}, pw, kWmax);
    CHECK(sol.idle_slots_used == 1);
    CHECK(sol.powers[0] > 0.0);
    CHECK(sol.powers[1] == 0.0);
    CHECK(sol.plan.g_th == 4.0);
}

TEST_CASE("offline oracle delivers exactly the target and beats any plan at equal volume") {
    const auto inst = interior();
    const PowerModel pw;
    Rng rng(5);
    RTTrafficModel m;
    std::vector<SlotState> slots;
    int active = 0;
    for (int t = 0; t < 1200; ++t) {
        active = step_rt_queue(active, m, rng);
        const double h = sample_h_norm_sq(4, rng);
        const double gt = equivalent_gain_tilde(inst.user.frame_gains[t / 100], h, PathLossParams{});
        slots.push_back(SlotState::from_tilde(gt, rt_reservation(active, m, pw.p_max, kWmax), kWmax));
    }
    const auto sol = solve_offline_oracle(slots, inst.target, pw, kWmax);
    double nats = 0.0;
    for (std::size_t t = 0; t < slots.size(); ++t) {
        CHECK(sol.powers[t] >= 0.0);
        CHECK(sol.powers[t] <= pw.p_max - slots[t].p_rt + 1e-12);
        nats += slot_rate(slots[t], sol.powers[t]) * 0.01;
    }
    CHECK(rel(nats, inst.target.bits * std::numbers::ln2) < 1e-9);

    const auto plan = solve_plan(inst.occ, inst.user, inst.target, pw, kWmax);
    const auto realized = apply_plan(slots, plan, pw, kWmax, 0.01);
    const auto matched = solve_offline_oracle(
        slots, PushTarget{realized.nats / std::numbers::ln2, 1200, 0.01}, pw, kWmax);
    CHECK(matched.energy <= realized.energy * (1.0 + 1e-9));

    CHECK_THROWS_AS(solve_offline_oracle(slots, PushTarget{1e12, 1200, 0.01}, pw, kWmax), InfeasibleError);
    CHECK_THROWS_AS(solve_offline_oracle(slots, PushTarget{1e8, 1199, 0.01}, pw, kWmax), DomainError);
}

TEST_CASE("apply_plan sums slot by slot") {
    const PowerModel pw;
    const std::vector<SlotState> slots{idle_slot(4.0), idle_slot(1.0), {10.0, 6e6, 0.08, false}};
    const WaterfillPlan plan{1.0, 2.0, false};
    const auto r = apply_plan(slots, plan, pw, kWmax, 0.01);
    double e = 0.0, nats = 0.0;
    int idle = 0;
    for (const auto& s : slots) {
        const double p = allocate_slot_power(s, plan, pw, kWmax);
        e += slot_push_power_total(p, s, pw) * 0.01;
        nats += slot_rate(s, p) * 0.01;
        idle += s.idle && p > 0.0;
    }
    CHECK(r.energy == doctest::Approx(e));
    CHECK(r.nats == doctest::Approx(nats));
    CHECK(r.idle_slots_used == idle);
    CHECK(idle == 1);
}
