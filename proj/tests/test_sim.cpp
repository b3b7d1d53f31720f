#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "pushsim/errors.hpp"
#include "pushsim/sim.hpp"

using namespace pushsim;

namespace {

// One cell, short windows: fast enough for many trials.
ScenarioConfig small_config() {
    ScenarioConfig c;
    c.n_cells = 1;
    c.users_per_cell = 10;
    c.offpeak_duration = 12.0;
    c.peak_duration = 20.0;
    c.offpeak_total_duration = 2160.0;
    c.occupancy_warmup_slots = 20'000;
    c.catalog.n_files = 1000;
    return c;
}

Deployment planned(const ScenarioConfig& c) {
    Deployment d = build_deployment(c);
    solve_deployment_plans(d, c);
    return d;
}

}  // namespace

TEST_CASE("layout") {
    ScenarioConfig c;
    c.n_cells = 1;
    const auto one = build_layout(c);
    REQUIRE(one.n_cells() == 1);
    CHECK(one.sbs_positions[0] == Vec2{0.0, 0.0});

    c.n_cells = 19;
    const auto l = build_layout(c);
    REQUIRE(l.n_cells() == 19);
    double nearest = 1e9;
    for (int i = 1; i < 19; ++i) nearest = std::min(nearest, norm(l.sbs_positions[i]));
    CHECK(nearest == doctest::Approx(50.0 * std::sqrt(3.0)));
    // cells partition the plane: every site is inside its own cell only
    for (int i = 0; i < 19; ++i) {
        CHECK(l.closest(l.sbs_positions[i]) == i);
        for (int k = 0; k < 19; ++k)
            if (k != i) CHECK_FALSE(l.cell(k).contains(l.sbs_positions[i]));
    }
    CHECK(hexagonal_rings(1) == 0);
    CHECK(hexagonal_rings(7) == 1);
    CHECK(hexagonal_rings(19) == 2);
    CHECK(hexagonal_rings(8) == -1);
    c.n_cells = 8;
    CHECK_THROWS_AS(build_layout(c), DomainError);
}

TEST_CASE("strategy names round trip") {
    for (Strategy s : kAllStrategies) CHECK(parse_strategy(to_string(s)) == s);
    CHECK_THROWS_AS(parse_strategy("multicast"), DomainError);
}

TEST_CASE("broadcast caches the most popular files") {
    auto c = small_config();
    const auto caches = run_offpeak_broadcast(c, 3);
    REQUIRE(caches.size() == 3);
    const std::vector<int> top{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    for (const auto& cache : caches) CHECK(cache == top);
    c.beta_s = 0.0;
    CHECK(run_offpeak_broadcast(c, 3) == caches);
}

TEST_CASE("deployment shape") {
    auto c = small_config();
    const auto d = build_deployment(c);
    CHECK(d.users.size() == 10);
    CHECK(d.plans.size() == 10);
    REQUIRE(d.users_per_cell_frame.size() == 1);
    REQUIRE(static_cast<int>(d.users_per_cell_frame[0].size()) == c.offpeak_frames());
    for (int k : d.users_per_cell_frame[0]) CHECK(k == 10);
    for (const auto& u : d.users) {
        CHECK(u.offpeak.n_frames() == c.offpeak_frames());
        CHECK(u.peak.n_frames() == c.peak_frames());
        CHECK(static_cast<int>(u.profile.subset.size()) == c.n_s);
    }
    const auto sc = user_scaled_context(d, 0);
    CHECK(sc.occupancy.row_sum(0) == doctest::Approx(0.1));
}

TEST_CASE("zero users") {
    auto c = small_config();
    c.users_per_cell = 0;
    const auto d = planned(c);
    for (Strategy s : kAllStrategies) {
        const auto m = run_trial(c, d, s, 1);
        CHECK(m.n_requests == 0);
        CHECK(m.total_energy == 0.0);
        CHECK(m.cache_hit_rate == 0.0);
    }
}

TEST_CASE("a lone user pushes its target on average and caches a prefix of its subset") {
    auto c = small_config();
    c.users_per_cell = 1;
    c.rt.arrival_rate = 0.0;
    c.min_distance_hi = 10.0;
    c.speed = 0.0;
    const auto d = planned(c);
    REQUIRE(d.plans[0].has_value());
    const double target = c.push_bits_per_user();
    const auto& subset = d.users[0].profile.subset;
    double total = 0.0;
    const int n = 300;
    for (int seed = 1; seed <= n; ++seed) {
        const auto r = run_offpeak_unicast(c, d, seed);
        total += r.pushed_bits[0];
        const bool done = r.completed_fraction == 1.0;
        const int files = done ? c.cache_files_unicast
                               : static_cast<int>(std::floor(c.cache_files_unicast * r.pushed_bits[0] / target));
        std::vector<int> expect(subset.begin(), subset.begin() + files);
        std::sort(expect.begin(), expect.end());
        CHECK(r.caches[0] == expect);
        CHECK(done == (r.pushed_bits[0] >= target));
    }
    // Pushing stops at the target, so the mean is E[min(X, B)] where X is the
    // volume the plan would deliver over the whole window.
    const auto& user = d.users[0].offpeak;
    Rng rng(12345);
    double capped = 0.0;
    const int windows = 2000;
    for (int w = 0; w < windows; ++w) {
        double nats = 0.0;
        for (long t = 0; t < c.offpeak_slots(); ++t) {
            const auto& dist = user.channel_dists[t / c.slots_per_frame];
            std::gamma_distribution<double> g(dist.shape, 1.0 / dist.rate);
            const SlotState slot{g(rng), c.path_loss.max_bandwidth, 0.0, true};
            nats += slot_rate(slot, allocate_slot_power(slot, *d.plans[0], c.power, c.path_loss.max_bandwidth)) *
                    c.slot_duration;
        }
        capped += std::min(nats / std::log(2.0), target);
    }
    CHECK(total / n == doctest::Approx(capped / windows).epsilon(0.05));
    CHECK(total / n <= target);
}

TEST_CASE("energy accounting identity and determinism") {
    const auto c = small_config();
    const auto d = planned(c);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto off = run_offpeak_unicast(c, d, seed);
        CHECK(std::abs(off.ledger.push_energy - off.audit_energy) <= 1e-9 * std::max(1.0, off.audit_energy));
        const auto peak = run_peak_delivery(c, d, off.caches, seed);
        CHECK(std::abs(peak.ledger.delivery_energy - peak.audit_energy) <=
              1e-9 * std::max(1.0, peak.audit_energy));
        CHECK(peak.delivered_bits <= peak.n_requests * c.catalog.file_size_bits + 1e-6);
        CHECK(peak.n_hits <= peak.n_requests);
        for (Strategy s : kAllStrategies) CHECK(run_trial(c, d, s, seed) == run_trial(c, d, s, seed));
    }
    const auto base = run_trial(c, d, Strategy::Baseline, 7);
    CHECK(base.push_energy == 0.0);
    CHECK(base.cache_hit_rate == 0.0);
    CHECK(run_trial(c, d, Strategy::Broadcast, 7).push_energy == 0.0);
}

TEST_CASE("no requests means no delivery") {
    auto c = small_config();
    c.delivery_rate = 0.0;
    const auto d = planned(c);
    const auto m = run_trial(c, d, Strategy::Baseline, 1);
    CHECK(m.n_requests == 0);
    CHECK(m.delivery_energy == 0.0);
    CHECK(m.throughput == 0.0);
}

TEST_CASE("all hits cost nothing to deliver") {
    auto c = small_config();
    c.n_s = 10;  // cache holds the whole subset
    c.delivery_rate = 5e6;
    const auto d = planned(c);
    CacheState full;
    for (const auto& u : d.users) {
        auto s = u.profile.subset;
        std::sort(s.begin(), s.end());
        full.push_back(s);
    }
    const auto r = run_peak_delivery(c, d, full, 4);
    REQUIRE(r.n_requests > 0);
    CHECK(r.n_hits == r.n_requests);
    CHECK(r.ledger.delivery_energy == 0.0);
    CHECK(r.delivered_bits == doctest::Approx(r.n_requests * c.catalog.file_size_bits));
}

TEST_CASE("delivery without RT charges whole full-power idle slots") {
    auto c = small_config();
    c.users_per_cell = 2;
    c.rt.arrival_rate = 0.0;
    c.speed = 0.0;
    c.delivery_rate = 4e6;
    const auto d = planned(c);
    const CacheState empty(d.users.size());
    const auto r = run_peak_delivery(c, d, empty, 11);
    REQUIRE(r.n_requests > 0);
    const double per_slot = (c.power.p_max / c.power.amp_efficiency + c.power.wake_power()) * c.slot_duration;
    const double slots = r.ledger.delivery_energy / per_slot;
    CHECK(slots == doctest::Approx(std::round(slots)).epsilon(1e-9));
    // each slot carries at most one slot's worth at the best possible gain
    double best = 0.0;
    for (const auto& u : d.users)
        for (const auto& dist : u.peak.channel_dists) best = std::max(best, gamma_quantile(1.0 - 1e-12, dist));
    const double cap = c.path_loss.max_bandwidth * std::log2(1.0 + best * c.power.p_max) * c.slot_duration;
    CHECK(r.delivered_bits <= slots * cap);
    CHECK(r.delivered_bits >= 0.0);
}

TEST_CASE("summaries") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto s = summarize(v);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(s.ci_high - s.mean == doctest::Approx(1.959963984540054 * s.std_error));
    CHECK(s.n == 4);
    const std::vector<double> one{7.0};
    CHECK(summarize(one).std_error == 0.0);
    MetricSummary a{0, 0, 0.0, 1.0, 2}, b{0, 0, 1.0, 2.0, 2}, far{0, 0, 1.5, 2.0, 2};
    CHECK(a.overlaps(b));
    CHECK_FALSE(a.overlaps(far));
}

TEST_CASE("monte carlo: single trial, serial vs parallel, 1/sqrt(n) error") {
    auto c = small_config();
    const auto d = planned(c);
    const Strategy only[] = {Strategy::Unicast};
    const auto one = monte_carlo(c, d, only, 1, 1);
    CHECK(one[0].trials[0] == run_trial(c, d, Strategy::Unicast, trial_seed(c.master_seed, 0)));

    const auto ser = monte_carlo(c, d, kAllStrategies, 6, 1);
    const auto par = monte_carlo(c, d, kAllStrategies, 6, 3);
    for (std::size_t i = 0; i < ser.size(); ++i) CHECK(ser[i].trials == par[i].trials);

    c.offpeak_duration = 2.0;
    c.offpeak_total_duration = 360.0;
    c.peak_duration = 5.0;
    const auto d2 = planned(c);
    const Strategy base[] = {Strategy::Baseline};
    std::vector<double> ses;
    for (int n : {50, 200, 800}) ses.push_back(monte_carlo(c, d2, base, n, 1)[0].total_energy.std_error);
    CHECK(ses[0] / ses[1] == doctest::Approx(2.0).epsilon(0.25));
    CHECK(ses[1] / ses[2] == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("unicast push energy tracks the expected push power") {
    auto c = small_config();
    const auto d = planned(c);
    double expected = 0.0;
    for (std::size_t u = 0; u < d.users.size(); ++u) {
        REQUIRE(d.plans[u].has_value());
        const auto sc = user_scaled_context(d, static_cast<int>(u));
        expected += expected_push_power(*d.plans[u], sc.occupancy, d.users[u].offpeak, c.power);
    }
    expected *= c.offpeak_slots() * c.slot_duration;
    const Strategy only[] = {Strategy::Unicast};
    const auto mc = monte_carlo(c, d, only, 200, 1);
    CHECK(mc[0].push_energy.mean == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("unicast hit rate is not below broadcast") {
    auto c = small_config();
    const auto d = planned(c);
    const auto mc = monte_carlo(c, d, kAllStrategies, 60, 1);
    CHECK(mc[0].cache_hit_rate.mean >= mc[1].cache_hit_rate.mean);
    CHECK(mc[2].cache_hit_rate.mean == 0.0);
}
