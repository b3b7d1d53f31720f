#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "pushsim/errors.hpp"
#include "pushsim/traffic.hpp"

using namespace pushsim;

namespace {

// Truncated Poisson weights a^n/n!, normalized.
std::vector<double> erlang_oracle(double a, int cap) {
    std::vector<double> w(cap + 1);
    double term = 1.0;
    for (int n = 0; n <= cap; ++n) {
        if (n > 0) term *= a / n;
        w[n] = term;
    }
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= s;
    return w;
}

}  // namespace

TEST_CASE("rt capacity and validation") {
    RTTrafficModel m;
    CHECK(m.capacity() == 5);
    m.bandwidth_fraction = 0.25;
    CHECK(m.capacity() == 4);
    RTTrafficModel bad;
    bad.arrival_rate = -1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = {};
    bad.power_fraction = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("erlang loss law") {
    const RTTrafficModel m;
    const auto p = erlang_loss_distribution(m);
    const auto oracle = erlang_oracle(0.4, 5);
    REQUIRE(p.size() == 6);
    for (int n = 0; n <= 5; ++n) CHECK(p[n] == doctest::Approx(oracle[n]).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(0.6703).epsilon(1e-3));
}

TEST_CASE("rt chain occupancy matches the loss law") {
    const RTTrafficModel m;
    Rng rng(3);
    std::vector<double> counts(6, 0.0);
    int active = 0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
        active = step_rt_queue(active, m, rng);
        counts[active] += 1.0;
    }
    const auto oracle = erlang_oracle(0.4, 5);
    for (int k = 0; k <= 5; ++k) CHECK(std::abs(counts[k] / n - oracle[k]) < 0.02);
}

TEST_CASE("rt chain edge behaviour") {
    RTTrafficModel m;
    m.arrival_rate = 0.0;
    Rng rng(5);
    double total = 0.0;
    for (int i = 0; i < 20000; ++i) total += step_rt_queue(5, m, rng);
    CHECK(total / 20000 == doctest::Approx(2.5).epsilon(0.02));
    CHECK(step_rt_queue(0, m, rng) == 0);

    m.arrival_rate = 1000.0;
    for (int i = 0; i < 100; ++i) CHECK(step_rt_queue(i % 6, m, rng) == 5);
    CHECK_THROWS_AS(step_rt_queue(6, m, rng), DomainError);
}

TEST_CASE("rt reservation") {
    const RTTrafficModel m;
    const auto one = rt_reservation(1, m, 0.2, 10e6);
    CHECK(one.p_rt == doctest::Approx(0.04));
    CHECK(one.w_available == doctest::Approx(8e6));
    CHECK(one.level == 4);
    CHECK_FALSE(one.idle);
    const auto none = rt_reservation(0, m, 0.2, 10e6);
    CHECK(none.idle);
    CHECK(none.p_rt == 0.0);
    CHECK(none.w_available == 10e6);
    const auto full = rt_reservation(5, m, 0.2, 10e6);
    CHECK(full.w_available == 0.0);
    CHECK(full.p_rt == doctest::Approx(0.2));
    CHECK_THROWS_AS(rt_reservation(6, m, 0.2, 10e6), DomainError);
    CHECK_THROWS_AS(rt_reservation(-1, m, 0.2, 10e6), DomainError);
}

TEST_CASE("zipf pmf") {
    const auto two = zipf_pmf(2, 1.0);
    CHECK(two[0] == doctest::Approx(2.0 / 3.0));
    CHECK(two[1] == doctest::Approx(1.0 / 3.0));
    const auto flat = zipf_pmf(7, 0.0);
    for (double v : flat) CHECK(v == doctest::Approx(1.0 / 7.0));
    const auto big = zipf_pmf(10000, 0.8);
    CHECK(std::accumulate(big.begin(), big.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::is_sorted(big.rbegin(), big.rend()));
    CHECK_THROWS_AS(zipf_pmf(0, 1.0), DomainError);
    CHECK_THROWS_AS(zipf_pmf(5, 1.5), DomainError);
    CHECK_THROWS_AS(zipf_pmf(5, -0.1), DomainError);
}

TEST_CASE("user subsets are sorted, unique and popularity weighted") {
    ContentCatalog cat;
    Rng rng(9);
    int has_first = 0;
    int has_thousandth = 0;
    for (int k = 0; k < 200; ++k) {
        const auto prof = sample_user_subset(cat, 100, 0.7, rng);
        REQUIRE(prof.subset.size() == 100);
        CHECK(prof.zipf_beta == 0.7);
        CHECK(std::is_sorted(prof.subset.begin(), prof.subset.end()));
        CHECK(std::set<int>(prof.subset.begin(), prof.subset.end()).size() == 100);
        CHECK(prof.subset.front() >= 1);
        CHECK(prof.subset.back() <= cat.n_files);
        has_first += prof.subset.front() == 1;
        has_thousandth += std::ranges::binary_search(prof.subset, 1000);
    }
    CHECK(has_first > 150);
    CHECK(has_thousandth < 50);

    ContentCatalog small{20, 1.0, 1.0};
    const auto all = sample_user_subset(small, 20, 1.0, rng);
    for (int i = 0; i < 20; ++i) CHECK(all.subset[i] == i + 1);
    CHECK_THROWS_AS(sample_user_subset(small, 21, 1.0, rng), DomainError);
    CHECK_THROWS_AS(sample_user_subset(small, 5, 1.2, rng), DomainError);
}

TEST_CASE("delivery requests: rate, files and ordering") {
    UserInterestProfile prof;
    for (int i = 0; i < 100; ++i) prof.subset.push_back(3 * i + 2);
    prof.zipf_beta = 1.0;
    const DeliveryProcess proc{1.2e6, 60.0};
    Rng rng(21);
    const int users = 20000;
    long total = 0;
    long first = 0;
    for (int k = 0; k < users; ++k) {
        const auto req = generate_delivery_requests(prof, proc, 2.4e8, 0.01, rng);
        total += static_cast<long>(req.size());
        for (std::size_t i = 0; i < req.size(); ++i) {
            CHECK(req[i].arrival_slot >= 0);
            CHECK(req[i].arrival_slot < 6000);
            if (i > 0) CHECK(req[i].arrival_slot >= req[i - 1].arrival_slot);
            CHECK(std::ranges::binary_search(prof.subset, req[i].file));
            first += req[i].file == 2;
        }
    }
    const double mean = static_cast<double>(total) / users;
    CHECK(std::abs(mean - 0.3) < 3.0 * std::sqrt(0.3 / users) + 1e-12);
    const double h100 = zipf_pmf(100, 1.0)[0];
    CHECK(std::abs(static_cast<double>(first) / total - h100) < 0.03);

    const DeliveryProcess off{0.0, 60.0};
    CHECK(generate_delivery_requests(prof, off, 2.4e8, 0.01, rng).empty());
    const DeliveryProcess bad{-1.0, 60.0};
    CHECK_THROWS_AS(generate_delivery_requests(prof, bad, 2.4e8, 0.01, rng), DomainError);
}
