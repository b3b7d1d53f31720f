#include "pushsim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pushsim/errors.hpp"

namespace pushsim {

int RTTrafficModel::capacity() const {
    return static_cast<int>(std::floor(1.0 / bandwidth_fraction + 1e-9));
}

void RTTrafficModel::validate() const {
    require(arrival_rate >= 0.0, "rt.arrival_rate must be >= 0");
    require(mean_service >= 1.0, "rt.mean_service must be >= 1 slot");
    require(bandwidth_fraction > 0.0 && bandwidth_fraction <= 1.0,
            "rt.bandwidth_fraction must be in (0,1]");
    require(power_fraction > 0.0 && power_fraction <= 1.0, "rt.power_fraction must be in (0,1]");
}

int step_rt_queue(int active, const RTTrafficModel& model, Rng& rng) {
    const int cap = model.capacity();
    require(active >= 0 && active <= cap, "rt occupancy out of range");
    int n = active;
    if (n > 0) {
        std::binomial_distribution<int> departures(n, 1.0 / model.mean_service);
        n -= departures(rng);
    }
    if (model.arrival_rate > 0.0) {
        std::poisson_distribution<int> arrivals(model.arrival_rate);
        n = std::min(cap, n + arrivals(rng));
    }
    return n;
}

RtReservation rt_reservation(int active, const RTTrafficModel& model, double p_max, double w_max) {
    const int cap = model.capacity();
    require(active >= 0 && active <= cap, "rt occupancy out of range");
    RtReservation r;
    r.level = cap - active;
    r.w_available = static_cast<double>(r.level) / cap * w_max;
    r.p_rt = static_cast<double>(active) / cap * p_max;
    r.idle = active == 0;
    return r;
}

std::vector<double> erlang_loss_distribution(const RTTrafficModel& model) {
    const double a = model.arrival_rate * model.mean_service;
    const int cap = model.capacity();
    std::vector<double> p(cap + 1);
    p[0] = 1.0;
    for (int n = 1; n <= cap; ++n) p[n] = p[n - 1] * a / n;
    const double z = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p) v /= z;
    return p;
}

void ContentCatalog::validate() const {
    require(n_files >= 1, "catalog.n_files must be >= 1");
    require(file_size_bits > 0.0, "catalog.file_size_bits must be > 0");
    require(zipf_beta >= 0.0 && zipf_beta <= 1.0, "catalog.zipf_beta must be in [0,1]");
}

std::vector<double> zipf_pmf(int n, double beta) {
    require(n >= 1, "zipf_pmf needs n >= 1");
    require(beta >= 0.0 && beta <= 1.0, "zipf beta must be in [0,1]");
    std::vector<double> p(n);
    for (int i = 0; i < n; ++i) p[i] = std::pow(static_cast<double>(i + 1), -beta);
    // Sum smallest terms first.
    double z = 0.0;
    for (int i = n - 1; i >= 0; --i) z += p[i];
    for (auto& v : p) v /= z;
    return p;
}

UserInterestProfile sample_user_subset(const ContentCatalog& catalog, int n_s, double beta_s,
                                       Rng& rng) {
    require(n_s >= 1 && n_s <= catalog.n_files, "n_s must be in [1, n_files]");
    require(beta_s >= 0.0 && beta_s <= 1.0, "beta_s must be in [0,1]");
    const auto weights = zipf_pmf(catalog.n_files, catalog.zipf_beta);

    // Efraimidis-Spirakis: keep the n_s largest log(u)/w keys.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, int>> keys(catalog.n_files);
    for (int i = 0; i < catalog.n_files; ++i) {
        double u = unit(rng);
        while (u == 0.0) u = unit(rng);
        keys[i] = {std::log(u) / weights[i], i + 1};
    }
    std::nth_element(keys.begin(), keys.begin() + (n_s - 1), keys.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    UserInterestProfile profile;
    profile.zipf_beta = beta_s;
    profile.subset.reserve(n_s);
    for (int i = 0; i < n_s; ++i) profile.subset.push_back(keys[i].second);
    std::ranges::sort(profile.subset);
    return profile;
}

void DeliveryProcess::validate() const {
    require(mean_rate >= 0.0, "delivery.mean_rate must be >= 0");
    require(peak_duration > 0.0, "peak_duration must be > 0");
}

std::vector<DeliveryRequest> generate_delivery_requests(const UserInterestProfile& profile,
                                                        const DeliveryProcess& process,
                                                        double file_size_bits,
                                                        double slot_duration, Rng& rng) {
    process.validate();
    require(slot_duration > 0.0, "slot_duration must be > 0");
    std::vector<DeliveryRequest> out;
    const double expected = process.mean_rate / file_size_bits * process.peak_duration;
    if (expected <= 0.0 || profile.subset.empty()) return out;

    std::poisson_distribution<int> count_dist(expected);
    const int count = count_dist(rng);
    const int n_slots = static_cast<int>(std::llround(process.peak_duration / slot_duration));
    std::uniform_real_distribution<double> when(0.0, process.peak_duration);
    const auto pmf = profile.request_pmf();
    std::discrete_distribution<int> pick(pmf.begin(), pmf.end());

    std::vector<double> times(count);
    for (auto& t : times) t = when(rng);
    std::ranges::sort(times);
    out.reserve(count);
    for (double t : times) {
        const int slot = std::min(n_slots - 1, static_cast<int>(t / slot_duration));
        out.push_back({slot, profile.subset[pick(rng)]});
    }
    return out;
}

}  // namespace pushsim
