#pragma once

#include <vector>

#include "pushsim/rng.hpp"

namespace pushsim {

/// Real-time traffic with strict priority. Each active request reserves a
/// fixed fraction of bandwidth and power; at most capacity() are active.
struct RTTrafficModel {
    double arrival_rate = 0.2;  // requests per slot
    double mean_service = 2.0;  // slots
    double bandwidth_fraction = 0.2;
    double power_fraction = 0.2;

    int capacity() const;
    void validate() const;
};

/// One slot of the birth-death chain: each active request departs with
/// probability 1/mean_service, then Poisson arrivals are admitted up to
/// capacity (the excess is blocked).
int step_rt_queue(int active, const RTTrafficModel& model, Rng& rng);

struct RtReservation {
    double p_rt = 0.0;         // W reserved for RT
    double w_available = 0.0;  // Hz left for pushing/delivery
    int level = 0;             // l = L - active
    bool idle = true;
};

RtReservation rt_reservation(int active, const RTTrafficModel& model, double p_max, double w_max);

/// Stationary law of the continuous-time Erlang loss system with offered
/// load a = arrival_rate * mean_service, truncated at capacity: P(n) ~ a^n/n!.
std::vector<double> erlang_loss_distribution(const RTTrafficModel& model);

struct ContentCatalog {
    int n_files = 10000;
    double file_size_bits = 2.4e8;  // 30 MBytes
    double zipf_beta = 1.0;

    void validate() const;
};

/// p(i) = i^-beta / sum_j j^-beta for i = 1..n (index 0 holds rank 1).
std::vector<double> zipf_pmf(int n, double beta);

/// Files a user may request, as 1-based catalog indices in ascending
/// catalog rank. The user's own request pmf is zipf_pmf(|subset|, zipf_beta)
/// over this order.
struct UserInterestProfile {
    std::vector<int> subset;
    double zipf_beta = 1.0;

    std::vector<double> request_pmf() const { return zipf_pmf(static_cast<int>(subset.size()), zipf_beta); }
};

/// Popularity-weighted sampling without replacement: file i enters with
/// weight given by the catalog Zipf pmf.
UserInterestProfile sample_user_subset(const ContentCatalog& catalog, int n_s, double beta_s,
                                       Rng& rng);

struct DeliveryProcess {
    double mean_rate = 1.2e6;  // offered bits/s per MS
    double peak_duration = 60.0;

    void validate() const;
};

struct DeliveryRequest {
    int arrival_slot = 0;
    int file = 0;  // 1-based catalog index
};

/// Poisson arrivals at mean_rate / file_size_bits requests per second over the
/// peak window, sorted by arrival; files i.i.d. from the profile's pmf.
std::vector<DeliveryRequest> generate_delivery_requests(const UserInterestProfile& profile,
                                                        const DeliveryProcess& process,
                                                        double file_size_bits,
                                                        double slot_duration, Rng& rng);

}  // namespace pushsim
