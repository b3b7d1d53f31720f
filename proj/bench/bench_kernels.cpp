// Serial reference vs OpenMP for each parallel kernel.
#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "pushsim/episode.hpp"
#include "pushsim/kernels.hpp"
#include "pushsim/sim.hpp"

using namespace pushsim;

namespace {

ScenarioConfig bench_config() {
    ScenarioConfig c;
    c.n_cells = 7;
    c.offpeak_duration = 20.0;
    c.peak_duration = 20.0;
    c.offpeak_total_duration = 3600.0;
    c.occupancy_warmup_slots = 20'000;
    return c;
}

struct SamplingFixture {
    OccupancyMatrix occ;
    UserContext user;
    WaterfillPlan plan;
    PowerModel power;

    SamplingFixture() {
        const PathLossParams pl;
        for (int j = 0; j < 12; ++j) {
            const double a = large_scale_gain(10.0 + 2.0 * j, pl);
            user.frame_gains.push_back(a);
            user.channel_dists.push_back(GammaChannelDist::from_gain(a, 4, pl));
            user.serving_cell.push_back(0);
        }
        auto levels = erlang_loss_distribution(RTTrafficModel{});
        std::reverse(levels.begin(), levels.end());
        occ = occupancy_from_levels(levels, 12).occupancy;
        plan = {0.1, gamma_quantile(0.5, user.channel_dists[6]), false};
    }
};

void BM_Sampling(benchmark::State& state) {
    static const SamplingFixture f;
    const int threads = static_cast<int>(state.range(0));
    const long n = 1'000'000;
    for (auto _ : state) {
        auto r = threads == 0 ? sample_breakdown_serial(f.plan, f.occ, f.user, f.power, 10e6, n, 1)
                              : sample_breakdown_parallel(f.plan, f.occ, f.user, f.power, 10e6, n, 1, threads);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void BM_PlanSolve(benchmark::State& state) {
    static const ScenarioConfig c = bench_config();
    static const Deployment base = build_deployment(c);
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        Deployment d = base;
        if (threads == 0)
            solve_deployment_plans(d, c);
        else
            solve_deployment_plans_parallel(d, c, threads);
        benchmark::DoNotOptimize(d.plans.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(base.users.size()));
}

void BM_MonteCarlo(benchmark::State& state) {
    static const ScenarioConfig c = bench_config();
    static const Deployment d = [] {
        Deployment x = build_deployment(c);
        solve_deployment_plans(x, c);
        return x;
    }();
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto r = monte_carlo(c, d, kAllStrategies, 8, threads == 0 ? 1 : threads);
        benchmark::DoNotOptimize(r.data());
    }
    state.SetItemsProcessed(state.iterations() * 8 * 3);
}

void BM_Episodes(benchmark::State& state) {
    ScenarioConfig c = bench_config();
    c.n_cells = 1;
    c.users_per_cell = 1;
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto r = run_single_user_episodes(c, 1e7, 16, threads == 0 ? 1 : threads);
        benchmark::DoNotOptimize(r.data());
    }
    state.SetItemsProcessed(state.iterations() * 16);
}

// Argument 0 is the serial reference; n > 0 is the OpenMP path on n threads.
void thread_args(benchmark::internal::Benchmark* b) {
    for (int t : {0, 1, 2, 4}) b->Arg(t);
    b->ArgName("threads")->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_Sampling)->Apply(thread_args);
BENCHMARK(BM_PlanSolve)->Apply(thread_args);
BENCHMARK(BM_MonteCarlo)->Apply(thread_args);
BENCHMARK(BM_Episodes)->Apply(thread_args);

BENCHMARK_MAIN();
