// SPDX-License-Identifier: Apache-2.0
//
// onebit-loc: one-bit passive localization simulator
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Serial against OpenMP for the parallel kernels. Arg 0 is serial, 1 parallel.

#include "onebit/antares.hpp"
#include "onebit/delay_est.hpp"
#include "onebit/harness.hpp"
#include "onebit/lasserre_loc.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace onebit;

namespace {

Exec exec_of(const benchmark::State &st)
{
    return st.range(0) ? Exec::parallel : Exec::serial;
}

Geometry random_geometry(int m, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-800.0, 800.0);
    Geometry g;
    for (int i = 0; i < m; ++i)
        g.nodes.emplace_back(u(rng), u(rng), 0.0);
    g.base = Point(u(rng), u(rng), 0.0);
    return g;
}

void BM_Dictionary(benchmark::State &st)
{
    SamplingConfig cfg;
    cfg.num_samples = 100;
    const auto w = Waveform::pi2_bpsk(cfg, 1);
    for (auto _ : st)
        benchmark::DoNotOptimize(build_dictionary(w, cfg, 200, exec_of(st)));
}
BENCHMARK(BM_Dictionary)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MomentSdp(benchmark::State &st)
{
    Geometry g = random_geometry(4, 2);
    for (auto &n : g.nodes)
        n /= 4000.0;
    g.base /= 4000.0;
    const auto fc = fractional_coeffs(g);
    const auto th = draw_range_thresholds(4, 1.0, 3);
    const std::vector<int> w = {1, -1, 1, -1};
    const RVector lambda = th.lambda.cwiseMin(0.875);
    const auto mp = build_moment_program(fc, w, lambda, default_v_max(fc, w, lambda, 1.0), 3);
    conic::SolverOptions opt;
    opt.tolerance = 1e-7;
    opt.exec = exec_of(st);
    for (auto _ : st)
        benchmark::DoNotOptimize(conic::solve_sdp(mp.sdp, opt));
}
BENCHMARK(BM_MomentSdp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Antares(benchmark::State &st)
{
    const Geometry g = random_geometry(100, 4);
    const RVector r = true_ranges(g, Point(120.0, -80.0, 0.0));
    const auto data = quantize_ranges(r, draw_range_thresholds(100, 4000.0, 5), 4000.0);
    AntaresConfig cfg;
    cfg.exec = exec_of(st);
    for (auto _ : st)
        benchmark::DoNotOptimize(antares(data, g, cfg));
}
BENCHMARK(BM_Antares)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DelayTrialLoop(benchmark::State &st)
{
    harness::ScenarioSpec s;
    s.samples = 40;
    s.trials = 4;
    s.snr1_db = 10.0;
    s.exec = exec_of(st);
    for (auto _ : st)
        benchmark::DoNotOptimize(harness::run_delay_trials(s));
}
BENCHMARK(BM_DelayTrialLoop)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
