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

#include "onebit/harness.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <sstream>

using namespace onebit;
using namespace onebit::harness;

namespace {

// Small settings that keep one trial well under a second.
ScenarioSpec small_spec()
{
    ScenarioSpec s;
    s.geometry = GeometryKind::random;
    s.nodes = 5;
    s.samples = 40;
    s.trials = 2;
    s.snr1_db = 10.0;
    s.estimators = {Estimator::full, Estimator::antares};
    return s;
}

nlohmann::json strip_times(const std::string &text)
{
    auto j = nlohmann::json::parse(text);
    j.erase("delay_ms");
    for (auto &e : j["estimates"])
        e.erase("wall_ms");
    return j;
}

} // namespace

TEST(Geometry, CircleOfFour)
{
    ScenarioSpec s;
    s.nodes = 4;
    s.radius = 800.0;
    const Scene sc = generate_geometry(s, 1);
    const double expect[4][2] = {{800, 0}, {0, 800}, {-800, 0}, {0, -800}};
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(sc.g.nodes[i].x(), expect[i][0], 1e-9);
        EXPECT_NEAR(sc.g.nodes[i].y(), expect[i][1], 1e-9);
        EXPECT_NEAR(sc.g.nodes[i].norm(), 800.0, 1e-9);
    }
}

TEST(Geometry, ReferenceCirclePlacements)
{
    const ScenarioSpec s = reference_circle_scenario();
    const Scene sc = generate_geometry(s, 17);
    EXPECT_EQ(sc.g.num_nodes(), 20);
    EXPECT_EQ(sc.target, Point(-309.0, 287.0, 0.0));
    EXPECT_EQ(sc.g.base, Point(-208.0, -312.0, 0.0));
}

TEST(Geometry, RandomWithinBounds)
{
    ScenarioSpec s;
    s.geometry = GeometryKind::random;
    s.nodes = 50;
    s.half_width = 300.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Scene sc = generate_geometry(s, seed);
        for (const auto &n : sc.g.nodes) {
            EXPECT_LE(std::abs(n.x()), 300.0);
            EXPECT_LE(std::abs(n.y()), 300.0);
        }
        EXPECT_LE(std::abs(sc.target.x()), 300.0);
        EXPECT_LE(std::abs(sc.g.base.y()), 300.0);
        for (const auto &n : sc.g.nodes)
            EXPECT_GE((n - sc.target).norm(), 1.0);
    }
}

TEST(Geometry, LShapeEquallySpaced)
{
    ScenarioSpec s;
    s.geometry = GeometryKind::l_shape;
    s.nodes = 9;
    s.half_width = 1000.0;
    const Scene sc = generate_geometry(s, 3);
    EXPECT_EQ(sc.g.nodes.front(), Point(1000.0, -1000.0, 0.0));
    EXPECT_EQ(sc.g.nodes[4], Point(-1000.0, -1000.0, 0.0));
    EXPECT_EQ(sc.g.nodes.back(), Point(-1000.0, 1000.0, 0.0));
    for (int i = 1; i < 9; ++i)
        EXPECT_NEAR((sc.g.nodes[i] - sc.g.nodes[i - 1]).norm(), 500.0, 1e-9);
}

TEST(Geometry, DeterministicForSeed)
{
    ScenarioSpec s;
    s.geometry = GeometryKind::random;
    const Scene a = generate_geometry(s, 5), b = generate_geometry(s, 5), c = generate_geometry(s, 6);
    EXPECT_EQ(a.target, b.target);
    EXPECT_EQ(a.g.nodes[3], b.g.nodes[3]);
    EXPECT_NE(a.target, c.target);
}

TEST(Snr, Profile)
{
    Geometry g;
    g.nodes = {Point(100, 0, 0), Point(-100, 0, 0), Point(200, 0, 0)};
    const Point target = Point::Zero();
    const RVector snr = snr_profile(0.0, g, target);
    EXPECT_NEAR(snr[0], 1.0, 1e-15);
    EXPECT_NEAR(snr[1], 1.0, 1e-15);
    EXPECT_NEAR(snr[2], 4.0, 1e-12);
    EXPECT_NEAR(10.0 * std::log10(snr[2]), 6.0206, 1e-4);
    EXPECT_NEAR(snr_profile(-7.5, g, target)[0], std::pow(10.0, -0.75), 1e-15);
    EXPECT_NEAR(snr_profile(0.0, g, target, -2.0)[2], 0.25, 1e-12);
}

TEST(Snr, GainRealizesDefinition)
{
    SamplingConfig cfg;
    const Waveform w = Waveform::pi2_bpsk(cfg, 3);
    const double tau = 0.3 * cfg.duration();
    const double a = gain_for_snr(std::pow(10.0, 0.45), w, tau, cfg);
    const double snr_db = 10.0 * std::log10(a * a * sampled_signal_vector(w, tau, cfg).squaredNorm() / 1.0);
    EXPECT_NEAR(snr_db, 4.5, 1e-12);
}

TEST(ScenarioSpec, JsonRoundTrip)
{
    ScenarioSpec s = reference_circle_scenario();
    s.trials = 7;
    s.rho = 0.25;
    s.estimators = {Estimator::antares};
    s.exec = Exec::serial;
    const ScenarioSpec t = spec_from_json(spec_to_json(s));
    EXPECT_EQ(t.trials, 7);
    EXPECT_EQ(t.rho, 0.25);
    ASSERT_EQ(t.estimators.size(), 1u);
    EXPECT_EQ(t.estimators[0], Estimator::antares);
    ASSERT_TRUE(t.target.has_value());
    EXPECT_EQ(*t.target, Point(-309.0, 287.0, 0.0));
    EXPECT_EQ(t.exec, Exec::serial);
    EXPECT_EQ(spec_to_json(t), spec_to_json(s));
}

TEST(ScenarioSpec, RejectsInvalid)
{
    EXPECT_THROW(spec_from_json(R"({"trials": 0})"), Error);
    EXPECT_THROW(spec_from_json(R"({"half_width": -1})"), Error);
    EXPECT_THROW(spec_from_json(R"({"geometry": "hexagon"})"), Error);
    EXPECT_THROW(spec_from_json(R"({"target": [1]})"), Error);
    EXPECT_THROW(parse_estimators(""), Error);
    EXPECT_EQ(parse_estimators("full,lasserre").size(), 2u);
    EXPECT_EQ(parse_geometry("l"), GeometryKind::l_shape);
}

TEST(Metrics, CsvHeaderAndSeed)
{
    std::vector<MetricsRow> rows = {{"nodes", 20, "antares", 0.1, 0.02, 0.05, 1, 200, 3.5, 42}};
    std::ostringstream os;
    write_csv(rows, os);
    EXPECT_EQ(os.str(), "sweep_var,estimator,nrmse,rel_nrmse,crb,failures,trials,wall_ms,seed\n"
                        "nodes=20,antares,0.1,0.02,0.05,1,200,3.5,42\n");
    std::ostringstream js;
    write_json(rows, js);
    EXPECT_EQ(nlohmann::json::parse(js.str())[0]["seed"], 42);
}

TEST(Metrics, DelayNrmseFormula)
{
    std::vector<DelayTrial> t(4);
    for (auto &x : t) {
        x.truth = 2.0;
        x.full = 2.0;
        x.onebit = 2.0;
        x.full_ok = x.onebit_ok = true;
    }
    t[0].onebit = 3.0;
    t[1].onebit = 0.0;
    t[3].onebit_ok = false;
    int failures = 0;
    EXPECT_EQ(delay_nrmse(t, false), 0.0);
    EXPECT_NEAR(delay_nrmse(t, true, &failures), std::sqrt(5.0) / (2.0 * 3), 1e-15);
    EXPECT_EQ(failures, 1);
    EXPECT_NEAR(median_relative_error(t, true), 0.5, 1e-15);
}

TEST(Metrics, LocationNrmse)
{
    std::vector<TrialResult> trials(2);
    trials[0].scene.target = Point(300.0, 400.0, 0.0);
    trials[1].scene.target = Point(0.0, 100.0, 0.0);
    for (auto &t : trials)
        t.outcomes.push_back({Estimator::full, true, t.scene.target, 0.0, 1.0, ""});
    EXPECT_EQ(location_nrmse(trials, Estimator::full), 0.0);
    trials[0].outcomes[0].error_m = 50.0;
    trials[1].outcomes.push_back({Estimator::antares, false, Point::Zero(), 0.0, 1.0, "x"});
    EXPECT_NEAR(location_nrmse(trials, Estimator::full), std::sqrt(0.01) / 2.0, 1e-15);
    int failures = 0;
    EXPECT_TRUE(std::isnan(location_nrmse(trials, Estimator::antares, &failures)));
    EXPECT_EQ(failures, 2);
}

TEST(Delay, NoiselessOnGridRecovery)
{
    ScenarioSpec s;
    s.trials = 20;
    s.noise_power = 0.0;
    s.snr1_db = 20.0;
    const auto t = run_delay_trials(s);
    EXPECT_LE(delay_nrmse(t, false), 1e-12);
    // Signs pin the support only asymptotically in L; most trials are exact.
    EXPECT_LE(median_relative_error(t, true), 1e-12);
}

TEST(Delay, SerialMatchesParallel)
{
    ScenarioSpec s;
    s.samples = 30;
    s.trials = 3;
    s.snr1_db = 5.0;
    s.exec = Exec::serial;
    const auto a = run_delay_trials(s);
    s.exec = Exec::parallel;
    const auto b = run_delay_trials(s);
    for (int j = 0; j < 3; ++j) {
        EXPECT_EQ(a[j].onebit, b[j].onebit);
        EXPECT_EQ(a[j].full, b[j].full);
        EXPECT_EQ(a[j].seed, b[j].seed);
    }
}

TEST(Delay, ExperimentRowsPerPoint)
{
    ScenarioSpec s;
    s.samples = 30;
    s.trials = 2;
    const auto rows = run_delay_experiment(s, DelaySweep::snr, {0.0, 10.0});
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].estimator, "full");
    EXPECT_EQ(rows[0].rel_nrmse, 0.0);
    EXPECT_EQ(rows[1].estimator, "onebit");
    EXPECT_EQ(rows[3].sweep_value, 10.0);
    EXPECT_TRUE(std::isnan(rows[0].crb));
}

TEST(Localization, TrialIsDeterministic)
{
    const ScenarioSpec s = small_spec();
    const TrialResult a = run_trial(s, 99), b = run_trial(s, 99);
    EXPECT_EQ(strip_times(a.to_json()), strip_times(b.to_json()));
    EXPECT_EQ(a.seed, 99u);
    ASSERT_NE(a.outcome(Estimator::antares), nullptr);
    EXPECT_EQ(a.outcome(Estimator::lasserre), nullptr);
}

TEST(Localization, NoiselessWideBandPipeline)
{
    // At 3 MHz one grid cell is 25 m of range, fine enough to check the
    // pipeline end to end. Nodes whose two paths fall within a cell report no
    // detection, which is the expected outcome there.
    ScenarioSpec s = small_spec();
    s.noise_power = 0.0;
    s.bandwidth = 3e6;
    s.samples = 100;
    s.nodes = 6;
    const double cell = kSpeedOfLight / (2.0 * s.bandwidth) / 2.0;
    int detected = 0;
    for (std::uint64_t seed : {5u, 6u}) {
        const TrialResult t = run_trial(s, seed);
        for (int i = 0; i < s.nodes; ++i) {
            if (t.full_ok[i]) {
                ++detected;
                EXPECT_LE(std::abs(t.ranges_full[i] - t.ranges_true[i]), cell) << seed << " " << i;
            }
            EXPECT_EQ(t.uplink.w[i], t.ranges_onebit[i] >= t.uplink.lambda[i] ? 1 : -1);
        }
        const auto *full = t.outcome(Estimator::full);
        ASSERT_NE(full, nullptr);
        if (full->ok)
            EXPECT_LE(full->error_m, 4.0 * cell);
    }
    EXPECT_GE(detected, s.nodes);
}

TEST(Localization, RowsIncludeCrbAndZeroRelativeFull)
{
    ScenarioSpec s = small_spec();
    s.snr1_db = 20.0;
    const auto trials = run_localization_trials(s);
    const auto rows = localization_rows(trials, s);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].estimator, "full");
    if (!std::isnan(rows[0].nrmse))
        EXPECT_EQ(rows[0].rel_nrmse, 0.0);
    EXPECT_EQ(rows[2].estimator, "crb");
    EXPECT_EQ(rows[2].trials, 2);
}

TEST(Localization, LasserreSkippedAboveMomentLimit)
{
    ScenarioSpec s = small_spec();
    s.nodes = 8;
    s.estimators = {Estimator::lasserre};
    s.lasserre_max_moments = 100;
    s.trials = 1;
    const TrialResult t = run_trial(s, 1);
    const auto *o = t.outcome(Estimator::lasserre);
    ASSERT_NE(o, nullptr);
    EXPECT_FALSE(o->ok);
    EXPECT_NE(o->message.find("moments"), std::string::npos);
}

TEST(SingleScenario, SummaryListsEstimators)
{
    ScenarioSpec s = small_spec();
    const auto r = run_single_scenario(s);
    EXPECT_NE(r.summary.find("antares"), std::string::npos);
    EXPECT_NE(r.summary.find("full"), std::string::npos);
}
