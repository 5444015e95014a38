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

#pragma once

// Scenario generation and the Monte Carlo drivers: delay-estimation sweeps,
// localization sweeps over the node count, and single end-to-end runs.

#include "onebit/antares.hpp"
#include "onebit/crb.hpp"
#include "onebit/delay_est.hpp"
#include "onebit/geo_loc.hpp"
#include "onebit/lasserre_loc.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace onebit::harness {

enum class GeometryKind { circle, l_shape, random };
enum class Estimator { full, antares, lasserre };

std::string to_string(GeometryKind k);
std::string to_string(Estimator e);
GeometryKind parse_geometry(const std::string &s); // circle, l, l_shape, random
Estimator parse_estimator(const std::string &s);
std::vector<Estimator> parse_estimators(const std::string &csv);

struct ScenarioSpec {
    GeometryKind geometry = GeometryKind::circle;
    double half_width = 800.0;  // area is [-half_width, half_width]^2
    double radius = 800.0;      // circle geometry
    int nodes = 20;
    double snr1_db = 0.0;
    double snr_exponent = 2.0;  // SNR_m = SNR_1 (d_m / d_1)^exponent
    double noise_power = 1.0;   // gains are set for unit noise; 0 gives noiseless runs
    int oversampling = 1;
    double bandwidth = 180e3;   // Hz
    int samples = 100;          // L
    int grid = 0;               // N; 0 selects 2 L
    double rho = 1.0;           // one-bit program
    double rho_full = 0.1;      // full-precision program
    int min_separation = 2;     // delay pick separation, grid points
    double r_max = 4000.0;
    int trials = 200;
    std::uint64_t seed = 1;
    std::vector<Estimator> estimators{Estimator::full, Estimator::antares, Estimator::lasserre};
    int order = 3;
    double v_max = 0.0;                 // m^4; 0 selects the automatic bound
    long long lasserre_max_moments = 2000; // larger relaxations are skipped and counted as failures
    std::optional<Point> target;        // drawn per trial when absent
    std::optional<Point> base;
    double direct_fraction = 0.2;       // delay experiment, of the window T
    double indirect_fraction = 0.35;
    Exec exec = Exec::parallel;

    int grid_size() const { return grid > 0 ? grid : 2 * samples; }
    bool uses(Estimator e) const;
    void validate() const;
};

std::string spec_to_json(const ScenarioSpec &s);
ScenarioSpec spec_from_json(const std::string &text);

// Circle R = 800, target (-309, 287), base (-208, -312), M = 20.
ScenarioSpec reference_circle_scenario();

struct Scene {
    Geometry g;
    Point target = Point::Zero();
};

// Nodes per kind; target and base from the scenario when fixed, otherwise uniform
// over the area and redrawn while within 1 m of a node.
Scene generate_geometry(const ScenarioSpec &s, std::uint64_t seed);

// Linear per-node SNR_m = SNR_1 (d_m / d_1)^exponent, d_m = |target - node_m|.
RVector snr_profile(double snr1_db, const Geometry &g, const Point &target, double exponent = 2.0);

// Indirect-path gain magnitude realizing a linear SNR for unit noise power.
double gain_for_snr(double snr_linear, const Waveform &w, double delay, const SamplingConfig &cfg);

struct MetricsRow {
    std::string sweep_var;
    double sweep_value = 0.0;
    std::string estimator;
    double nrmse = 0.0;
    double rel_nrmse = 0.0;
    double crb = 0.0; // NaN where no bound applies
    int failures = 0;
    int trials = 0;
    double wall_ms = 0.0;
    std::uint64_t seed = 0;
};

void write_csv(const std::vector<MetricsRow> &rows, std::ostream &os);
void write_json(const std::vector<MetricsRow> &rows, std::ostream &os);

// Delay experiments on a single node.
// The rho sweep sets the one-bit and full-precision weights to the same value.
enum class DelaySweep { snr, oversampling, samples, rho };

struct DelayTrial {
    std::uint64_t seed = 0;
    double truth = 0.0;   // indirect delay, s
    double onebit = 0.0;
    double full = 0.0;
    bool onebit_ok = false;
    bool full_ok = false;
    double onebit_ms = 0.0;
    double full_ms = 0.0;
};

// Trials at one sweep point; the scenario fields snr1_db, oversampling and samples
// set the operating point. Both estimators see the same noise and thresholds.
std::vector<DelayTrial> run_delay_trials(const ScenarioSpec &s);

// sqrt(sum_j (est_j - truth)^2) / (truth J) over the successful trials.
double delay_nrmse(const std::vector<DelayTrial> &trials, bool onebit, int *failures = nullptr);
double median_relative_error(const std::vector<DelayTrial> &trials, bool onebit);

std::vector<MetricsRow> run_delay_experiment(const ScenarioSpec &s, DelaySweep sweep,
                                             const std::vector<double> &values);

// Localization.
struct EstimatorOutcome {
    Estimator estimator = Estimator::full;
    bool ok = false;
    Point target = Point::Zero();
    double error_m = 0.0;
    double wall_ms = 0.0;
    std::string message;
};

struct TrialResult {
    std::uint64_t seed = 0;
    Scene scene;
    RVector ranges_true;
    RVector ranges_onebit; // node estimates from the one-bit samples
    RVector ranges_full;
    std::vector<int> onebit_ok, full_ok;
    OneBitRangeData uplink;
    std::vector<EstimatorOutcome> outcomes;
    double delay_ms = 0.0;

    const EstimatorOutcome *outcome(Estimator e) const;
    std::string to_json() const;
};

TrialResult run_trial(const ScenarioSpec &s, std::uint64_t trial_seed);

// Trials at spec.nodes; trial j uses derive_seed(seed, j).
std::vector<TrialResult> run_localization_trials(const ScenarioSpec &s);

// sqrt(sum_j |e_j|^2 / |p_j|^2) / J over the successful trials.
double location_nrmse(const std::vector<TrialResult> &trials, Estimator e, int *failures = nullptr);

struct CrbSummary {
    double value = 0.0;   // mean normalized root CRB over trials
    int failures = 0;     // trials with a singular information block
    RVector upsilon;      // per-node spreads used, m
};

// Spreads are the per-node RMS full-precision range errors over the trials.
CrbSummary crb_for_trials(const std::vector<TrialResult> &trials, const ScenarioSpec &s);

std::vector<MetricsRow> localization_rows(const std::vector<TrialResult> &trials, const ScenarioSpec &s);
std::vector<MetricsRow> run_localization_experiment(const ScenarioSpec &s, const std::vector<int> &node_counts);

struct SingleScenario {
    TrialResult trial;
    std::string summary;
};

SingleScenario run_single_scenario(const ScenarioSpec &s);

} // namespace onebit::harness
