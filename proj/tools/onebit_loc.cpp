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

// Command-line driver for the delay, localization and bound experiments.

#include "onebit/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace onebit;
using namespace onebit::harness;

namespace {

struct Flags {
    std::string scenario;
    std::string geometry;
    std::string nodes;
    std::string snr1_db;
    std::string oversample;
    std::string rho;
    int samples = 0;
    int grid = 0;
    double rho_full = 0.0;
    int order = 0;
    double vmax = -1.0;
    int trials = 0;
    long long seed = -1;
    std::string estimators;
    std::string out;
    std::string format = "csv";
    double snr_exponent = 0.0;
    bool snr_exponent_set = false;
    double bandwidth = 0.0;
    int min_separation = 0;
    std::string exec;
};

std::vector<double> parse_list(const std::string &s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(std::stod(item));
    return out;
}

double first(const std::string &s)
{
    const auto v = parse_list(s);
    if (v.empty())
        throw Error("empty value list");
    return v.front();
}

ScenarioSpec build_spec(const Flags &f, ScenarioSpec s)
{
    if (!f.scenario.empty()) {
        std::ifstream in(f.scenario);
        if (!in)
            throw Error("cannot open scenario file " + f.scenario);
        std::stringstream ss;
        ss << in.rdbuf();
        s = spec_from_json(ss.str());
    }
    if (!f.geometry.empty())
        s.geometry = parse_geometry(f.geometry);
    if (!f.nodes.empty())
        s.nodes = static_cast<int>(first(f.nodes));
    if (!f.snr1_db.empty())
        s.snr1_db = first(f.snr1_db);
    if (!f.oversample.empty())
        s.oversampling = static_cast<int>(first(f.oversample));
    if (!f.rho.empty())
        s.rho = first(f.rho);
    if (f.samples > 0)
        s.samples = f.samples;
    if (f.grid > 0)
        s.grid = f.grid;
    if (f.rho_full > 0.0)
        s.rho_full = f.rho_full;
    if (f.order > 0)
        s.order = f.order;
    if (f.vmax >= 0.0)
        s.v_max = f.vmax;
    if (f.trials > 0)
        s.trials = f.trials;
    if (f.seed >= 0)
        s.seed = static_cast<std::uint64_t>(f.seed);
    if (!f.estimators.empty())
        s.estimators = parse_estimators(f.estimators);
    if (f.snr_exponent_set)
        s.snr_exponent = f.snr_exponent;
    if (f.bandwidth > 0.0)
        s.bandwidth = f.bandwidth;
    if (f.min_separation > 0)
        s.min_separation = f.min_separation;
    if (!f.exec.empty())
        s.exec = f.exec == "serial" ? Exec::serial : Exec::parallel;
    s.validate();
    return s;
}

void emit(const std::vector<MetricsRow> &rows, const Flags &f)
{
    std::ofstream file;
    std::ostream *os = &std::cout;
    if (!f.out.empty()) {
        file.open(f.out);
        if (!file)
            throw Error("cannot write " + f.out);
        os = &file;
    }
    if (f.format == "json")
        write_json(rows, *os);
    else
        write_csv(rows, *os);
}

void add_common(CLI::App *cmd, Flags &f)
{
    cmd->add_option("--scenario", f.scenario, "Scenario JSON file (flags override its fields)");
    cmd->add_option("--geometry", f.geometry, "Node geometry")->check(CLI::IsMember({"circle", "l", "l_shape", "random"}));
    cmd->add_option("--nodes", f.nodes, "Node count M (comma list for node-sweep and crb-curve)");
    cmd->add_option("--snr1-db", f.snr1_db, "Reference SNR in dB (comma list for delay-sweep)");
    cmd->add_option("--oversample", f.oversample, "Oversampling factor (comma list for oversampling-sweep)");
    cmd->add_option("--samples", f.samples, "Samples per node L");
    cmd->add_option("--grid", f.grid, "Delay grid size N (default 2L)");
    cmd->add_option("--rho", f.rho, "One-bit slack weight (comma list for rho-sweep)");
    cmd->add_option("--rho-full", f.rho_full, "Full-precision slack weight");
    cmd->add_option("--order", f.order, "Relaxation order p");
    cmd->add_option("--vmax", f.vmax, "Epigraph bound v_max in m^4 (0 selects automatically)");
    cmd->add_option("--trials", f.trials, "Monte Carlo trials J");
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--estimators", f.estimators, "Comma list of full, antares, lasserre");
    cmd->add_option("--out", f.out, "Output file (default stdout)");
    cmd->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--snr-exponent", f.snr_exponent, "Exponent in SNR_m = SNR_1 (d_m/d_1)^k")
        ->each([&f](const std::string &) { f.snr_exponent_set = true; });
    cmd->add_option("--bandwidth", f.bandwidth, "Signal bandwidth B in Hz");
    cmd->add_option("--min-separation", f.min_separation, "Grid separation between the two delay picks");
    cmd->add_option("--exec", f.exec, "Trial loop")->check(CLI::IsMember({"serial", "parallel"}));
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"One-bit passive localization simulator"};
    app.require_subcommand(1);
    Flags f;

    auto *delay = app.add_subcommand("delay-sweep", "Delay N-RMSE versus SNR, one-bit and full precision");
    auto *over = app.add_subcommand("oversampling-sweep", "Delay N-RMSE versus the oversampling factor");
    auto *rho = app.add_subcommand("rho-sweep", "Delay N-RMSE versus the slack weight rho");
    auto *once = app.add_subcommand("localize-once", "One end-to-end run with every estimator");
    auto *nodes = app.add_subcommand("node-sweep", "Localization N-RMSE versus the node count, with the CRB");
    auto *crb = app.add_subcommand("crb-curve", "Normalized root CRB versus the node count");
    for (auto *c : {delay, over, rho, once, nodes, crb})
        add_common(c, f);

    CLI11_PARSE(app, argc, argv);

    try {
        if (delay->parsed()) {
            ScenarioSpec s = build_spec(f, ScenarioSpec{});
            const auto values = f.snr1_db.empty() ? std::vector<double>{-10, -5, 0, 5, 10, 15, 20}
                                                  : parse_list(f.snr1_db);
            emit(run_delay_experiment(s, DelaySweep::snr, values), f);
        } else if (over->parsed()) {
            ScenarioSpec s = build_spec(f, ScenarioSpec{});
            if (f.snr1_db.empty())
                s.snr1_db = -5.0;
            const auto values = f.oversample.empty() ? std::vector<double>{1, 2, 3, 4, 5} : parse_list(f.oversample);
            emit(run_delay_experiment(s, DelaySweep::oversampling, values), f);
        } else if (rho->parsed()) {
            ScenarioSpec s = build_spec(f, ScenarioSpec{});
            const auto values = f.rho.empty() ? std::vector<double>{0.01, 0.03, 0.1, 0.3, 1, 3} : parse_list(f.rho);
            emit(run_delay_experiment(s, DelaySweep::rho, values), f);
        } else if (once->parsed()) {
            const ScenarioSpec s = build_spec(f, reference_circle_scenario());
            const auto r = run_single_scenario(s);
            if (f.format == "json") {
                std::ofstream file;
                std::ostream &os = f.out.empty() ? std::cout : (file.open(f.out), file);
                os << r.trial.to_json() << "\n";
            } else {
                std::cout << r.summary;
            }
        } else {
            ScenarioSpec base;
            base.geometry = GeometryKind::random;
            base.snr1_db = -2.0;
            if (crb->parsed())
                base.estimators = {Estimator::full};
            const ScenarioSpec s = build_spec(f, base);
            const auto counts = f.nodes.empty() ? std::vector<double>{10, 20, 40, 60, 80, 100} : parse_list(f.nodes);
            std::vector<int> m;
            for (double v : counts)
                m.push_back(static_cast<int>(v));
            auto rows = run_localization_experiment(s, m);
            if (crb->parsed()) {
                std::vector<MetricsRow> only;
                for (const auto &r : rows)
                    if (r.estimator == "crb" || r.estimator == "full")
                        only.push_back(r);
                rows = only;
            }
            emit(rows, f);
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
