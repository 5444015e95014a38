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

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace onebit::harness {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

double max_component(const CVector &y)
{
    double a = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        a = std::max({a, std::abs(y[i].real()), std::abs(y[i].imag())});
    return a;
}

Point uniform_point(std::mt19937_64 &rng, double half_width)
{
    std::uniform_real_distribution<double> u(-half_width, half_width);
    const double x = u(rng);
    return Point(x, u(rng), 0.0);
}

bool near_node(const Geometry &g, const Point &p)
{
    for (const auto &n : g.nodes)
        if ((n - p).norm() < 1.0)
            return true;
    return false;
}

// Shared per-experiment state: the noise factor depends only on (L, theta).
struct DelayContext {
    SamplingConfig cfg;
    CovarianceFactor factor;
    int grid = 0;
};

DelayContext make_context(const ScenarioSpec &s)
{
    DelayContext c;
    c.cfg.num_samples = s.samples;
    c.cfg.oversampling = s.oversampling;
    c.cfg.bandwidth = s.bandwidth;
    c.cfg.validate();
    c.factor = CovarianceFactor::from(noise_covariance(s.samples, s.oversampling));
    c.grid = s.grid_size();
    return c;
}

struct NodeDelays {
    double onebit = 0.0, full = 0.0;
    bool onebit_ok = false, full_ok = false;
    double onebit_ms = 0.0, full_ms = 0.0;
};

// One node: simulate, quantize with dithering thresholds, run both estimators.
NodeDelays estimate_node(const ScenarioSpec &s, const DelayContext &c, const Waveform &w,
                         const Dictionary &d, const ChannelParams &ch, std::uint64_t seed)
{
    NodeDelays out;
    const CVector y = simulate_received(w, ch, c.cfg, c.factor, derive_seed(seed, 2));
    const double a_max = std::max(max_component(y), 1e-12);
    const CVector gamma = draw_temporal_thresholds(c.cfg.num_samples, a_max, derive_seed(seed, 3));
    const OneBitVector z = one_bit_quantize(y, gamma);

    SparseOptions opt;
    opt.rho = s.rho;
    auto t0 = Clock::now();
    try {
        const auto sol = estimate_sparse(z, gamma, d, c.factor, opt);
        out.onebit = extract_delays(sol, d.grid, s.min_separation).indirect;
        out.onebit_ok = true;
    } catch (const Error &) {
    }
    out.onebit_ms = elapsed_ms(t0);

    opt.rho = s.rho_full;
    t0 = Clock::now();
    try {
        const auto sol = estimate_full_precision(y, d, c.factor, opt);
        out.full = extract_delays(sol, d.grid, s.min_separation).indirect;
        out.full_ok = true;
    } catch (const Error &) {
    }
    out.full_ms = elapsed_ms(t0);
    return out;
}

ChannelParams make_channel(double gain, double direct_delay, double indirect_delay, double noise_power,
                           std::uint64_t seed)
{
    std::mt19937_64 rng(derive_seed(seed, 1));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    ChannelParams ch;
    ch.direct_gain = std::polar(gain, phase(rng));
    ch.indirect_gain = std::polar(gain, phase(rng));
    ch.direct_delay = direct_delay;
    ch.indirect_delay = indirect_delay;
    ch.noise_power = noise_power;
    return ch;
}

template <class F>
void for_trials(int count, Exec exec, F &&body)
{
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int j = 0; j < count; ++j)
            body(j);
    } else {
        for (int j = 0; j < count; ++j)
            body(j);
    }
}

double nan()
{
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

std::string to_string(GeometryKind k)
{
    switch (k) {
    case GeometryKind::circle: return "circle";
    case GeometryKind::l_shape: return "l_shape";
    case GeometryKind::random: return "random";
    }
    return "?";
}

std::string to_string(Estimator e)
{
    switch (e) {
    case Estimator::full: return "full";
    case Estimator::antares: return "antares";
    case Estimator::lasserre: return "lasserre";
    }
    return "?";
}

GeometryKind parse_geometry(const std::string &s)
{
    if (s == "circle")
        return GeometryKind::circle;
    if (s == "l" || s == "l_shape")
        return GeometryKind::l_shape;
    if (s == "random")
        return GeometryKind::random;
    throw Error("unknown geometry '" + s + "'");
}

Estimator parse_estimator(const std::string &s)
{
    if (s == "full")
        return Estimator::full;
    if (s == "antares")
        return Estimator::antares;
    if (s == "lasserre" || s == "optimal")
        return Estimator::lasserre;
    throw Error("unknown estimator '" + s + "'");
}

std::vector<Estimator> parse_estimators(const std::string &csv)
{
    std::vector<Estimator> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(parse_estimator(item));
    if (out.empty())
        throw Error("no estimators given");
    return out;
}

bool ScenarioSpec::uses(Estimator e) const
{
    return std::find(estimators.begin(), estimators.end(), e) != estimators.end();
}

void ScenarioSpec::validate() const
{
    if (trials < 1)
        throw Error("trials must be >= 1");
    if (!(half_width > 0.0) || !(radius > 0.0))
        throw Error("area bounds must be positive");
    if (nodes < 4)
        throw Error("planar localization needs at least 4 nodes");
    if (!(bandwidth > 0.0))
        throw Error("bandwidth must be positive");
    if (samples < 1 || oversampling < 1)
        throw Error("samples and oversampling must be >= 1");
    if (grid != 0 && grid < samples)
        throw Error("grid size must be >= L");
    if (!(rho > 0.0) || !(rho_full > 0.0))
        throw Error("rho must be positive");
    if (min_separation < 1)
        throw Error("min separation must be >= 1");
    if (!(r_max > 0.0))
        throw Error("r_max must be positive");
    if (!(noise_power >= 0.0))
        throw Error("noise power must be nonnegative");
    if (!(direct_fraction >= 0.0 && direct_fraction < indirect_fraction && indirect_fraction < 1.0))
        throw Error("delay fractions must satisfy 0 <= direct < indirect < 1");
    if (order < 3)
        throw Error("relaxation order must be >= 3");
}

std::string spec_to_json(const ScenarioSpec &s)
{
    json j;
    j["geometry"] = to_string(s.geometry);
    j["half_width"] = s.half_width;
    j["radius"] = s.radius;
    j["nodes"] = s.nodes;
    j["snr1_db"] = s.snr1_db;
    j["snr_exponent"] = s.snr_exponent;
    j["noise_power"] = s.noise_power;
    j["oversampling"] = s.oversampling;
    j["bandwidth"] = s.bandwidth;
    j["samples"] = s.samples;
    j["grid"] = s.grid;
    j["rho"] = s.rho;
    j["rho_full"] = s.rho_full;
    j["min_separation"] = s.min_separation;
    j["r_max"] = s.r_max;
    j["trials"] = s.trials;
    j["seed"] = s.seed;
    std::vector<std::string> est;
    for (auto e : s.estimators)
        est.push_back(to_string(e));
    j["estimators"] = est;
    j["order"] = s.order;
    j["v_max"] = s.v_max;
    j["lasserre_max_moments"] = s.lasserre_max_moments;
    if (s.target)
        j["target"] = {s.target->x(), s.target->y()};
    if (s.base)
        j["base"] = {s.base->x(), s.base->y()};
    j["direct_fraction"] = s.direct_fraction;
    j["indirect_fraction"] = s.indirect_fraction;
    j["exec"] = s.exec == Exec::parallel ? "parallel" : "serial";
    return j.dump(2);
}

ScenarioSpec spec_from_json(const std::string &text)
{
    const json j = json::parse(text);
    ScenarioSpec s;
    auto get = [&](const char *key, auto &field) {
        if (j.contains(key))
            field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("geometry"))
        s.geometry = parse_geometry(j.at("geometry").get<std::string>());
    get("half_width", s.half_width);
    get("radius", s.radius);
    get("nodes", s.nodes);
    get("snr1_db", s.snr1_db);
    get("snr_exponent", s.snr_exponent);
    get("noise_power", s.noise_power);
    get("oversampling", s.oversampling);
    get("bandwidth", s.bandwidth);
    get("samples", s.samples);
    get("grid", s.grid);
    get("rho", s.rho);
    get("rho_full", s.rho_full);
    get("min_separation", s.min_separation);
    get("r_max", s.r_max);
    get("trials", s.trials);
    get("seed", s.seed);
    get("order", s.order);
    get("v_max", s.v_max);
    get("lasserre_max_moments", s.lasserre_max_moments);
    get("direct_fraction", s.direct_fraction);
    get("indirect_fraction", s.indirect_fraction);
    if (j.contains("estimators")) {
        s.estimators.clear();
        for (const auto &e : j.at("estimators"))
            s.estimators.push_back(parse_estimator(e.get<std::string>()));
    }
    auto point = [&](const char *key, std::optional<Point> &field) {
        if (!j.contains(key))
            return;
        const auto &v = j.at(key);
        if (!v.is_array() || v.size() < 2)
            throw Error(std::string(key) + " must be an [x, y] array");
        field = Point(v[0].get<double>(), v[1].get<double>(), 0.0);
    };
    point("target", s.target);
    point("base", s.base);
    if (j.contains("exec"))
        s.exec = j.at("exec").get<std::string>() == "serial" ? Exec::serial : Exec::parallel;
    s.validate();
    return s;
}

ScenarioSpec reference_circle_scenario()
{
    ScenarioSpec s;
    s.geometry = GeometryKind::circle;
    s.radius = 800.0;
    s.half_width = 800.0;
    s.nodes = 20;
    s.snr1_db = 0.0;
    s.target = Point(-309.0, 287.0, 0.0);
    s.base = Point(-208.0, -312.0, 0.0);
    return s;
}

Scene generate_geometry(const ScenarioSpec &s, std::uint64_t seed)
{
    std::mt19937_64 rng(derive_seed(seed, 11));
    Scene sc;
    const int m = s.nodes;
    switch (s.geometry) {
    case GeometryKind::circle:
        for (int i = 0; i < m; ++i) {
            const double a = 2.0 * kPi * i / m;
            sc.g.nodes.emplace_back(s.radius * std::cos(a), s.radius * std::sin(a), 0.0);
        }
        break;
    case GeometryKind::l_shape: {
        // Polyline (a, -a) -> (-a, -a) -> (-a, a), equal arc-length spacing.
        const double a = s.half_width;
        const double step = 4.0 * a / (m - 1);
        for (int i = 0; i < m; ++i) {
            const double t = i * step;
            if (t <= 2.0 * a)
                sc.g.nodes.emplace_back(a - t, -a, 0.0);
            else
                sc.g.nodes.emplace_back(-a, -a + (t - 2.0 * a), 0.0);
        }
        break;
    }
    case GeometryKind::random:
        for (int i = 0; i < m; ++i)
            sc.g.nodes.push_back(uniform_point(rng, s.half_width));
        break;
    }
    auto draw = [&](const std::optional<Point> &fixed) {
        if (fixed)
            return *fixed;
        Point p;
        do
            p = uniform_point(rng, s.half_width);
        while (near_node(sc.g, p));
        return p;
    };
    sc.target = draw(s.target);
    sc.g.base = draw(s.base);
    sc.g.planar = true;
    return sc;
}

RVector snr_profile(double snr1_db, const Geometry &g, const Point &target, double exponent)
{
    const int m = g.num_nodes();
    const double d1 = (target - g.nodes[0]).norm();
    if (!(d1 > 0.0))
        throw Error("target coincides with the reference node");
    const double snr1 = db_to_linear(snr1_db);
    RVector out(m);
    for (int i = 0; i < m; ++i)
        out[i] = snr1 * std::pow((target - g.nodes[i]).norm() / d1, exponent);
    return out;
}

double gain_for_snr(double snr_linear, const Waveform &w, double delay, const SamplingConfig &cfg)
{
    const double energy = sampled_signal_vector(w, delay, cfg).squaredNorm();
    if (!(energy > 0.0))
        throw Error("signal has no energy inside the window");
    return std::sqrt(snr_linear / energy);
}

void write_csv(const std::vector<MetricsRow> &rows, std::ostream &os)
{
    os << "sweep_var,estimator,nrmse,rel_nrmse,crb,failures,trials,wall_ms,seed\n";
    os << std::setprecision(10);
    for (const auto &r : rows) {
        os << r.sweep_var << "=" << r.sweep_value << "," << r.estimator << "," << r.nrmse << ","
           << r.rel_nrmse << ",";
        if (!std::isnan(r.crb))
            os << r.crb;
        os << "," << r.failures << "," << r.trials << "," << r.wall_ms << "," << r.seed << "\n";
    }
}

void write_json(const std::vector<MetricsRow> &rows, std::ostream &os)
{
    json arr = json::array();
    for (const auto &r : rows) {
        json j;
        j["sweep_var"] = r.sweep_var;
        j["sweep_value"] = r.sweep_value;
        j["estimator"] = r.estimator;
        j["nrmse"] = r.nrmse;
        j["rel_nrmse"] = r.rel_nrmse;
        j["crb"] = std::isnan(r.crb) ? json(nullptr) : json(r.crb);
        j["failures"] = r.failures;
        j["trials"] = r.trials;
        j["wall_ms"] = r.wall_ms;
        j["seed"] = r.seed;
        arr.push_back(j);
    }
    os << arr.dump(2) << "\n";
}

std::vector<DelayTrial> run_delay_trials(const ScenarioSpec &s)
{
    s.validate();
    const DelayContext c = make_context(s);
    const double window = c.cfg.duration();
    const double tau = s.indirect_fraction * window;
    const double tau_direct = s.direct_fraction * window;
    const double snr = db_to_linear(s.snr1_db);
    std::vector<DelayTrial> out(s.trials);
    for_trials(s.trials, s.exec, [&](int j) {
        const std::uint64_t seed = derive_seed(s.seed, j);
        const Waveform w = Waveform::pi2_bpsk(c.cfg, derive_seed(seed, 4));
        const Dictionary d = build_dictionary(w, c.cfg, c.grid, Exec::serial);
        const double gain = gain_for_snr(snr, w, tau, c.cfg);
        const NodeDelays nd = estimate_node(s, c, w, d, make_channel(gain, tau_direct, tau, s.noise_power, seed), seed);
        DelayTrial &t = out[j];
        t.seed = seed;
        t.truth = tau;
        t.onebit = nd.onebit;
        t.full = nd.full;
        t.onebit_ok = nd.onebit_ok;
        t.full_ok = nd.full_ok;
        t.onebit_ms = nd.onebit_ms;
        t.full_ms = nd.full_ms;
    });
    return out;
}

double delay_nrmse(const std::vector<DelayTrial> &trials, bool onebit, int *failures)
{
    double acc = 0.0, truth = 0.0;
    int ok = 0, bad = 0;
    for (const auto &t : trials) {
        if (!(onebit ? t.onebit_ok : t.full_ok)) {
            ++bad;
            continue;
        }
        const double e = (onebit ? t.onebit : t.full) - t.truth;
        acc += e * e;
        truth = t.truth;
        ++ok;
    }
    if (failures)
        *failures = bad;
    if (ok == 0)
        return nan();
    return std::sqrt(acc) / (truth * ok);
}

double median_relative_error(const std::vector<DelayTrial> &trials, bool onebit)
{
    std::vector<double> v;
    for (const auto &t : trials)
        if (onebit ? t.onebit_ok : t.full_ok)
            v.push_back(std::abs((onebit ? t.onebit : t.full) - t.truth) / t.truth);
    if (v.empty())
        return nan();
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    if (v.size() % 2 == 1)
        return v[v.size() / 2];
    const double hi = v[v.size() / 2];
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + v.size() / 2));
}

std::vector<MetricsRow> run_delay_experiment(const ScenarioSpec &base, DelaySweep sweep,
                                             const std::vector<double> &values)
{
    std::vector<MetricsRow> rows;
    const char *name = sweep == DelaySweep::snr            ? "snr_db"
                       : sweep == DelaySweep::oversampling ? "oversampling"
                       : sweep == DelaySweep::samples      ? "samples"
                                                           : "rho";
    for (double v : values) {
        ScenarioSpec s = base;
        if (sweep == DelaySweep::snr)
            s.snr1_db = v;
        else if (sweep == DelaySweep::oversampling)
            s.oversampling = static_cast<int>(std::lround(v));
        else if (sweep == DelaySweep::samples)
            s.samples = static_cast<int>(std::lround(v));
        else
            s.rho = s.rho_full = v;
        const auto trials = run_delay_trials(s);
        int f_full = 0, f_one = 0;
        const double n_full = delay_nrmse(trials, false, &f_full);
        const double n_one = delay_nrmse(trials, true, &f_one);
        double ms_full = 0.0, ms_one = 0.0;
        for (const auto &t : trials) {
            ms_full += t.full_ms;
            ms_one += t.onebit_ms;
        }
        MetricsRow full{name, v, "full", n_full, 0.0, nan(), f_full, s.trials, ms_full / s.trials, s.seed};
        MetricsRow one{name, v, "onebit", n_one, (n_one - n_full) / n_full, nan(), f_one, s.trials,
                       ms_one / s.trials, s.seed};
        rows.push_back(full);
        rows.push_back(one);
    }
    return rows;
}

const EstimatorOutcome *TrialResult::outcome(Estimator e) const
{
    for (const auto &o : outcomes)
        if (o.estimator == e)
            return &o;
    return nullptr;
}

std::string TrialResult::to_json() const
{
    json j;
    j["seed"] = seed;
    j["target"] = {scene.target.x(), scene.target.y()};
    j["base"] = {scene.g.base.x(), scene.g.base.y()};
    json nodes = json::array();
    for (const auto &n : scene.g.nodes)
        nodes.push_back({n.x(), n.y()});
    j["nodes"] = nodes;
    auto vec = [](const RVector &v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    j["ranges_true"] = vec(ranges_true);
    j["ranges_onebit"] = vec(ranges_onebit);
    j["ranges_full"] = vec(ranges_full);
    j["onebit_ok"] = onebit_ok;
    j["full_ok"] = full_ok;
    j["uplink"] = json::parse(uplink_json(uplink));
    json outs = json::array();
    for (const auto &o : outcomes) {
        json e;
        e["estimator"] = harness::to_string(o.estimator);
        e["ok"] = o.ok;
        e["target"] = {o.target.x(), o.target.y()};
        e["error_m"] = o.error_m;
        e["wall_ms"] = o.wall_ms;
        e["message"] = o.message;
        outs.push_back(e);
    }
    j["estimates"] = outs;
    j["delay_ms"] = delay_ms;
    return j.dump(2);
}

TrialResult run_trial(const ScenarioSpec &s, std::uint64_t trial_seed)
{
    s.validate();
    const DelayContext c = make_context(s);
    TrialResult t;
    t.seed = trial_seed;
    t.scene = generate_geometry(s, trial_seed);
    const Geometry &g = t.scene.g;
    const int m = g.num_nodes();
    t.ranges_true = true_ranges(g, t.scene.target);
    const RVector snr = snr_profile(s.snr1_db, g, t.scene.target, s.snr_exponent);

    const Waveform w = Waveform::pi2_bpsk(c.cfg, derive_seed(trial_seed, 4));
    const Dictionary d = build_dictionary(w, c.cfg, c.grid, Exec::serial);
    const double window = c.cfg.duration();

    t.ranges_onebit = RVector::Zero(m);
    t.ranges_full = RVector::Zero(m);
    t.onebit_ok.assign(m, 0);
    t.full_ok.assign(m, 0);
    const auto t0 = Clock::now();
    for (int i = 0; i < m; ++i) {
        const double tau = t.ranges_true[i] / kSpeedOfLight;
        const double tau_direct = (g.base - g.nodes[i]).norm() / kSpeedOfLight;
        if (tau >= window)
            throw Error("indirect delay of node " + std::to_string(i) + " exceeds the window");
        const std::uint64_t node_seed = derive_seed(trial_seed, 100 + i);
        const double gain = gain_for_snr(snr[i], w, tau, c.cfg);
        const NodeDelays nd = estimate_node(s, c, w, d, make_channel(gain, tau_direct, tau, s.noise_power, node_seed), node_seed);
        t.ranges_onebit[i] = kSpeedOfLight * nd.onebit;
        t.ranges_full[i] = kSpeedOfLight * nd.full;
        t.onebit_ok[i] = nd.onebit_ok;
        t.full_ok[i] = nd.full_ok;
    }
    t.delay_ms = elapsed_ms(t0);

    const bool all_one = std::all_of(t.onebit_ok.begin(), t.onebit_ok.end(), [](int v) { return v != 0; });
    const bool all_full = std::all_of(t.full_ok.begin(), t.full_ok.end(), [](int v) { return v != 0; });
    const RangeThresholds th = draw_range_thresholds(m, s.r_max, derive_seed(trial_seed, 5));
    t.uplink = quantize_ranges(t.ranges_onebit, th, s.r_max);

    for (Estimator e : s.estimators) {
        EstimatorOutcome o;
        o.estimator = e;
        const auto t1 = Clock::now();
        try {
            if (e == Estimator::full) {
                if (!all_full)
                    throw NoDetectionError("full-precision delay estimation failed at a node");
                o.target = localize_full_precision(g, t.ranges_full).target;
            } else {
                if (!all_one)
                    throw NoDetectionError("one-bit delay estimation failed at a node");
                if (e == Estimator::antares) {
                    AntaresConfig cfg;
                    cfg.exec = Exec::serial;
                    const auto r = antares(t.uplink, g, cfg);
                    o.target = r.target;
                    if (!r.diag.converged)
                        o.message = "iteration limit reached";
                } else {
                    if (moment_count(m, s.order) > s.lasserre_max_moments)
                        throw RelaxationError("relaxation with " + std::to_string(moment_count(m, s.order)) +
                                              " moments exceeds the harness limit of " +
                                              std::to_string(s.lasserre_max_moments));
                    LasserreOptions opt;
                    opt.order = s.order;
                    opt.v_max = s.v_max;
                    opt.solver.exec = Exec::serial;
                    const auto r = localize_optimal(t.uplink, g, opt);
                    if (!r.have_target)
                        throw Error("no target from relaxation: " + r.message);
                    o.target = r.target;
                    o.message = r.message;
                }
            }
            o.ok = true;
            o.error_m = (o.target - t.scene.target).head(2).norm();
        } catch (const Error &ex) {
            o.ok = false;
            o.message = ex.what();
        }
        o.wall_ms = elapsed_ms(t1);
        t.outcomes.push_back(o);
    }
    return t;
}

std::vector<TrialResult> run_localization_trials(const ScenarioSpec &s)
{
    s.validate();
    std::vector<TrialResult> out(s.trials);
    for_trials(s.trials, s.exec, [&](int j) { out[j] = run_trial(s, derive_seed(s.seed, j)); });
    return out;
}

double location_nrmse(const std::vector<TrialResult> &trials, Estimator e, int *failures)
{
    double acc = 0.0;
    int ok = 0, bad = 0;
    for (const auto &t : trials) {
        const auto *o = t.outcome(e);
        if (!o || !o->ok) {
            ++bad;
            continue;
        }
        acc += o->error_m * o->error_m / t.scene.target.head(2).squaredNorm();
        ++ok;
    }
    if (failures)
        *failures = bad;
    if (ok == 0)
        return nan();
    return std::sqrt(acc) / ok;
}

CrbSummary crb_for_trials(const std::vector<TrialResult> &trials, const ScenarioSpec &s)
{
    CrbSummary out;
    const int m = s.nodes;
    RVector acc = RVector::Zero(m);
    Eigen::VectorXi count = Eigen::VectorXi::Zero(m);
    for (const auto &t : trials)
        for (int i = 0; i < m; ++i)
            if (t.full_ok[i]) {
                const double e = t.ranges_full[i] - t.ranges_true[i];
                acc[i] += e * e;
                ++count[i];
            }
    out.upsilon.resize(m);
    for (int i = 0; i < m; ++i)
        out.upsilon[i] = count[i] > 0 ? std::sqrt(acc[i] / count[i]) : nan();
    // A node whose full-precision estimate never missed still has finite grid error.
    const double floor = 0.5 * kSpeedOfLight * make_context(s).cfg.duration() / s.grid_size();
    out.upsilon = out.upsilon.cwiseMax(floor / std::sqrt(3.0));

    double sum = 0.0;
    int ok = 0;
    for (const auto &t : trials) {
        try {
            CrbParams q;
            q.target = t.scene.target;
            q.d0 = (t.scene.g.base - t.scene.target).norm();
            q.upsilon = out.upsilon;
            sum += normalized_root_crb(fim(q, t.scene.g, t.uplink.lambda), q, t.scene.g);
            ++ok;
        } catch (const Error &) {
            ++out.failures;
        }
    }
    out.value = ok > 0 ? sum / ok : nan();
    return out;
}

std::vector<MetricsRow> localization_rows(const std::vector<TrialResult> &trials, const ScenarioSpec &s)
{
    std::vector<MetricsRow> rows;
    int f_full = 0;
    const double n_full = s.uses(Estimator::full) ? location_nrmse(trials, Estimator::full, &f_full) : nan();
    const CrbSummary crb = crb_for_trials(trials, s);
    for (Estimator e : s.estimators) {
        int f = 0;
        const double n = location_nrmse(trials, e, &f);
        double ms = 0.0;
        for (const auto &t : trials)
            if (const auto *o = t.outcome(e))
                ms += o->wall_ms;
        rows.push_back({"nodes", static_cast<double>(s.nodes), to_string(e), n, (n - n_full) / n_full,
                        crb.value, f, s.trials, ms / s.trials, s.seed});
    }
    rows.push_back({"nodes", static_cast<double>(s.nodes), "crb", crb.value, (crb.value - n_full) / n_full,
                    crb.value, crb.failures, s.trials, 0.0, s.seed});
    return rows;
}

std::vector<MetricsRow> run_localization_experiment(const ScenarioSpec &base, const std::vector<int> &node_counts)
{
    std::vector<MetricsRow> rows;
    for (int m : node_counts) {
        ScenarioSpec s = base;
        s.nodes = m;
        const auto r = localization_rows(run_localization_trials(s), s);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return rows;
}

SingleScenario run_single_scenario(const ScenarioSpec &s)
{
    SingleScenario out;
    out.trial = run_trial(s, derive_seed(s.seed, 0));
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "geometry " << to_string(s.geometry) << ", M = " << s.nodes << ", SNR_1 = " << s.snr1_db
       << " dB, target (" << out.trial.scene.target.x() << ", " << out.trial.scene.target.y() << ")\n";
    int miss_one = 0, miss_full = 0;
    for (int i = 0; i < s.nodes; ++i) {
        miss_one += out.trial.onebit_ok[i] == 0;
        miss_full += out.trial.full_ok[i] == 0;
    }
    os << "delay estimation " << out.trial.delay_ms << " ms, no-detection nodes: one-bit " << miss_one
       << ", full " << miss_full << "\n";
    for (const auto &o : out.trial.outcomes) {
        os << "  " << std::setw(8) << to_string(o.estimator) << "  ";
        if (o.ok)
            os << "estimate (" << o.target.x() << ", " << o.target.y() << ")  error " << o.error_m << " m";
        else
            os << "failed";
        os << "  " << o.wall_ms << " ms";
        if (!o.message.empty())
            os << "  [" << o.message << "]";
        os << "\n";
    }
    out.summary = os.str();
    return out;
}

} // namespace onebit::harness
