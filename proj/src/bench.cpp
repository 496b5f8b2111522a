// SPDX-License-Identifier: Apache-2.0
#include "slipt/bench.hpp"

#include "slipt/channel.hpp"
#include "slipt/energy.hpp"
#include "slipt/errors.hpp"
#include "slipt/rates.hpp"
#include "slipt/signal_model.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>
#include <vector>

namespace slipt {

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    if (count == 1 || hi <= lo) {
        out.push_back(lo);
        return out;
    }
    for (int i = 0; i < count; ++i)
        out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    out.back() = hi;
    return out;
}

} // namespace

std::string to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::energy_threshold: return "E_th";
    case SweepAxis::transmit_snr: return "SNR";
    case SweepAxis::optical_power: return "P_o";
    }
    return "?";
}

SweepAxis parse_axis(const std::string& text) {
    std::string low;
    for (char c : text)
        if (c != '_') low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (low == "eth") return SweepAxis::energy_threshold;
    if (low == "snr") return SweepAxis::transmit_snr;
    if (low == "po") return SweepAxis::optical_power;
    throw ParseError("parse_axis: unknown axis \"" + text + "\" (want eth | snr | po)");
}

double harvest_ceiling(const Scenario& s) {
    validate_scenario(s);
    const ChannelMatrix ch = channel_matrix(s);
    double floor_harvest = std::numeric_limits<double>::infinity();
    // The TS harvest is (1 - theta) * E_k(0), so the half-window value doubled
    // recovers the full-window harvest exactly.
    for (int k = 0; k < ch.n_users(); ++k)
        floor_harvest =
            std::min(floor_harvest, 2.0 * ts_harvested(0.5, ch.user_row(k), s.panel, s.led));
    return floor_harvest;
}

Scenario reference_sweep_scenario() {
    Scenario s = default_scenario();
    s.panel.resp_c = 1.5e4;
    s.noise_power = 0.4;
    s.transmit_power_budget = std::pow(10.0, 1.5) * s.noise_power;
    s.energy_threshold = 0.5 * harvest_ceiling(s);
    return s;
}

Scenario small_scenario(int n_leds, int n_users) {
    Scenario s = reference_sweep_scenario();
    if (n_leds < 1 || n_leds > s.n_leds())
        throw ValidationError("small_scenario: n_leds must be in 1.." + std::to_string(s.n_leds()));
    if (n_users < 1) throw ValidationError("small_scenario: n_users must be >= 1");
    // Shrinking the luminaire count raises the per-LED bias share, so rescale
    // the optical cap to keep the bias (and with it the drive headroom) at
    // the reference value.
    const double bias = dc_bias(s.led, s.n_leds());
    s.led_positions.resize(static_cast<std::size_t>(n_leds));
    s.led.max_optical_power = bias * n_leds / s.led.dimming_level;
    Scenario out = sample_users(s, n_users, 1);
    out.energy_threshold = 0.5 * harvest_ceiling(out);
    return out;
}

Scenario apply_axis(const Scenario& s, SweepAxis axis, double value) {
    Scenario out = s;
    switch (axis) {
    case SweepAxis::energy_threshold: out.energy_threshold = value; break;
    case SweepAxis::transmit_snr:
        out.transmit_power_budget = std::pow(10.0, value / 10.0) * s.noise_power;
        break;
    case SweepAxis::optical_power: out.led.max_optical_power = value; break;
    }
    return out;
}

std::vector<double> default_grid(SweepAxis axis, const Scenario& s) {
    std::vector<double> grid;
    switch (axis) {
    case SweepAxis::energy_threshold: {
        const double ceiling = harvest_ceiling(s);
        for (int i = 0; i < 10; ++i) grid.push_back(0.1 * i * ceiling);
        break;
    }
    case SweepAxis::transmit_snr:
        for (int db = -5; db <= 25; db += 5) grid.push_back(static_cast<double>(db));
        break;
    case SweepAxis::optical_power:
        for (int i = 0; i <= 8; ++i) grid.push_back(75.0 + 12.5 * i);
        break;
    }
    return grid;
}

void validate_sweep(const SweepSpec& spec) {
    if (spec.grid.empty()) throw ValidationError("sweep: grid must be non-empty");
    for (std::size_t i = 1; i < spec.grid.size(); ++i)
        if (spec.grid[i] < spec.grid[i - 1])
            throw ValidationError("sweep: grid must be sorted ascending");
    if (spec.schemes.empty()) throw ValidationError("sweep: schemes must be non-empty");
    if (spec.jobs < 0) throw ValidationError("sweep: jobs must be >= 0");
    validate_scenario(spec.base);
}

namespace {

/// True when the scenario still admits the all-off operating point (bias
/// inside the drive range, some feasible time split), so a zero rate is the
/// honest record rather than "infeasible".
bool admits_all_off(const Scenario& s) {
    try {
        const double bias = dc_bias(s.led, s.n_leds());
        if (bias < s.led.current_low || bias > s.led.current_high) return false;
        return theta_cap(s) > 0.0;
    } catch (const std::exception&) {
        return false;
    }
}

SweepCell solve_cell(const Scenario& base, SweepAxis axis, double value,
                     const SchemeConfig& scheme, const SolverOptions& opts) {
    SweepCell cell;
    cell.axis_value = value;
    cell.scheme = scheme.kind;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Scenario s = apply_axis(base, axis, value);
        validate_scenario(s);
        const Solution sol = solve_mmf(s, scheme, opts);
        cell.status = to_string(sol.outcome);
        cell.mmf_rate = sol.mmf_value;
        cell.theta = sol.allocation.theta;
        if (sol.outcome == SolveOutcome::rank_failure ||
            sol.outcome == SolveOutcome::backend_failure)
            cell.theta = sol.trace.empty() ? 0.0 : sol.trace.back().theta;
        cell.iterations = static_cast<int>(sol.trace.size());
        cell.penalty_residual = sol.penalty_residual;
        cell.per_user = sol.allocation.totals();
        cell.message = sol.message;
    } catch (const InfeasibleError& err) {
        cell.message = err.what();
        cell.status = "infeasible";
        const Scenario s = apply_axis(base, axis, value);
        if (admits_all_off(s)) {
            cell.status = "degenerate";
            cell.theta = std::min(1.0, theta_cap(s));
            cell.per_user = Eigen::VectorXd::Zero(s.n_users());
        }
    } catch (const std::exception& err) {
        cell.status = "error";
        cell.message = err.what();
    }
    cell.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return cell;
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    validate_sweep(spec);
    SweepResult result;
    result.spec = spec;
    const int n_schemes = static_cast<int>(spec.schemes.size());
    const int total = static_cast<int>(spec.grid.size()) * n_schemes;
    result.cells.resize(static_cast<std::size_t>(total));

    int jobs = spec.jobs;
    if (jobs == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        jobs = static_cast<int>(std::min(hw == 0 ? 1u : hw, 8u));
    }
    jobs = std::clamp(jobs, 1, total);

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
            const int pt = i / n_schemes;
            const int sj = i % n_schemes;
            result.cells[static_cast<std::size_t>(i)] =
                solve_cell(spec.base, spec.axis, spec.grid[static_cast<std::size_t>(pt)],
                           spec.schemes[static_cast<std::size_t>(sj)], spec.solver);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return result;
}

std::string sweep_to_csv(const SweepResult& result) {
    std::string out = "axis_value,scheme,mmf_rate,theta,iters,penalty_residual,status,wall_ms\n";
    char buf[192];
    for (const SweepCell& c : result.cells) {
        std::snprintf(buf, sizeof buf, "%.12g,%s,%.12g,%.12g,%d,%.12g,%s,%.3f\n", c.axis_value,
                      to_string(c.scheme).c_str(), c.mmf_rate, c.theta, c.iterations,
                      c.penalty_residual, c.status.c_str(), c.wall_ms);
        out += buf;
    }
    return out;
}

void emit_csv(const SweepResult& result, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw SolveError("emit_csv: cannot open " + path);
    file << sweep_to_csv(result);
    file.flush();
    if (!file) throw SolveError("emit_csv: write failed on " + path);
}

namespace {

/// Matched-filter private directions plus, for the common stream, the
/// principal direction of the summed channel Grams, sign-aligned with the
/// channels. Columns of zero-norm channels stay zero.
Eigen::MatrixXd oracle_directions(const ChannelMatrix& ch, bool with_common) {
    const int n = ch.n_leds();
    const int k = ch.n_users();
    Eigen::MatrixXd dirs = Eigen::MatrixXd::Zero(n, k + 1);
    if (with_common) {
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
        for (const Eigen::MatrixXd& g : ch.grams) sum += g;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sum);
        Eigen::VectorXd dir = eig.eigenvectors().col(n - 1);
        double align = 0.0;
        for (int u = 0; u < k; ++u) align += ch.user_row(u).dot(dir);
        if (align < 0.0) dir = -dir;
        dirs.col(0) = dir;
    }
    for (int u = 0; u < k; ++u) {
        const Eigen::VectorXd h = ch.user_row(u);
        if (h.norm() > 0.0) dirs.col(u + 1) = h.normalized();
    }
    return dirs;
}

/// Largest power a lone stream along unit direction d could carry: the
/// budget, the per-LED amplitude bound, and the per-LED drive bound each cap
/// it; combinations with other streams are filtered later by the exact
/// feasibility check.
double stream_power_cap(const Eigen::VectorXd& d, const Scenario& s, double eps_sig,
                        double bias, double headroom) {
    const double dmax = d.cwiseAbs().maxCoeff();
    if (dmax <= 0.0) return 0.0;
    const double a = s.led.peak_amplitude;
    double cap = s.transmit_power_budget / eps_sig;
    cap = std::min(cap, headroom * headroom / (a * a * dmax * dmax));
    cap = std::min(cap, bias * bias / (a * a * dmax * dmax));
    return cap;
}

/// Exact optimum of the common-share split for 3+ users: raise the weakest
/// totals to a common water level until the pool is spent.
double water_level(std::vector<double> base, double pool) {
    std::sort(base.begin(), base.end());
    double acc = 0.0;
    for (std::size_t j = 0; j < base.size(); ++j) {
        acc += base[j];
        const double level = (pool + acc) / static_cast<double>(j + 1);
        if (j + 1 == base.size() || level <= base[j + 1]) return level;
    }
    return 0.0;
}

} // namespace

double oracle_grid(const Scenario& s, const SchemeConfig& scheme, int resolution) {
    if (resolution < 2) throw ValidationError("oracle_grid: resolution must be >= 2");
    validate_scenario(s);
    const ChannelMatrix ch = channel_matrix(s);
    const int n_users = ch.n_users();
    const bool with_common = scheme.kind == Scheme::rsma;
    const Eigen::VectorXd taus = stream_taus(s.led, n_users + 1);
    const Eigen::VectorXd eps = stream_eps(s.led, n_users + 1);
    const double bias = dc_bias(s.led, s.n_leds());
    const double headroom = optical_headroom(s.led, s.n_leds());
    const double theta_min = 1e-6;
    const double theta_hi = std::min(1.0, theta_cap(s, ch));
    if (theta_hi < theta_min) return 0.0;
    const std::vector<double> theta_grid = linspace(theta_min, theta_hi, resolution);
    const std::vector<double> split_grid = linspace(0.0, 1.0, resolution);

    const Eigen::MatrixXd dirs = oracle_directions(ch, with_common);
    std::vector<int> active;
    if (with_common) active.push_back(0);
    for (int u = 1; u <= n_users; ++u) active.push_back(u);

    // Per-stream power levels; a zero cap collapses the dimension to {0}.
    std::vector<std::vector<double>> levels;
    for (int col : active) {
        const double cap = stream_power_cap(dirs.col(col), s, eps(col), bias, headroom);
        levels.push_back(cap > 0.0 ? linspace(0.0, cap, resolution) : std::vector<double>{0.0});
    }

    const std::vector<int> order =
        scheme.kind == Scheme::noma ? resolve_noma_order(scheme, ch) : std::vector<int>{};

    double best = 0.0;
    std::vector<std::size_t> idx(active.size(), 0);
    for (;;) {
        BeamformerSet beams = BeamformerSet::zeros(ch.n_leds(), n_users, bias);
        for (std::size_t i = 0; i < active.size(); ++i)
            beams.beams.col(active[i]) = std::sqrt(levels[i][idx[i]]) * dirs.col(active[i]);

        if (check_feasible(beams, s, 1e-9).all_satisfied()) {
            // Rates are theta-free, so the search over theta and the common
            // split reduces to scalar arithmetic per power combination.
            double value = 0.0;
            if (scheme.kind == Scheme::noma) {
                double weakest = std::numeric_limits<double>::infinity();
                for (int layer = 0; layer < n_users; ++layer)
                    weakest = std::min(weakest, std::max(0.0, noma_layer_rate_lb(
                                                                   ch, beams, taus, eps,
                                                                   s.noise_power, order, layer)));
                value = theta_hi * weakest;
            } else if (!with_common) {
                double weakest = std::numeric_limits<double>::infinity();
                for (int k = 1; k <= n_users; ++k)
                    weakest = std::min(
                        weakest, std::max(0.0, private_rate_lb(ch.user_row(k - 1), beams, taus,
                                                               eps, s.noise_power, k)));
                value = theta_hi * weakest;
            } else {
                double pool_rate = std::numeric_limits<double>::infinity();
                Eigen::VectorXd priv(n_users);
                for (int k = 1; k <= n_users; ++k) {
                    pool_rate = std::min(pool_rate,
                                         common_rate_lb(ch.user_row(k - 1), beams, taus, eps,
                                                        s.noise_power));
                    priv(k - 1) = std::max(0.0, private_rate_lb(ch.user_row(k - 1), beams, taus,
                                                                eps, s.noise_power, k));
                }
                pool_rate = std::max(0.0, pool_rate);
                for (double theta : theta_grid) {
                    const double pool = theta * pool_rate;
                    if (n_users == 1) {
                        value = std::max(value, pool + theta * priv(0));
                    } else if (n_users == 2) {
                        for (double x : split_grid)
                            value = std::max(value,
                                             std::min(x * pool + theta * priv(0),
                                                      (1.0 - x) * pool + theta * priv(1)));
                    } else {
                        std::vector<double> base(static_cast<std::size_t>(n_users));
                        for (int k = 0; k < n_users; ++k)
                            base[static_cast<std::size_t>(k)] = theta * priv(k);
                        value = std::max(value, water_level(base, pool));
                    }
                }
            }
            best = std::max(best, value);
        }

        std::size_t d = 0;
        while (d < idx.size()) {
            if (++idx[d] < levels[d].size()) break;
            idx[d] = 0;
            ++d;
        }
        if (d == idx.size()) break;
    }
    return best;
}

} // namespace slipt
