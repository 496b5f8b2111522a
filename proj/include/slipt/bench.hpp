// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slipt/scenario.hpp"
#include "slipt/schemes.hpp"
#include "slipt/solver.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace slipt {

/// Sweep axis: the per-user energy threshold, the transmit SNR in dB (the
/// power budget becomes 10^(snr/10) * sigma^2), or the per-luminaire optical
/// power cap in watts.
enum class SweepAxis { energy_threshold, transmit_snr, optical_power };

std::string to_string(SweepAxis axis);

/// Parses "eth" | "snr" | "po" (aliases "e_th", "p_o"), case-insensitive.
/// Throws ParseError.
SweepAxis parse_axis(const std::string& text);

/// Default scenario re-pinned to a regime where all three schemes solve in a
/// few outer iterations and the harvesting constraint actually bites: raised
/// conversion gain, unit-scale noise, a 15 dB power budget, and an energy
/// threshold at half of the weakest user's full-window harvest (so the time
/// split caps at 0.5).
Scenario reference_sweep_scenario();

/// Weakest user's full-window harvest min_k E_k(0, I_H): the supremum of
/// per-user energy thresholds any time split can meet.
double harvest_ceiling(const Scenario& s);

/// Compact instance for oracle cross-checks: the first n_leds luminaires of
/// the reference layout with the optical cap rescaled to keep the same DC
/// bias, and n_users users sampled over the room footprint.
Scenario small_scenario(int n_leds, int n_users);

/// Returns a copy of the scenario with the axis value applied: the energy
/// threshold in watts, the power budget derived from an SNR in dB, or the
/// per-luminaire optical cap in watts.
Scenario apply_axis(const Scenario& s, SweepAxis axis, double value);

/// Built-in grid for one axis. Energy thresholds run over ten evenly spaced
/// fractions (0 to 0.9) of the scenario's harvest ceiling; SNR covers -5 to
/// 25 dB in 5 dB steps; optical power covers 75 to 175 W in 12.5 W steps,
/// which deliberately brackets the feasible bias window so the sweep records
/// the infeasible shoulders.
std::vector<double> default_grid(SweepAxis axis, const Scenario& s);

/// One sweep: a base scenario, the axis and grid to vary, and the schemes to
/// solve at every grid point.
struct SweepSpec {
    SweepAxis axis = SweepAxis::energy_threshold;
    std::vector<double> grid; ///< non-empty, ascending
    std::vector<SchemeConfig> schemes{{Scheme::rsma, {}}, {Scheme::sdma, {}}, {Scheme::noma, {}}};
    Scenario base;
    SolverOptions solver;
    int jobs = 0; ///< worker threads; 0 picks a bounded default
};

/// Throws ValidationError on an empty or unsorted grid, an empty scheme
/// list, negative jobs, or an invalid base scenario.
void validate_sweep(const SweepSpec& spec);

/// Result of one (grid point, scheme) solve. status holds the solver outcome
/// name, or "degenerate" when the point only admits the all-off beams (zero
/// rate recorded without solving), or "infeasible" when no operating point
/// exists, or "error" for an unexpected failure; message carries the detail.
struct SweepCell {
    double axis_value = 0.0;
    Scheme scheme = Scheme::rsma;
    std::string status;
    double mmf_rate = 0.0;
    double theta = 0.0;
    int iterations = 0;
    double penalty_residual = 0.0;
    double wall_ms = 0.0;
    Eigen::VectorXd per_user; ///< replayed per-user totals, empty when not solved
    std::string message;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepCell> cells; ///< grid-major: cells[i * |schemes| + j]
};

/// Solves every (grid point, scheme) pair on a bounded worker pool. Cells
/// keep grid-major order regardless of completion order, and per-point
/// failures land in the cell status instead of throwing.
SweepResult run_sweep(const SweepSpec& spec);

/// CSV rendering with the fixed header axis_value,scheme,mmf_rate,theta,
/// iters,penalty_residual,status,wall_ms; one row per cell in stored order.
/// Repeat runs differ only in the wall_ms column.
std::string sweep_to_csv(const SweepResult& result);

/// Writes sweep_to_csv to a file. Throws SolveError on I/O failure.
void emit_csv(const SweepResult& result, const std::string& path);

/// Brute-force lower bound on the max-min-fair optimum for small instances:
/// beam directions pinned to the matched filters (plus the dominant channel
/// direction for the common stream), then an exhaustive grid over per-stream
/// power scales, the time split, and the common-share split, scoring each
/// feasible combination with the exact rate formulas. resolution is the
/// number of points per grid dimension; nesting resolutions (2r-1 refines r)
/// never lowers the result. Intended for n_leds <= 4, n_users <= 2.
double oracle_grid(const Scenario& s, const SchemeConfig& scheme, int resolution);

} // namespace slipt
