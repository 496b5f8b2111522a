// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slipt/scenario.hpp"

#include <Eigen/Dense>

#include <vector>

namespace slipt {

/// One common beam (column 0) plus K private beams (columns 1..K) and the DC bias.
struct BeamformerSet {
    Eigen::MatrixXd beams; ///< N x (K+1)
    double dc_bias = 0.0;

    int n_leds() const { return static_cast<int>(beams.rows()); }
    int n_streams() const { return static_cast<int>(beams.cols()); }
    int n_users() const { return n_streams() - 1; }
    Eigen::VectorXd common() const { return beams.col(0); }
    Eigen::VectorXd private_beam(int k) const { return beams.col(k); } ///< k in 1..K

    static BeamformerSet zeros(int n_leds, int n_users, double bias);
};

/// Rate-bound constant tau = e^{1 + 2(alpha + gamma * eps_sig)}.
double tau(double alpha, double gamma, double eps_sig);

/// Per-stream tau vector for the K+1 streams of a scenario (all equal by default).
Eigen::VectorXd stream_taus(const LedParams& led, int n_streams);

/// Per-stream signal variances (all equal by default).
Eigen::VectorXd stream_eps(const LedParams& led, int n_streams);

/// DC bias: the configured override if present, else dimming_level * P_o / N.
double dc_bias(const LedParams& led, int n_leds);

/// min{b - I_L, I_H - b} with b the dimming-derived bias.
/// Throws InfeasibleError when negative.
double optical_headroom(const LedParams& led, int n_leds);

struct ConstraintSlack {
    double slack = 0.0;
    bool satisfied = false;
};

/// Slack report for the per-LED amplitude bound, the per-LED signed optical
/// bound, and the electrical power budget. satisfied <=> slack >= -tolerance.
struct ConstraintReport {
    std::vector<ConstraintSlack> amplitude; ///< per LED: b - sum_i A_i |p_{i,n}|
    std::vector<ConstraintSlack> optical;   ///< per LED: headroom - sum_i A_i p_i^T e_n
    ConstraintSlack power;                  ///< P_t - sum_i ||p_i||^2 eps_i
    double tolerance = 0.0;

    bool all_satisfied() const;
};

/// Evaluates the transmit-side constraints; reports slacks, never throws, so
/// the solver can use it as a post-hoc validator.
ConstraintReport check_feasible(const BeamformerSet& beams, const Scenario& s,
                                double tolerance = 1e-9);

} // namespace slipt
