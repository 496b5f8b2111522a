// SPDX-License-Identifier: Apache-2.0
#include "slipt/signal_model.hpp"
#include "slipt/errors.hpp"

#include <cmath>

namespace slipt {

BeamformerSet BeamformerSet::zeros(int n_leds, int n_users, double bias) {
    BeamformerSet b;
    b.beams = Eigen::MatrixXd::Zero(n_leds, n_users + 1);
    b.dc_bias = bias;
    return b;
}

double tau(double alpha, double gamma, double eps_sig) {
    return std::exp(1.0 + 2.0 * (alpha + gamma * eps_sig));
}

Eigen::VectorXd stream_taus(const LedParams& led, int n_streams) {
    return Eigen::VectorXd::Constant(
        n_streams, tau(led.dist_alpha, led.dist_gamma, led.signal_variance));
}

Eigen::VectorXd stream_eps(const LedParams& led, int n_streams) {
    return Eigen::VectorXd::Constant(n_streams, led.signal_variance);
}

double dc_bias(const LedParams& led, int n_leds) {
    if (led.dc_bias_override) return *led.dc_bias_override;
    return led.dimming_level * led.max_optical_power / static_cast<double>(n_leds);
}

double optical_headroom(const LedParams& led, int n_leds) {
    double b = dc_bias(led, n_leds);
    double headroom = std::min(b - led.current_low, led.current_high - b);
    if (headroom < 0.0)
        throw InfeasibleError("optical_headroom: bias " + std::to_string(b) +
                              " lies outside [I_L, I_H]");
    return headroom;
}

bool ConstraintReport::all_satisfied() const {
    for (const auto& c : amplitude)
        if (!c.satisfied) return false;
    for (const auto& c : optical)
        if (!c.satisfied) return false;
    return power.satisfied;
}

ConstraintReport check_feasible(const BeamformerSet& beams, const Scenario& s,
                                double tolerance) {
    const int n = beams.n_leds();
    const int n_streams = beams.n_streams();
    const double amp = s.led.peak_amplitude;
    const double b = beams.dc_bias;
    const double headroom =
        std::min(b - s.led.current_low, s.led.current_high - b);

    ConstraintReport rep;
    rep.tolerance = tolerance;
    rep.amplitude.resize(n);
    rep.optical.resize(n);
    for (int row = 0; row < n; ++row) {
        double abs_sum = 0.0;
        double signed_sum = 0.0;
        for (int i = 0; i < n_streams; ++i) {
            abs_sum += amp * std::abs(beams.beams(row, i));
            signed_sum += amp * beams.beams(row, i);
        }
        rep.amplitude[row].slack = b - abs_sum;
        rep.optical[row].slack = headroom - signed_sum;
    }
    double used = 0.0;
    for (int i = 0; i < n_streams; ++i)
        used += beams.beams.col(i).squaredNorm() * s.led.signal_variance;
    rep.power.slack = s.transmit_power_budget - used;

    for (auto& c : rep.amplitude) c.satisfied = c.slack >= -tolerance;
    for (auto& c : rep.optical) c.satisfied = c.slack >= -tolerance;
    rep.power.satisfied = rep.power.slack >= -tolerance;
    return rep;
}

} // namespace slipt
