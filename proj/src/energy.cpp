// SPDX-License-Identifier: Apache-2.0
#include "slipt/energy.hpp"
#include "slipt/errors.hpp"

#include <cmath>

namespace slipt {

double harvested_energy(const BeamformerSet& beams, const Eigen::VectorXd& h_k,
                        const PanelParams& panel, const Eigen::VectorXd& eps_sigs) {
    const EhConsts& eh = panel.eh;
    double ac = 0.0;
    for (int i = 0; i < beams.n_streams(); ++i) {
        double v = h_k.dot(beams.beams.col(i));
        ac += v * v * eps_sigs(i);
    }
    double biased = (eh.a * beams.dc_bias + eh.z) * h_k.sum();
    double x = eh.kappa / panel.detector_area * biased + eh.e_a;
    return eh.pi_factor * ac + eh.gamma_factor * x * x +
           eh.gamma_factor * (std::log(eh.mu) - 1.0) * x;
}

double ts_harvested(double theta, const Eigen::VectorXd& h_k, const PanelParams& panel,
                    const LedParams& led) {
    if (!(theta > 0.0 && theta <= 1.0))
        throw ValidationError("ts_harvested: theta must be in (0, 1]");
    BeamformerSet off = BeamformerSet::zeros(static_cast<int>(h_k.size()), 0,
                                             led.current_high);
    Eigen::VectorXd eps = Eigen::VectorXd::Constant(1, led.signal_variance);
    return (1.0 - theta) * harvested_energy(off, h_k, panel, eps);
}

namespace {

// Harvest with beams off and bias at I_H: the energy available per unit of
// harvesting time under time splitting.
double harvest_limit(const Eigen::VectorXd& h_k, const PanelParams& panel,
                     const LedParams& led) {
    BeamformerSet off = BeamformerSet::zeros(static_cast<int>(h_k.size()), 0,
                                             led.current_high);
    Eigen::VectorXd eps = Eigen::VectorXd::Constant(1, led.signal_variance);
    return harvested_energy(off, h_k, panel, eps);
}

} // namespace

HarvestReport harvest_report(const Scenario& s, const ChannelMatrix& ch,
                             const BeamformerSet& beams, double theta) {
    const int k_users = ch.n_users();
    Eigen::VectorXd eps = stream_eps(s.led, beams.n_streams());
    HarvestReport rep;
    rep.instantaneous.resize(k_users);
    rep.ts.resize(k_users);
    rep.theta_cap_k.resize(k_users);
    for (int k = 0; k < k_users; ++k) {
        Eigen::VectorXd h = ch.user_row(k);
        rep.instantaneous(k) = harvested_energy(beams, h, s.panel, eps);
        double limit = harvest_limit(h, s.panel, s.led);
        rep.ts(k) = (1.0 - theta) * limit;
        double cap = 1.0;
        if (s.energy_threshold > 0.0)
            cap = limit > 0.0 ? 1.0 - s.energy_threshold / limit : -1.0;
        rep.theta_cap_k(k) = std::clamp(cap, 0.0, 1.0);
    }
    return rep;
}

double theta_cap(const Scenario& s, const ChannelMatrix& ch) {
    if (s.energy_threshold == 0.0) return 1.0;
    double cap = 1.0;
    for (int k = 0; k < ch.n_users(); ++k) {
        double limit = harvest_limit(ch.user_row(k), s.panel, s.led);
        if (limit < s.energy_threshold)
            throw InfeasibleError("theta_cap: user " + std::to_string(k) +
                                  " cannot harvest the threshold even as theta -> 0");
        cap = std::min(cap, 1.0 - s.energy_threshold / limit);
    }
    return std::clamp(cap, 0.0, 1.0);
}

double theta_cap(const Scenario& s) { return theta_cap(s, channel_matrix(s)); }

} // namespace slipt
