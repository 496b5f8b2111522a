// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slipt/channel.hpp"
#include "slipt/signal_model.hpp"

#include <Eigen/Dense>

namespace slipt {

/// Nonlinear solar-panel harvest at user k for the given beams and bias:
/// an AC term proportional to received signal power plus quadratic and
/// log-linear DC terms in the biased channel sum.
double harvested_energy(const BeamformerSet& beams, const Eigen::VectorXd& h_k,
                        const PanelParams& panel, const Eigen::VectorXd& eps_sigs);

/// Time-splitting harvest (1 - theta) * E_k at zero beams and bias I_H.
double ts_harvested(double theta, const Eigen::VectorXd& h_k, const PanelParams& panel,
                    const LedParams& led);

/// Per-user harvest snapshot at a given operating point.
struct HarvestReport {
    Eigen::VectorXd instantaneous; ///< E_k at the given beams/bias
    Eigen::VectorXd ts;            ///< (1-theta) * E_k(0, I_H)
    Eigen::VectorXd theta_cap_k;   ///< per-user max feasible theta, in [0,1]
};

HarvestReport harvest_report(const Scenario& s, const ChannelMatrix& ch,
                             const BeamformerSet& beams, double theta);

/// Exact feasible upper bound on theta under the per-user harvest constraint:
/// min_k (1 - E_th / E_k(0, I_H)), clamped to [0,1]. The TS harvest is affine
/// decreasing in theta, so the constraint is equivalent to theta <= cap.
/// Throws InfeasibleError when some user cannot meet E_th even at theta -> 0.
double theta_cap(const Scenario& s, const ChannelMatrix& ch);
double theta_cap(const Scenario& s);

} // namespace slipt
