// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slipt/signal_model.hpp"

#include <Eigen/Dense>

namespace slipt {

/// Closed-form achievable-rate lower bound of the common stream at user k,
/// bits/s/Hz. May be negative; clamping happens only at allocation level.
double common_rate_lb(const Eigen::VectorXd& h_k, const BeamformerSet& beams,
                      const Eigen::VectorXd& taus, const Eigen::VectorXd& eps_sigs,
                      double sigma2);

/// Private-stream lower bound for user k (1-based stream index): the common
/// stream is excluded from the numerator and user k's own stream from the
/// denominator interference sum.
double private_rate_lb(const Eigen::VectorXd& h_k, const BeamformerSet& beams,
                       const Eigen::VectorXd& taus, const Eigen::VectorXd& eps_sigs,
                       double sigma2, int k);

/// Time-splitting scaling theta * rate; theta must be in (0, 1].
double ts_scale(double rate, double theta);

/// A complete rate operating point. Rates are stored already TS-scaled and
/// clamped at zero; the common-split feasibility invariant is
/// sum_k c_k <= min_k common_ts[k].
struct RateAllocation {
    double theta = 1.0;
    Eigen::VectorXd common_shares; ///< c_k >= 0
    Eigen::VectorXd private_ts;    ///< theta * R_{k,p}, clamped at 0
    Eigen::VectorXd common_ts;     ///< theta * R_{k,c}, clamped at 0

    Eigen::VectorXd totals() const { return common_shares + private_ts; }
};

/// Throws ValidationError when an allocation invariant fails.
void validate_allocation(const RateAllocation& alloc, double tolerance = 1e-9);

/// min_k (c_k + theta * R_{k,p}).
double mmf_rate(const RateAllocation& alloc);

} // namespace slipt
