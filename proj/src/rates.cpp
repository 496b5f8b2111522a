// SPDX-License-Identifier: Apache-2.0
#include "slipt/rates.hpp"
#include "slipt/errors.hpp"

#include <cmath>
#include <numbers>

namespace slipt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double received_power(const Eigen::VectorXd& h_k, const BeamformerSet& beams, int i) {
    double v = h_k.dot(beams.beams.col(i));
    return v * v;
}

} // namespace

double common_rate_lb(const Eigen::VectorXd& h_k, const BeamformerSet& beams,
                      const Eigen::VectorXd& taus, const Eigen::VectorXd& eps_sigs,
                      double sigma2) {
    const int n_streams = beams.n_streams();
    double num = kTwoPi * sigma2;
    double den = kTwoPi * sigma2;
    for (int i = 0; i < n_streams; ++i) num += received_power(h_k, beams, i) * taus(i);
    for (int j = 1; j < n_streams; ++j)
        den += kTwoPi * received_power(h_k, beams, j) * eps_sigs(j);
    return 0.5 * std::log2(num / den);
}

double private_rate_lb(const Eigen::VectorXd& h_k, const BeamformerSet& beams,
                       const Eigen::VectorXd& taus, const Eigen::VectorXd& eps_sigs,
                       double sigma2, int k) {
    const int n_streams = beams.n_streams();
    if (k < 1 || k >= n_streams)
        throw ValidationError("private_rate_lb: stream index out of range");
    double num = kTwoPi * sigma2;
    double den = kTwoPi * sigma2;
    for (int i = 1; i < n_streams; ++i) num += received_power(h_k, beams, i) * taus(i);
    for (int j = 1; j < n_streams; ++j) {
        if (j == k) continue;
        den += kTwoPi * received_power(h_k, beams, j) * eps_sigs(j);
    }
    return 0.5 * std::log2(num / den);
}

double ts_scale(double rate, double theta) {
    if (!(theta > 0.0 && theta <= 1.0))
        throw ValidationError("ts_scale: theta must be in (0, 1]");
    return theta * rate;
}

void validate_allocation(const RateAllocation& alloc, double tolerance) {
    if (!(alloc.theta > 0.0 && alloc.theta <= 1.0))
        throw ValidationError("allocation.theta: must be in (0, 1]");
    const auto k_users = alloc.common_shares.size();
    if (alloc.private_ts.size() != k_users || alloc.common_ts.size() != k_users)
        throw ValidationError("allocation: mismatched per-user vector lengths");
    for (Eigen::Index k = 0; k < k_users; ++k) {
        if (alloc.common_shares(k) < -tolerance)
            throw ValidationError("allocation.common_shares: negative share");
        if (alloc.private_ts(k) < 0.0 || alloc.common_ts(k) < 0.0)
            throw ValidationError("allocation: rates must be clamped at 0");
    }
    if (k_users > 0 &&
        alloc.common_shares.sum() > alloc.common_ts.minCoeff() + tolerance)
        throw ValidationError(
            "allocation.common_shares: sum exceeds the worst-user common rate");
}

double mmf_rate(const RateAllocation& alloc) {
    return (alloc.common_shares + alloc.private_ts).minCoeff();
}

} // namespace slipt
