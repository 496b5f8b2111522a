// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slipt/channel.hpp"
#include "slipt/conic.hpp"
#include "slipt/scenario.hpp"
#include "slipt/schemes.hpp"

#include <Eigen/Dense>

#include <vector>

namespace slipt {

/// Iterate of the concave-convex outer loop, which doubles as the expansion
/// point of the convexified subproblem. Covariances follow the scheme's
/// stream order: index 0 is the common stream under RSMA, otherwise entries
/// map one-to-one onto users. common_shares and v_common stay empty for the
/// schemes without a common stream, and under NOMA v_private holds one slack
/// per decoding position rather than per user.
struct LinearizationPoint {
    std::vector<Eigen::MatrixXd> covariances;
    std::vector<Eigen::VectorXd> directions; ///< unit-norm rank-one directions
    double theta = 1.0;
    double t = 0.0;
    Eigen::VectorXd common_shares;
    Eigen::VectorXd v_common;
    Eigen::VectorXd v_private;

    int n_streams() const { return static_cast<int>(covariances.size()); }
};

/// Affine functional constant + sum_i <coeffs[i], P_i> over a covariance
/// set; an absent (0x0) coefficient block contributes nothing.
struct MatrixAffine {
    double constant = 0.0;
    std::vector<Eigen::MatrixXd> coeffs;

    double eval(const std::vector<Eigen::MatrixXd>& P) const;
};

/// Affine functional constant + theta_coeff * theta + v_coeff * v.
struct SplitAffine {
    double constant = 0.0;
    double theta_coeff = 0.0;
    double v_coeff = 0.0;

    double eval(double theta, double v) const {
        return constant + theta_coeff * theta + v_coeff * v;
    }
};

enum class RateKind { common, private_stream };

/// Tangent at the expansion point of the interference log term
/// log2(2 pi sigma^2 + 2 pi sum_j eps_j tr(H_k P_j)), the sum running over
/// all private streams for the common variant and excluding user k's own
/// stream for the private variant. The log is concave in the covariances,
/// so the tangent over-estimates it everywhere; subtracting it from the
/// signal log therefore under-estimates the rate, which keeps the
/// convexified feasible set inside the true one.
MatrixAffine linearize_interference(const LinearizationPoint& point, const ChannelMatrix& ch,
                                    const Scenario& s, int k, RateKind kind);

/// Tangent at the expansion point of the convex square (theta + v)^2 / 4,
/// an under-estimator everywhere. The common variant expands around
/// (theta, v_common[k]), the private one around (theta, v_private[k]).
SplitAffine linearize_split(const LinearizationPoint& point, int k, RateKind kind);

/// The product a * b written as a difference of squares,
/// (a + b)^2 / 4 - (a - b)^2 / 4; exact up to rounding.
double bilinear_identity(double a, double b);

/// sum_i (tr(P_i) - lambda_max(P_i)): zero exactly when every covariance is
/// rank one, strictly positive otherwise.
double penalty_residual(const std::vector<Eigen::MatrixXd>& covariances);

/// Builds the convex conic subproblem at the given expansion point:
/// exponential-cone rate bounds with the interference log replaced by its
/// tangent, rotated second-order cones splitting the theta * v products,
/// per-LED squared drive bounds, the electrical power budget, box bounds on
/// theta (the harvesting requirement collapses to theta <= theta_cap), and
/// nonnegative common shares; the objective maximizes t plus rho times the
/// rank-one penalty sum_i tr((I - xi_i xi_i^T) P_i). The program's start is
/// assembled from the point itself (covariances ridged to sit strictly
/// inside the semidefinite cone) and is strictly feasible whenever the
/// point's slacks are. Throws ValidationError for rho > 0 or malformed
/// points and InfeasibleError when theta_cap leaves no room above theta_min.
ConicProgram build_subproblem(const LinearizationPoint& point, const Scenario& s,
                              const ChannelMatrix& ch, const SchemeConfig& scheme, double rho,
                              double theta_min = 1e-6);

} // namespace slipt
