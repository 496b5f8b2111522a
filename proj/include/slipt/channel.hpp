// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slipt/scenario.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace slipt {

/// LOS gains h_{k,n} plus per-user Gram matrices H_k = h_k h_k^T.
/// Immutable and shareable across threads.
struct ChannelMatrix {
    Eigen::MatrixXd gains;              ///< K x N, nonnegative
    std::vector<Eigen::MatrixXd> grams; ///< K matrices, N x N, rank <= 1

    int n_users() const { return static_cast<int>(gains.rows()); }
    int n_leds() const { return static_cast<int>(gains.cols()); }
    Eigen::VectorXd user_row(int k) const { return gains.row(k).transpose(); }
};

/// Directivity exponent from the emission semi-angle: -ln 2 / ln(cos(semi_angle)).
/// Throws ValidationError outside (0, 90) degrees.
double lambertian_order(double semi_angle_deg);

/// Concentrator-effective detector area i_r^2 / sin^2(fov) * A_s.
double effective_area(const PanelParams& panel);

/// Single-link Lambertian LOS gain; 0 when the incidence angle exceeds the FOV.
/// Both LED and receiver normals are vertical. Throws ValidationError when the
/// LED and user coincide (d = 0).
double channel_gain(const Vec3& led_pos, const Vec3& user_pos, const LedParams& led,
                    const PanelParams& panel);

/// All (k,n) gains plus Gram matrices; deterministic.
ChannelMatrix channel_matrix(const Scenario& s);

/// Debug dump, one row per user. Throws SolveError on I/O failure.
void write_channel_csv(const ChannelMatrix& ch, const std::string& path);

} // namespace slipt
