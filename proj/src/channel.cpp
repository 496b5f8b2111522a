// SPDX-License-Identifier: Apache-2.0
#include "slipt/channel.hpp"
#include "slipt/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace slipt {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

double lambertian_order(double semi_angle_deg) {
    if (!(semi_angle_deg > 0.0 && semi_angle_deg < 90.0))
        throw ValidationError("lambertian_order: semi-angle must be in (0, 90) degrees");
    return -std::numbers::ln2 / std::log(std::cos(semi_angle_deg * kDegToRad));
}

double effective_area(const PanelParams& panel) {
    if (!(panel.fov_deg > 0.0 && panel.fov_deg <= 90.0))
        throw ValidationError("effective_area: fov_deg must be in (0, 90]");
    double s = std::sin(panel.fov_deg * kDegToRad);
    return panel.refractive_index * panel.refractive_index / (s * s) * panel.detector_area;
}

double channel_gain(const Vec3& led_pos, const Vec3& user_pos, const LedParams& led,
                    const PanelParams& panel) {
    double dx = led_pos[0] - user_pos[0];
    double dy = led_pos[1] - user_pos[1];
    double dz = led_pos[2] - user_pos[2];
    double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 == 0.0) throw ValidationError("channel_gain: LED and user coincide (d = 0)");
    double d = std::sqrt(d2);

    // Vertical normals make the radiance and incidence angles coincide.
    double cos_angle = dz / d;
    double cos_fov = std::cos(panel.fov_deg * kDegToRad);
    if (cos_angle < cos_fov) return 0.0;

    double l = lambertian_order(led.semi_angle_deg);
    double a_p = effective_area(panel);
    double lobe = std::pow(cos_angle, l) * cos_angle;
    return (l + 1.0) * panel.resp_l * panel.resp_c * a_p /
           (2.0 * std::numbers::pi * d2) * lobe;
}

ChannelMatrix channel_matrix(const Scenario& s) {
    const int k_users = s.n_users();
    const int n_leds = s.n_leds();
    ChannelMatrix ch;
    ch.gains.resize(k_users, n_leds);
    for (int k = 0; k < k_users; ++k)
        for (int n = 0; n < n_leds; ++n)
            ch.gains(k, n) = channel_gain(s.led_positions[n], s.user_positions[k], s.led,
                                          s.panel);
    ch.grams.reserve(k_users);
    for (int k = 0; k < k_users; ++k) {
        Eigen::VectorXd h = ch.gains.row(k).transpose();
        ch.grams.push_back(h * h.transpose());
    }
    return ch;
}

void write_channel_csv(const ChannelMatrix& ch, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SolveError("cannot open for writing: " + path);
    out << "user";
    for (int n = 0; n < ch.n_leds(); ++n) out << ",led_" << n;
    out << "\n";
    char buf[64];
    for (int k = 0; k < ch.n_users(); ++k) {
        out << k;
        for (int n = 0; n < ch.n_leds(); ++n) {
            std::snprintf(buf, sizeof buf, "%.17g", ch.gains(k, n));
            out << ',' << buf;
        }
        out << "\n";
    }
    if (!out) throw SolveError("write failed: " + path);
}

} // namespace slipt
