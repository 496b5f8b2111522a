// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace slipt {

using Vec3 = std::array<double, 3>;

/// Solar-panel harvester constants of the nonlinear current-voltage model.
/// None of them is standardized; the defaults keep the model well-posed and
/// strictly increasing in bias over the operating range. All overridable.
struct EhConsts {
    double pi_factor = 1.0;       ///< conversion factor on the AC (signal) term
    double gamma_factor = 1e-3;   ///< thermal-voltage-like scale of the DC terms
    double mu = 7.38905609893065; ///< diode ideality product, e^2; must be > 1
    double kappa = 1.0;           ///< optical-to-current responsivity of the panel
    double a = 1.0;               ///< bias coupling gain
    double z = 0.0;               ///< bias coupling offset
    double e_a = 0.0;             ///< ambient contribution
};

/// Transmit-side LED parameters shared by all luminaires.
struct LedParams {
    double semi_angle_deg = 60.0;   ///< emission semi-angle, degrees
    double peak_amplitude = 2.0;    ///< per-stream drive amplitude A
    double signal_variance = 1.0;   ///< per-stream signal variance eps_sig
    double dist_alpha = 0.0;        ///< input-distribution entropy parameter alpha
    double dist_gamma = 0.0;        ///< input-distribution entropy parameter gamma
    double current_low = 10.0;      ///< minimum drive current I_L
    double current_high = 15.0;     ///< maximum drive current I_H
    double max_optical_power = 125.0; ///< per-luminaire optical power cap P_o
    double dimming_level = 0.8;     ///< average-to-peak optical ratio, in (0,1]
    std::optional<double> dc_bias_override; ///< fixed bias; default derives from dimming
};

/// Receive-side photodetector / solar-panel parameters.
struct PanelParams {
    double fov_deg = 60.0;          ///< field of view, degrees
    double refractive_index = 1.5;  ///< concentrator refractive index
    double detector_area = 1e-3;    ///< physical detector area, m^2
    double resp_l = 0.54;           ///< light-to-current responsivity, A/W
    double resp_c = 1.0;            ///< light-to-current conversion gain (scale factor)
    EhConsts eh;
};

/// Full simulation scenario. Immutable after construction; safe to share
/// read-only across concurrent sweep workers.
struct Scenario {
    Vec3 room_dims{3.0, 3.0, 5.0};
    std::vector<Vec3> led_positions;
    std::vector<Vec3> user_positions;
    LedParams led;
    PanelParams panel;
    double noise_power = 0.0;           ///< receiver noise variance sigma^2, watts
    double transmit_power_budget = 0.0; ///< electrical budget P_t, watts
    double energy_threshold = 0.0;      ///< per-user harvest requirement E_th, watts

    int n_leds() const { return static_cast<int>(led_positions.size()); }
    int n_users() const { return static_cast<int>(user_positions.size()); }
};

/// Height of the receiving plane, meters.
inline constexpr double kUserPlaneZ = 1.7;

double dbm_to_watts(double dbm);

/// Reference setup: 3x3x5 m room, 8 ceiling LEDs at z = 4.5 m, 3 users at
/// z = 1.7 m, 60 degree optics, sigma^2 = -98.82 dBm, dimming 0.8,
/// [I_L, I_H] = [10, 15], P_o = 125 W. The power budget corresponds to a
/// 15 dB transmit SNR P_t / sigma^2.
Scenario default_scenario();

/// Throws ValidationError naming the offending field.
void validate_scenario(const Scenario& s);

/// Load a JSON config; every absent field falls back to default_scenario().
/// See README for the schema. Throws ParseError / ValidationError.
Scenario load_scenario(const std::string& path);

/// Parse from an in-memory JSON document (same schema as load_scenario).
Scenario scenario_from_json_text(const std::string& text);

/// Serialize to the same schema load_scenario reads; round-trips exactly.
std::string scenario_to_json_text(const Scenario& s);

/// Replace the user set with `count` positions drawn uniformly over the room
/// footprint at z = 1.7 m. Pure function of (scenario, count, seed).
Scenario sample_users(const Scenario& s, int count, std::uint64_t seed);

bool operator==(const EhConsts&, const EhConsts&);
bool operator==(const LedParams&, const LedParams&);
bool operator==(const PanelParams&, const PanelParams&);
bool operator==(const Scenario&, const Scenario&);

} // namespace slipt
