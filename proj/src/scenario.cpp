// SPDX-License-Identifier: Apache-2.0
#include "slipt/scenario.hpp"
#include "slipt/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace slipt {

using nlohmann::json;

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

namespace {

constexpr double kDefaultNoiseDbm = -98.82;
constexpr double kDefaultSnrDb = 15.0;

void check(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ValidationError("scenario." + field + ": " + what);
}

bool inside_room(const Vec3& p, const Vec3& room) {
    for (int d = 0; d < 3; ++d)
        if (p[d] < 0.0 || p[d] > room[d]) return false;
    return true;
}

// Uniform double in [0,1) from the top 53 bits; bit-identical on every platform,
// unlike std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) { known = true; break; }
        if (!known) throw ParseError("unknown key \"" + item.key() + "\" in " + where);
    }
}

Vec3 parse_vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3)
        throw ParseError(where + ": expected an array of 3 numbers");
    Vec3 v{};
    for (int d = 0; d < 3; ++d) {
        if (!j[d].is_number()) throw ParseError(where + ": expected numbers");
        v[d] = j[d].get<double>();
    }
    return v;
}

std::vector<Vec3> parse_positions(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected an array of 3-vectors");
    std::vector<Vec3> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_vec3(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

double get_num(const json& j, const char* key, double fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ParseError(where + "." + key + ": expected a number");
    return j[key].get<double>();
}

} // namespace

Scenario default_scenario() {
    Scenario s;
    s.room_dims = {3.0, 3.0, 5.0};
    s.led_positions = {
        {0.5, 2.5, 4.5}, {2.5, 0.5, 4.5}, {0.5, 0.5, 4.5}, {2.5, 2.5, 4.5},
        {0.5, 1.5, 4.5}, {2.5, 1.5, 4.5}, {1.5, 0.5, 4.5}, {1.5, 2.5, 4.5},
    };
    s.user_positions = {
        {1.0, 1.0, kUserPlaneZ}, {2.0, 1.0, kUserPlaneZ}, {1.5, 2.0, kUserPlaneZ},
    };
    s.led = LedParams{};
    s.panel = PanelParams{};
    s.noise_power = dbm_to_watts(kDefaultNoiseDbm);
    s.transmit_power_budget = std::pow(10.0, kDefaultSnrDb / 10.0) * s.noise_power;
    s.energy_threshold = 0.0;
    return s;
}

void validate_scenario(const Scenario& s) {
    check(s.n_leds() >= 1, "led_positions", "at least one LED required");
    check(s.n_users() >= 1, "user_positions", "at least one user required");
    for (int d = 0; d < 3; ++d)
        check(s.room_dims[d] > 0.0, "room_dims", "dimensions must be positive");
    for (int n = 0; n < s.n_leds(); ++n)
        check(inside_room(s.led_positions[n], s.room_dims),
              "led_positions[" + std::to_string(n) + "]", "outside the room");
    double min_led_z = s.led_positions[0][2];
    for (const auto& p : s.led_positions) min_led_z = std::min(min_led_z, p[2]);
    for (int k = 0; k < s.n_users(); ++k) {
        check(inside_room(s.user_positions[k], s.room_dims),
              "user_positions[" + std::to_string(k) + "]", "outside the room");
        check(s.user_positions[k][2] < min_led_z,
              "user_positions[" + std::to_string(k) + "]", "must lie below the LED plane");
    }
    check(s.led.semi_angle_deg > 0.0 && s.led.semi_angle_deg < 90.0,
          "led.semi_angle_deg", "must be in (0, 90)");
    check(s.led.peak_amplitude > 0.0, "led.peak_amplitude", "must be > 0");
    check(s.led.signal_variance > 0.0, "led.signal_variance", "must be > 0");
    check(s.led.current_low < s.led.current_high,
          "led.current_low/current_high", "requires I_L < I_H");
    check(s.led.max_optical_power > 0.0, "led.max_optical_power", "must be > 0");
    check(s.led.dimming_level > 0.0 && s.led.dimming_level <= 1.0,
          "led.dimming_level", "must be in (0, 1]");
    if (s.led.dc_bias_override)
        check(*s.led.dc_bias_override >= 0.0, "led.dc_bias_override", "must be >= 0");
    check(s.panel.fov_deg > 0.0 && s.panel.fov_deg <= 90.0,
          "panel.fov_deg", "must be in (0, 90]");
    check(s.panel.detector_area > 0.0, "panel.detector_area", "must be > 0");
    check(s.panel.resp_l > 0.0, "panel.resp_l", "must be > 0");
    check(s.panel.resp_c > 0.0, "panel.resp_c", "must be > 0");
    check(s.panel.eh.mu > 1.0, "panel.eh.mu", "must be > 1");
    check(s.noise_power > 0.0, "noise_power", "must be > 0");
    check(s.transmit_power_budget > 0.0, "transmit_power_w", "must be > 0");
    check(s.energy_threshold >= 0.0, "energy_threshold_w", "must be >= 0");
}

namespace {

Scenario scenario_from_json(const json& j) {
    Scenario s = default_scenario();
    reject_unknown_keys(j,
                        {"room_dims", "led_positions", "user_positions", "led", "panel",
                         "noise_power_w", "noise_power_dbm", "transmit_power_w",
                         "transmit_snr_db", "energy_threshold_w"},
                        "config root");
    if (j.contains("room_dims")) s.room_dims = parse_vec3(j["room_dims"], "room_dims");
    if (j.contains("led_positions"))
        s.led_positions = parse_positions(j["led_positions"], "led_positions");
    if (j.contains("user_positions"))
        s.user_positions = parse_positions(j["user_positions"], "user_positions");

    if (j.contains("led")) {
        const json& l = j["led"];
        reject_unknown_keys(l,
                            {"semi_angle_deg", "peak_amplitude", "signal_variance",
                             "dist_alpha", "dist_gamma", "current_low", "current_high",
                             "max_optical_power", "dimming_level", "dc_bias_override"},
                            "led");
        s.led.semi_angle_deg = get_num(l, "semi_angle_deg", s.led.semi_angle_deg, "led");
        s.led.peak_amplitude = get_num(l, "peak_amplitude", s.led.peak_amplitude, "led");
        s.led.signal_variance = get_num(l, "signal_variance", s.led.signal_variance, "led");
        s.led.dist_alpha = get_num(l, "dist_alpha", s.led.dist_alpha, "led");
        s.led.dist_gamma = get_num(l, "dist_gamma", s.led.dist_gamma, "led");
        s.led.current_low = get_num(l, "current_low", s.led.current_low, "led");
        s.led.current_high = get_num(l, "current_high", s.led.current_high, "led");
        s.led.max_optical_power =
            get_num(l, "max_optical_power", s.led.max_optical_power, "led");
        s.led.dimming_level = get_num(l, "dimming_level", s.led.dimming_level, "led");
        if (l.contains("dc_bias_override") && !l["dc_bias_override"].is_null())
            s.led.dc_bias_override = get_num(l, "dc_bias_override", 0.0, "led");
    }
    if (j.contains("panel")) {
        const json& p = j["panel"];
        reject_unknown_keys(p,
                            {"fov_deg", "refractive_index", "detector_area_m2", "resp_l",
                             "resp_c", "eh"},
                            "panel");
        s.panel.fov_deg = get_num(p, "fov_deg", s.panel.fov_deg, "panel");
        s.panel.refractive_index =
            get_num(p, "refractive_index", s.panel.refractive_index, "panel");
        s.panel.detector_area = get_num(p, "detector_area_m2", s.panel.detector_area, "panel");
        s.panel.resp_l = get_num(p, "resp_l", s.panel.resp_l, "panel");
        s.panel.resp_c = get_num(p, "resp_c", s.panel.resp_c, "panel");
        if (p.contains("eh")) {
            const json& e = p["eh"];
            reject_unknown_keys(e, {"pi", "gamma", "mu", "kappa", "a", "z", "e_a"},
                                "panel.eh");
            s.panel.eh.pi_factor = get_num(e, "pi", s.panel.eh.pi_factor, "panel.eh");
            s.panel.eh.gamma_factor = get_num(e, "gamma", s.panel.eh.gamma_factor, "panel.eh");
            s.panel.eh.mu = get_num(e, "mu", s.panel.eh.mu, "panel.eh");
            s.panel.eh.kappa = get_num(e, "kappa", s.panel.eh.kappa, "panel.eh");
            s.panel.eh.a = get_num(e, "a", s.panel.eh.a, "panel.eh");
            s.panel.eh.z = get_num(e, "z", s.panel.eh.z, "panel.eh");
            s.panel.eh.e_a = get_num(e, "e_a", s.panel.eh.e_a, "panel.eh");
        }
    }

    if (j.contains("noise_power_w") && j.contains("noise_power_dbm"))
        throw ParseError("give either noise_power_w or noise_power_dbm, not both");
    if (j.contains("noise_power_dbm"))
        s.noise_power = dbm_to_watts(get_num(j, "noise_power_dbm", 0.0, "config root"));
    else
        s.noise_power = get_num(j, "noise_power_w", s.noise_power, "config root");

    if (j.contains("transmit_power_w") && j.contains("transmit_snr_db"))
        throw ParseError("give either transmit_power_w or transmit_snr_db, not both");
    if (j.contains("transmit_snr_db"))
        s.transmit_power_budget =
            std::pow(10.0, get_num(j, "transmit_snr_db", 0.0, "config root") / 10.0) *
            s.noise_power;
    else
        s.transmit_power_budget =
            get_num(j, "transmit_power_w", s.transmit_power_budget, "config root");

    s.energy_threshold = get_num(j, "energy_threshold_w", s.energy_threshold, "config root");

    validate_scenario(s);
    return s;
}

} // namespace

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        j = json::object();
    } else {
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("config parse error: ") + e.what());
        }
    }
    if (!j.is_object()) throw ParseError("config root must be a JSON object");
    return scenario_from_json(j);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json_text(buf.str());
}

std::string scenario_to_json_text(const Scenario& s) {
    json j;
    j["room_dims"] = s.room_dims;
    j["led_positions"] = s.led_positions;
    j["user_positions"] = s.user_positions;
    json l;
    l["semi_angle_deg"] = s.led.semi_angle_deg;
    l["peak_amplitude"] = s.led.peak_amplitude;
    l["signal_variance"] = s.led.signal_variance;
    l["dist_alpha"] = s.led.dist_alpha;
    l["dist_gamma"] = s.led.dist_gamma;
    l["current_low"] = s.led.current_low;
    l["current_high"] = s.led.current_high;
    l["max_optical_power"] = s.led.max_optical_power;
    l["dimming_level"] = s.led.dimming_level;
    if (s.led.dc_bias_override) l["dc_bias_override"] = *s.led.dc_bias_override;
    j["led"] = l;
    json p;
    p["fov_deg"] = s.panel.fov_deg;
    p["refractive_index"] = s.panel.refractive_index;
    p["detector_area_m2"] = s.panel.detector_area;
    p["resp_l"] = s.panel.resp_l;
    p["resp_c"] = s.panel.resp_c;
    p["eh"] = {{"pi", s.panel.eh.pi_factor}, {"gamma", s.panel.eh.gamma_factor},
               {"mu", s.panel.eh.mu},        {"kappa", s.panel.eh.kappa},
               {"a", s.panel.eh.a},          {"z", s.panel.eh.z},
               {"e_a", s.panel.eh.e_a}};
    j["panel"] = p;
    j["noise_power_w"] = s.noise_power;
    j["transmit_power_w"] = s.transmit_power_budget;
    j["energy_threshold_w"] = s.energy_threshold;
    return j.dump(2) + "\n";
}

Scenario sample_users(const Scenario& s, int count, std::uint64_t seed) {
    if (count < 1) throw ValidationError("sample_users: count must be >= 1");
    std::mt19937_64 rng(seed);
    Scenario out = s;
    out.user_positions.clear();
    out.user_positions.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        double x = uniform01(rng) * s.room_dims[0];
        double y = uniform01(rng) * s.room_dims[1];
        out.user_positions.push_back({x, y, kUserPlaneZ});
    }
    return out;
}

bool operator==(const EhConsts& a, const EhConsts& b) {
    return a.pi_factor == b.pi_factor && a.gamma_factor == b.gamma_factor && a.mu == b.mu &&
           a.kappa == b.kappa && a.a == b.a && a.z == b.z && a.e_a == b.e_a;
}

bool operator==(const LedParams& a, const LedParams& b) {
    return a.semi_angle_deg == b.semi_angle_deg && a.peak_amplitude == b.peak_amplitude &&
           a.signal_variance == b.signal_variance && a.dist_alpha == b.dist_alpha &&
           a.dist_gamma == b.dist_gamma && a.current_low == b.current_low &&
           a.current_high == b.current_high && a.max_optical_power == b.max_optical_power &&
           a.dimming_level == b.dimming_level && a.dc_bias_override == b.dc_bias_override;
}

bool operator==(const PanelParams& a, const PanelParams& b) {
    return a.fov_deg == b.fov_deg && a.refractive_index == b.refractive_index &&
           a.detector_area == b.detector_area && a.resp_l == b.resp_l &&
           a.resp_c == b.resp_c && a.eh == b.eh;
}

bool operator==(const Scenario& a, const Scenario& b) {
    return a.room_dims == b.room_dims && a.led_positions == b.led_positions &&
           a.user_positions == b.user_positions && a.led == b.led && a.panel == b.panel &&
           a.noise_power == b.noise_power &&
           a.transmit_power_budget == b.transmit_power_budget &&
           a.energy_threshold == b.energy_threshold;
}

} // namespace slipt
