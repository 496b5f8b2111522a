// SPDX-License-Identifier: Apache-2.0
#include "slipt/channel.hpp"
#include "slipt/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

using namespace slipt;

TEST_CASE("lambertian order") {
    CHECK(lambertian_order(60.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lambertian_order(45.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(lambertian_order(90.0), ValidationError);
    CHECK_THROWS_AS(lambertian_order(0.0), ValidationError);
    CHECK_THROWS_AS(lambertian_order(-5.0), ValidationError);
    // Wider semi-angles spread the beam, so the order strictly decreases.
    double prev = lambertian_order(5.0);
    for (double a = 10.0; a < 90.0; a += 5.0) {
        double cur = lambertian_order(a);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("effective area") {
    PanelParams p;
    CHECK(effective_area(p) == doctest::Approx(3e-3).epsilon(1e-12)); // 30 cm^2
    PanelParams q;
    q.refractive_index = 1.0;
    q.fov_deg = 90.0;
    q.detector_area = 0.42;
    CHECK(effective_area(q) == doctest::Approx(0.42).epsilon(1e-12));
    PanelParams h = p;
    h.detector_area = p.detector_area / 2.0;
    CHECK(effective_area(h) == doctest::Approx(effective_area(p) / 2.0).epsilon(1e-12));
}

TEST_CASE("on-axis gain matches the hand-computed value") {
    LedParams led;
    PanelParams panel;
    Vec3 led_pos{1.5, 1.5, 4.5};
    Vec3 user_pos{1.5, 1.5, 1.7};
    double g = channel_gain(led_pos, user_pos, led, panel);
    // (l+1) theta_l theta_c A_p / (2 pi d^2) with l=1, A_p=30 cm^2, d=2.8 m.
    double expect = 2.0 * 0.54 * 1.0 * 3e-3 / (2.0 * std::numbers::pi * 7.84);
    CHECK(g == doctest::Approx(expect).epsilon(1e-12));
    CHECK(g == doctest::Approx(6.58e-5).epsilon(1e-3));
}

TEST_CASE("gain edge cases") {
    LedParams led;
    PanelParams panel;
    SUBCASE("FOV violation returns exactly zero") {
        // Horizontal offset 5 m at height gap 2.8 m is ~60.7 degrees off axis.
        double g = channel_gain({0, 0, 4.5}, {5.0, 0, 1.7}, led, panel);
        CHECK(g == 0.0);
    }
    SUBCASE("degenerate geometry throws") {
        CHECK_THROWS_AS(channel_gain({1, 1, 2}, {1, 1, 2}, led, panel), ValidationError);
    }
    SUBCASE("inverse square on axis") {
        double g1 = channel_gain({0, 0, 2.0}, {0, 0, 0.0}, led, panel);
        double g2 = channel_gain({0, 0, 4.0}, {0, 0, 0.0}, led, panel);
        CHECK(g1 == doctest::Approx(4.0 * g2).epsilon(1e-12));
    }
    SUBCASE("user above the LED plane sees nothing") {
        CHECK(channel_gain({1, 1, 2.0}, {1, 1, 3.0}, led, panel) == 0.0);
    }
}

TEST_CASE("gain is invariant under rotation about the LED vertical axis") {
    LedParams led;
    PanelParams panel;
    Vec3 led_pos{1.0, 2.0, 4.5};
    Vec3 user{1.9, 2.4, 1.7};
    double base = channel_gain(led_pos, user, led, panel);
    for (double ang : {0.3, 1.1, 2.5, 4.0}) {
        double c = std::cos(ang), s = std::sin(ang);
        double rx = user[0] - led_pos[0], ry = user[1] - led_pos[1];
        Vec3 rot{led_pos[0] + c * rx - s * ry, led_pos[1] + s * rx + c * ry, user[2]};
        CHECK(channel_gain(led_pos, rot, led, panel) ==
              doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("channel matrix of the default scenario") {
    Scenario s = default_scenario();
    ChannelMatrix ch = channel_matrix(s);
    CHECK(ch.n_users() == 3);
    CHECK(ch.n_leds() == 8);
    CHECK((ch.gains.array() >= 0.0).all());
    for (int k = 0; k < ch.n_users(); ++k) {
        Eigen::VectorXd h = ch.user_row(k);
        CHECK((ch.grams[k] - h * h.transpose()).norm() == 0.0);
        CHECK(ch.grams[k].trace() == doctest::Approx(h.squaredNorm()).epsilon(1e-14));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ch.grams[k]);
        double l1 = eig.eigenvalues()(ch.n_leds() - 1);
        double l2 = std::abs(eig.eigenvalues()(ch.n_leds() - 2));
        CHECK(l1 > 0.0);
        CHECK(l2 / l1 < 1e-10);
    }
}

TEST_CASE("equidistant LEDs give equal gains") {
    Scenario s = default_scenario();
    s.user_positions = {{1.5, 1.5, 1.7}};
    // LEDs 0..3 are the four corners at distance sqrt(1+1+7.84) from this user.
    ChannelMatrix ch = channel_matrix(s);
    for (int n = 1; n < 4; ++n)
        CHECK(ch.gains(0, n) == doctest::Approx(ch.gains(0, 0)).epsilon(1e-12));
}

TEST_CASE("channel csv dump") {
    Scenario s = default_scenario();
    ChannelMatrix ch = channel_matrix(s);
    std::string path = "channel_dump_test.csv";
    write_channel_csv(ch, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("user,led_0", 0) == 0);
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
    std::remove(path.c_str());
}
