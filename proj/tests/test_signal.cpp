// SPDX-License-Identifier: Apache-2.0
#include "slipt/errors.hpp"
#include "slipt/signal_model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace slipt;

TEST_CASE("tau") {
    CHECK(tau(0.0, 0.0, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(tau(0.5, 0.0, 123.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
    CHECK(tau(0.0, 0.25, 2.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
    double prev = tau(-1.0, 0.0, 1.0);
    for (double a = -0.5; a <= 1.0; a += 0.25) {
        CHECK(tau(a, 0.0, 1.0) > prev);
        prev = tau(a, 0.0, 1.0);
    }
}

TEST_CASE("dc bias") {
    LedParams led;
    CHECK(dc_bias(led, 8) == doctest::Approx(12.5).epsilon(1e-12));
    LedParams unity;
    unity.dimming_level = 1.0;
    unity.max_optical_power = 6.0;
    CHECK(dc_bias(unity, 6) == doctest::Approx(1.0).epsilon(1e-12));
    LedParams dbl = led;
    dbl.max_optical_power = 250.0;
    CHECK(dc_bias(dbl, 8) == doctest::Approx(25.0).epsilon(1e-12));
    LedParams ovr = led;
    ovr.dc_bias_override = 11.0;
    CHECK(dc_bias(ovr, 8) == 11.0);
}

TEST_CASE("optical headroom") {
    LedParams led;
    CHECK(optical_headroom(led, 8) == doctest::Approx(2.5).epsilon(1e-12));
    LedParams mid = led;
    mid.max_optical_power = 125.0; // bias 12.5 = midpoint of [10, 15]
    CHECK(optical_headroom(mid, 8) ==
          doctest::Approx((led.current_high - led.current_low) / 2.0).epsilon(1e-12));
    LedParams lo = led;
    lo.max_optical_power = 100.0; // bias exactly I_L
    CHECK(optical_headroom(lo, 8) == doctest::Approx(0.0));
    LedParams bad = led;
    bad.max_optical_power = 80.0; // bias 8 < I_L
    CHECK_THROWS_AS(optical_headroom(bad, 8), InfeasibleError);
}

namespace {

BeamformerSet random_beams(int n, int k_users, double scale, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    BeamformerSet b = BeamformerSet::zeros(n, k_users, 12.5);
    for (int i = 0; i < b.n_streams(); ++i)
        for (int r = 0; r < n; ++r) b.beams(r, i) = scale * g(rng);
    return b;
}

} // namespace

TEST_CASE("check_feasible") {
    Scenario s = default_scenario();
    const int n = s.n_leds();
    SUBCASE("zero beams leave the full bounds as slack") {
        BeamformerSet z = BeamformerSet::zeros(n, s.n_users(), dc_bias(s.led, n));
        ConstraintReport rep = check_feasible(z, s);
        CHECK(rep.all_satisfied());
        for (const auto& c : rep.amplitude)
            CHECK(c.slack == doctest::Approx(12.5).epsilon(1e-12));
        for (const auto& c : rep.optical)
            CHECK(c.slack == doctest::Approx(2.5).epsilon(1e-12));
        CHECK(rep.power.slack ==
              doctest::Approx(s.transmit_power_budget).epsilon(1e-12));
    }
    SUBCASE("power boundary has zero slack") {
        BeamformerSet b = BeamformerSet::zeros(n, s.n_users(), dc_bias(s.led, n));
        double norm = std::sqrt(s.transmit_power_budget / s.led.signal_variance);
        b.beams(0, 1) = norm;
        ConstraintReport rep = check_feasible(b, s);
        CHECK(rep.power.slack == doctest::Approx(0.0));
        CHECK(rep.power.satisfied); // within tolerance
    }
    SUBCASE("down-scaling never decreases amplitude or power slack") {
        BeamformerSet b = random_beams(n, s.n_users(), 0.3, 11);
        ConstraintReport full = check_feasible(b, s);
        for (double scale : {0.75, 0.5, 0.25, 0.0}) {
            BeamformerSet c = b;
            c.beams *= scale;
            ConstraintReport rep = check_feasible(c, s);
            for (int r = 0; r < n; ++r)
                CHECK(rep.amplitude[r].slack >= full.amplitude[r].slack - 1e-12);
            CHECK(rep.power.slack >= full.power.slack - 1e-12);
            // The signed optical slack shrinks toward the headroom only where the
            // signed sum is positive (the binding direction of the constraint).
            for (int r = 0; r < n; ++r)
                if (full.optical[r].slack <= 2.5)
                    CHECK(rep.optical[r].slack >= full.optical[r].slack - 1e-12);
        }
    }
    SUBCASE("amplitude slack is sign-invariant, signed optical slack is not") {
        BeamformerSet b = random_beams(n, s.n_users(), 0.3, 12);
        ConstraintReport before = check_feasible(b, s);
        BeamformerSet flipped = b;
        flipped.beams(0, 1) = -flipped.beams(0, 1);
        ConstraintReport after = check_feasible(flipped, s);
        for (int r = 0; r < n; ++r)
            CHECK(after.amplitude[r].slack ==
                  doctest::Approx(before.amplitude[r].slack).epsilon(1e-12));
        CHECK(after.optical[0].slack != doctest::Approx(before.optical[0].slack));
    }
    SUBCASE("violations are reported, not thrown") {
        BeamformerSet b = BeamformerSet::zeros(n, s.n_users(), dc_bias(s.led, n));
        b.beams(0, 1) = 100.0;
        ConstraintReport rep = check_feasible(b, s);
        CHECK_FALSE(rep.all_satisfied());
        CHECK_FALSE(rep.amplitude[0].satisfied);
        CHECK_FALSE(rep.power.satisfied);
    }
}
