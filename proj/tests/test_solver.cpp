// SPDX-License-Identifier: Apache-2.0
#include "slipt/solver.hpp"

#include "slipt/channel.hpp"
#include "slipt/energy.hpp"
#include "slipt/errors.hpp"
#include "slipt/rates.hpp"
#include "slipt/signal_model.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

namespace {

/// Same rescaled room as the subproblem tests: rates in a human-sized range.
slipt::Scenario solve_scenario() {
    slipt::Scenario s = slipt::default_scenario();
    s.panel.resp_c = 1.5e4;
    s.noise_power = 0.4;
    s.transmit_power_budget = 12.65;
    s.energy_threshold = 0.0;
    return s;
}

slipt::BeamformerSet beams_of(const slipt::LinearizationPoint& point, const slipt::Scenario& s,
                              bool with_common) {
    const int n_users = static_cast<int>(point.v_private.size());
    const int n_leds = static_cast<int>(point.covariances.front().rows());
    slipt::BeamformerSet set = slipt::BeamformerSet::zeros(n_leds, n_users,
                                                           slipt::dc_bias(s.led, n_leds));
    for (std::size_t i = 0; i < point.covariances.size(); ++i) {
        const int stream = with_common ? static_cast<int>(i) : static_cast<int>(i) + 1;
        const double power = point.covariances[i].trace();
        set.beams.col(stream) = std::sqrt(std::max(power, 0.0)) * point.directions[i];
    }
    return set;
}

double max_penalized_drop(const std::vector<slipt::IterationRecord>& trace) {
    double drop = 0.0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i].rho != trace[i - 1].rho) continue; // new penalty segment
        drop = std::max(drop, trace[i - 1].penalized - trace[i].penalized);
    }
    return drop;
}

} // namespace

TEST_CASE("initializer leaves slack on every transmit bound") {
    const slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    const double headroom = slipt::optical_headroom(s.led, ch.n_leds());
    const double amp2 = s.led.peak_amplitude * s.led.peak_amplitude;

    for (const slipt::Scheme kind :
         {slipt::Scheme::rsma, slipt::Scheme::sdma, slipt::Scheme::noma}) {
        slipt::SchemeConfig cfg;
        cfg.kind = kind;
        const slipt::LinearizationPoint point = slipt::initialize(s, ch, cfg);
        const bool with_common = kind == slipt::Scheme::rsma;
        const slipt::BeamformerSet set = beams_of(point, s, with_common);

        const slipt::ConstraintReport rep = slipt::check_feasible(set, s, 0.0);
        CHECK(rep.all_satisfied());
        CHECK(rep.power.slack >= 0.099 * s.transmit_power_budget);

        // The lifted per-LED squared drive bound holds with its own slack.
        for (int n = 0; n < ch.n_leds(); ++n) {
            double load = 0.0;
            for (const auto& P : point.covariances) load += amp2 * P(n, n);
            CHECK(load <= 0.9 * headroom * headroom + 1e-9);
        }

        // No harvesting requirement, so the time split sits at 90% of one.
        CHECK(point.theta == doctest::Approx(0.9).epsilon(1e-12));

        // Matched filters leave the private surrogates free to go negative
        // (mutual interference outweighs the bound's signal coefficient), but
        // the max-min stand-in must sit strictly under what they reach.
        double reachable = std::numeric_limits<double>::infinity();
        for (int k = 0; k < ch.n_users(); ++k) {
            const double share = with_common ? point.common_shares(k) : 0.0;
            reachable = std::min(reachable, share + point.theta * point.v_private(k));
        }
        CHECK(point.t < reachable);
        if (with_common) {
            CHECK(point.v_common.minCoeff() > 0.0);
            CHECK(point.common_shares.minCoeff() > 0.0);
        } else {
            CHECK(point.common_shares.size() == 0);
        }
    }
}

TEST_CASE("initializer matches the lone user's channel") {
    slipt::Scenario s = solve_scenario();
    s.user_positions.resize(1);
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    slipt::SchemeConfig cfg;
    cfg.kind = slipt::Scheme::sdma;
    const slipt::LinearizationPoint point = slipt::initialize(s, ch, cfg);
    const double cosine = std::abs(point.directions[0].dot(ch.user_row(0).normalized()));
    CHECK(cosine == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("initializer is deterministic") {
    const slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    slipt::SchemeConfig cfg;
    cfg.kind = slipt::Scheme::rsma;
    const slipt::LinearizationPoint a = slipt::initialize(s, ch, cfg, 7);
    const slipt::LinearizationPoint b = slipt::initialize(s, ch, cfg, 7);
    REQUIRE(a.covariances.size() == b.covariances.size());
    for (std::size_t i = 0; i < a.covariances.size(); ++i)
        CHECK((a.covariances[i] - b.covariances[i]).norm() == 0.0);
    CHECK(a.theta == b.theta);
    CHECK(a.t == b.t);
}

TEST_CASE("initializer start is strictly interior for every scheme") {
    const slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    for (const slipt::Scheme kind :
         {slipt::Scheme::rsma, slipt::Scheme::sdma, slipt::Scheme::noma}) {
        slipt::SchemeConfig cfg;
        cfg.kind = kind;
        const slipt::LinearizationPoint point = slipt::initialize(s, ch, cfg);
        const slipt::ConicProgram prog = slipt::build_subproblem(point, s, ch, cfg, -10.0);
        CHECK(slipt::diagnose_start(prog, prog.start).empty());
    }
}

TEST_CASE("beam recovery inverts a rank-one lift") {
    const slipt::Scenario s = solve_scenario();
    const int n = s.n_leds();
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u(i) = std::cos(1.0 + 0.7 * i);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w(i) = std::sin(0.3 + 0.5 * i);

    std::vector<Eigen::MatrixXd> covs;
    covs.push_back(4.0 * u * u.transpose());
    covs.push_back(w * w.transpose());
    const slipt::BeamformerSet set = slipt::recover_beamformers(covs, s, true, 1e-4);
    REQUIRE(set.n_streams() == 2);
    const double gap0 = std::min((set.common() - 2.0 * u).norm(), (set.common() + 2.0 * u).norm());
    const double gap1 =
        std::min((set.private_beam(1) - w).norm(), (set.private_beam(1) + w).norm());
    CHECK(gap0 <= 1e-9);
    CHECK(gap1 <= 1e-9);

    // The lifted moments survive the round trip.
    const Eigen::VectorXd h = Eigen::VectorXd::LinSpaced(n, 0.1, 1.0);
    const Eigen::MatrixXd hh = h * h.transpose();
    const double lifted = (hh * covs[1]).trace();
    const double direct = std::pow(h.dot(set.private_beam(1)), 2);
    CHECK(direct == doctest::Approx(lifted).epsilon(1e-9));

    // A genuinely spread spectrum is rejected by name.
    std::vector<Eigen::MatrixXd> spread{Eigen::MatrixXd::Identity(n, n)};
    CHECK_THROWS_AS(slipt::recover_beamformers(spread, s, false, 1e-4), slipt::SolveError);

    // A stream carrying a vanishing share of the power is turned off, not
    // treated as a rank defect.
    std::vector<Eigen::MatrixXd> faint{u * u.transpose(),
                                       1e-12 * Eigen::MatrixXd::Identity(n, n)};
    const slipt::BeamformerSet off = slipt::recover_beamformers(faint, s, true, 1e-4);
    CHECK(off.private_beam(1).norm() == 0.0);
}

TEST_CASE("solver converges on the reference scenario for all schemes") {
    const slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    slipt::SolverOptions opts;

    double rsma_value = 0.0;
    double best_other = -std::numeric_limits<double>::infinity();
    for (const slipt::Scheme kind :
         {slipt::Scheme::rsma, slipt::Scheme::sdma, slipt::Scheme::noma}) {
        CAPTURE(to_string(kind));
        slipt::SchemeConfig cfg;
        cfg.kind = kind;
        const slipt::Solution sol = slipt::solve_mmf(s, ch, cfg, opts);
        REQUIRE(sol.outcome == slipt::SolveOutcome::converged);
        REQUIRE(!sol.trace.empty());

        // Ascent of the penalized objective within each penalty segment.
        CHECK(max_penalized_drop(sol.trace) <= 1e-6);

        CHECK(sol.mmf_value > 0.0);
        const double final_t = sol.trace.back().t;
        CHECK(sol.mmf_value >= final_t - 1e-3);
        CHECK(std::abs(sol.mmf_value - final_t) <= 5e-3);

        CHECK(sol.validation.all_satisfied());
        CHECK(sol.energy_satisfied);
        CHECK(sol.allocation.theta > 0.0);
        CHECK(sol.allocation.theta <= 1.0);

        double total_power = 0.0;
        for (int i = 0; i < sol.beamformers.n_streams(); ++i)
            total_power += sol.beamformers.beams.col(i).squaredNorm();
        CHECK(sol.penalty_residual <= opts.rank_tol * total_power + 1e-12);

        if (kind == slipt::Scheme::rsma)
            rsma_value = sol.mmf_value;
        else
            best_other = std::max(best_other, sol.mmf_value);
    }
    // Splitting subsumes both baselines, so its optimum cannot trail them.
    CHECK(rsma_value >= best_other - 1e-3);
}

TEST_CASE("single-user schemes agree and repeat runs are identical") {
    slipt::Scenario s = solve_scenario();
    s.user_positions.resize(1);
    slipt::SolverOptions opts;
    opts.convergence_tol = 1e-6;

    std::vector<double> values;
    for (const slipt::Scheme kind :
         {slipt::Scheme::rsma, slipt::Scheme::sdma, slipt::Scheme::noma}) {
        slipt::SchemeConfig cfg;
        cfg.kind = kind;
        const slipt::Solution sol = slipt::solve_mmf(s, cfg, opts);
        CAPTURE(to_string(kind));
        REQUIRE(sol.outcome == slipt::SolveOutcome::converged);
        values.push_back(sol.mmf_value);
    }
    CHECK(std::abs(values[0] - values[1]) <= 1e-4);
    CHECK(std::abs(values[1] - values[2]) <= 1e-4);

    slipt::SchemeConfig cfg;
    cfg.kind = slipt::Scheme::sdma;
    const slipt::Solution once = slipt::solve_mmf(s, cfg, opts);
    const slipt::Solution again = slipt::solve_mmf(s, cfg, opts);
    CHECK(once.mmf_value == again.mmf_value);
    CHECK(once.trace.size() == again.trace.size());
    CHECK((once.beamformers.beams - again.beamformers.beams).norm() == 0.0);
}

TEST_CASE("solver options are validated") {
    const slipt::Scenario s = solve_scenario();
    slipt::SchemeConfig cfg;

    slipt::SolverOptions bad = {};
    bad.penalty_rho = 1.0;
    CHECK_THROWS_AS(slipt::solve_mmf(s, cfg, bad), slipt::ValidationError);
    bad = {};
    bad.penalty_growth = 0.5;
    CHECK_THROWS_AS(slipt::solve_mmf(s, cfg, bad), slipt::ValidationError);
    bad = {};
    bad.max_iters = 0;
    CHECK_THROWS_AS(slipt::solve_mmf(s, cfg, bad), slipt::ValidationError);
    bad = {};
    bad.convergence_tol = 0.0;
    CHECK_THROWS_AS(slipt::solve_mmf(s, cfg, bad), slipt::ValidationError);
}
