// SPDX-License-Identifier: Apache-2.0
#include "slipt/subproblem.hpp"

#include "slipt/channel.hpp"
#include "slipt/energy.hpp"
#include "slipt/errors.hpp"
#include "slipt/rates.hpp"
#include "slipt/schemes.hpp"
#include "slipt/signal_model.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// The reference room rescaled so that rates land in a human-sized range:
/// a large conversion gain, order-one noise, and a matching power budget.
slipt::Scenario solve_scenario() {
    slipt::Scenario s = slipt::default_scenario();
    s.panel.resp_c = 1.5e4;
    s.noise_power = 0.4;
    s.transmit_power_budget = 12.65;
    s.energy_threshold = 0.0;
    return s;
}

Eigen::MatrixXd random_psd(int dim, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = gauss(rng);
    return scale * (a * a.transpose()) / dim;
}

/// Matched-filter beams scaled to half the power budget and at most half the
/// per-LED squared drive bound, turned into a strictly slack iterate.
slipt::LinearizationPoint feasible_point(const slipt::Scenario& s, const slipt::ChannelMatrix& ch,
                                         slipt::Scheme kind) {
    const int n_users = ch.n_users();
    const int n_leds = ch.n_leds();
    const bool with_common = kind == slipt::Scheme::rsma;
    const int n_streams = with_common ? n_users + 1 : n_users;

    const Eigen::VectorXd taus = slipt::stream_taus(s.led, n_users + 1);
    const Eigen::VectorXd eps = slipt::stream_eps(s.led, n_users + 1);
    const double half_budget = 0.5 * s.transmit_power_budget;

    // Matched filters, with the common beam (when present) taking the lion's
    // share of the power so that its stream stays decodable at every user.
    Eigen::MatrixXd beams(n_leds, n_users + 1);
    Eigen::VectorXd pooled = Eigen::VectorXd::Zero(n_leds);
    for (int k = 0; k < n_users; ++k) pooled += ch.user_row(k);
    beams.col(0).setZero();
    if (with_common)
        beams.col(0) = std::sqrt(0.7 * half_budget / eps(0)) * pooled.normalized();
    const double private_pool = (with_common ? 0.3 : 1.0) * half_budget;
    for (int k = 1; k <= n_users; ++k)
        beams.col(k) = std::sqrt(private_pool / (n_users * eps(k))) *
                       Eigen::VectorXd(ch.user_row(k - 1).normalized());

    const double bound = slipt::optical_headroom(s.led, n_leds);
    const double amp2 = s.led.peak_amplitude * s.led.peak_amplitude;
    double worst = 0.0;
    for (int n = 0; n < n_leds; ++n) worst = std::max(worst, amp2 * beams.row(n).squaredNorm());
    if (worst > 0.5 * bound * bound) beams *= std::sqrt(0.5 * bound * bound / worst);

    slipt::BeamformerSet set{beams, slipt::dc_bias(s.led, n_leds)};
    if (with_common) {
        for (int halvings = 0; halvings < 60; ++halvings) {
            double weakest = std::numeric_limits<double>::infinity();
            for (int k = 1; k <= n_users; ++k)
                weakest = std::min(weakest, slipt::common_rate_lb(ch.user_row(k - 1), set, taus,
                                                                  eps, s.noise_power));
            if (weakest > 0.02) break;
            set.beams.rightCols(n_users) *= 0.5;
        }
        beams = set.beams;
    }

    slipt::LinearizationPoint point;
    point.theta = 0.9 * std::min(1.0, slipt::theta_cap(s, ch));
    for (int i = 0; i < n_streams; ++i) {
        const Eigen::VectorXd p = beams.col(with_common ? i : i + 1);
        point.covariances.push_back(p * p.transpose());
        point.directions.push_back(p.normalized());
    }
    const auto margined = [](double rate) { return rate - std::max(1e-3, 0.05 * std::abs(rate)); };
    point.v_private.resize(n_users);
    if (kind == slipt::Scheme::noma) {
        const std::vector<int> order = slipt::default_noma_order(ch);
        for (int layer = 0; layer < n_users; ++layer)
            point.v_private(layer) = margined(slipt::noma_layer_rate_lb(
                ch, set, taus, eps, s.noise_power, order, layer));
    } else {
        for (int k = 1; k <= n_users; ++k)
            point.v_private(k - 1) = margined(
                slipt::private_rate_lb(ch.user_row(k - 1), set, taus, eps, s.noise_power, k));
    }
    if (with_common) {
        point.v_common.resize(n_users);
        for (int k = 1; k <= n_users; ++k)
            point.v_common(k - 1) =
                margined(slipt::common_rate_lb(ch.user_row(k - 1), set, taus, eps, s.noise_power));
        REQUIRE(point.v_common.minCoeff() > 0.0);
        point.common_shares =
            Eigen::VectorXd::Constant(n_users, 0.8 * point.theta * point.v_common.minCoeff() /
                                                   static_cast<double>(n_users));
    }
    double cap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_users; ++k) {
        const double share = with_common ? point.common_shares(k) : 0.0;
        cap = std::min(cap, share + point.theta * point.v_private(k));
    }
    point.t = cap - std::max(1e-3, 0.05 * std::abs(cap));
    return point;
}

} // namespace

TEST_CASE("interference tangent touches the log at the expansion point") {
    const slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    const slipt::LinearizationPoint point = feasible_point(s, ch, slipt::Scheme::rsma);
    const int n_users = ch.n_users();
    const Eigen::VectorXd eps = slipt::stream_eps(s.led, n_users + 1);

    for (int k = 1; k <= n_users; ++k) {
        for (const auto kind : {slipt::RateKind::common, slipt::RateKind::private_stream}) {
            const slipt::MatrixAffine tangent =
                slipt::linearize_interference(point, ch, s, k, kind);
            const Eigen::VectorXd h = ch.user_row(k - 1);
            double den = kTwoPi * s.noise_power;
            for (int j = 1; j <= n_users; ++j) {
                if (kind == slipt::RateKind::private_stream && j == k) continue;
                den += kTwoPi * eps(j) * h.dot(point.covariances[static_cast<std::size_t>(j)] * h);
            }
            CHECK(tangent.eval(point.covariances) ==
                  doctest::Approx(std::log2(den)).epsilon(1e-12));
        }
    }
}

TEST_CASE("interference tangent over-estimates the log everywhere") {
    const slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    const slipt::LinearizationPoint point = feasible_point(s, ch, slipt::Scheme::rsma);
    const int n_users = ch.n_users();
    const Eigen::VectorXd eps = slipt::stream_eps(s.led, n_users + 1);
    const slipt::MatrixAffine tangent =
        slipt::linearize_interference(point, ch, s, 1, slipt::RateKind::common);
    const Eigen::VectorXd h = ch.user_row(0);

    std::mt19937_64 rng(7);
    const double scale = point.covariances[1].trace();
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Eigen::MatrixXd> perturbed = point.covariances;
        for (auto& P : perturbed) P = random_psd(static_cast<int>(P.rows()), rng, scale);
        double den = kTwoPi * s.noise_power;
        for (int j = 1; j <= n_users; ++j)
            den += kTwoPi * eps(j) * h.dot(perturbed[static_cast<std::size_t>(j)] * h);
        CHECK(tangent.eval(perturbed) >= std::log2(den) - 1e-12);
    }
}

TEST_CASE("single-user private tangent is the pure noise constant") {
    slipt::Scenario s = solve_scenario();
    s.user_positions.resize(1);
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    const slipt::LinearizationPoint point = feasible_point(s, ch, slipt::Scheme::rsma);
    const slipt::MatrixAffine tangent =
        slipt::linearize_interference(point, ch, s, 1, slipt::RateKind::private_stream);
    CHECK(tangent.constant == doctest::Approx(std::log2(kTwoPi * s.noise_power)).epsilon(1e-12));
    for (const auto& C : tangent.coeffs) CHECK(C.size() == 0);
}

TEST_CASE("split tangent touches the square at the point and never exceeds it") {
    slipt::LinearizationPoint point;
    point.theta = 0.7;
    point.v_common = Eigen::VectorXd::Constant(1, 1.9);
    point.v_private = Eigen::VectorXd::Constant(1, 2.4);

    const slipt::SplitAffine common = slipt::linearize_split(point, 1, slipt::RateKind::common);
    const double at_point = 0.25 * (point.theta + point.v_common(0)) *
                            (point.theta + point.v_common(0));
    CHECK(common.eval(point.theta, point.v_common(0)) == doctest::Approx(at_point).epsilon(1e-12));

    const slipt::SplitAffine priv =
        slipt::linearize_split(point, 1, slipt::RateKind::private_stream);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> wide(-4.0, 4.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double theta = wide(rng);
        const double v = wide(rng);
        CHECK(priv.eval(theta, v) <= 0.25 * (theta + v) * (theta + v) + 1e-12);
    }

    point.v_private(0) = -point.theta;
    const slipt::SplitAffine zero =
        slipt::linearize_split(point, 1, slipt::RateKind::private_stream);
    CHECK(zero.constant == 0.0);
    CHECK(zero.theta_coeff == 0.0);
    CHECK(zero.v_coeff == 0.0);
}

TEST_CASE("difference of squares recovers the product") {
    CHECK(slipt::bilinear_identity(0.5, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(slipt::bilinear_identity(3.7, 0.0) == 0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> wide(-50.0, 50.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double a = wide(rng);
        const double b = wide(rng);
        CHECK(slipt::bilinear_identity(a, b) ==
              doctest::Approx(a * b).epsilon(1e-12).scale(std::max(1.0, std::abs(a * b))));
    }
}

TEST_CASE("quadratic channel forms agree between vectors and covariances") {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd h(6), p(6);
        for (int i = 0; i < 6; ++i) {
            h(i) = gauss(rng);
            p(i) = gauss(rng);
        }
        const double direct = h.dot(p) * h.dot(p);
        const Eigen::MatrixXd H = h * h.transpose();
        const Eigen::MatrixXd P = p * p.transpose();
        const double lifted = H.cwiseProduct(P).sum();
        CHECK(lifted == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("rank-one penalty residual") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd v(4);
    for (int i = 0; i < 4; ++i) v(i) = gauss(rng);
    const std::vector<Eigen::MatrixXd> rank_one{v * v.transpose()};
    CHECK(slipt::penalty_residual(rank_one) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    const std::vector<Eigen::MatrixXd> eye{Eigen::MatrixXd::Identity(2, 2)};
    CHECK(slipt::penalty_residual(eye) == doctest::Approx(1.0).epsilon(1e-12));

    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<Eigen::MatrixXd> any{random_psd(5, rng, 2.0)};
        CHECK(slipt::penalty_residual(any) >= -1e-12);
    }
}

TEST_CASE("subproblem structure matches the formulation") {
    const slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    const int n_users = ch.n_users();
    REQUIRE(n_users == 3);
    REQUIRE(ch.n_leds() == 8);

    SUBCASE("rate-splitting") {
        const slipt::LinearizationPoint point = feasible_point(s, ch, slipt::Scheme::rsma);
        const slipt::ConicProgram prog =
            slipt::build_subproblem(point, s, ch, {slipt::Scheme::rsma, {}}, -1.0);
        CHECK(prog.psd_blocks.size() == 4);
        for (const auto& block : prog.psd_blocks) CHECK(block.dim == 8);
        CHECK(prog.n_scalars() == 2 + 3 * n_users);
        CHECK(prog.logs.size() == 2 * static_cast<std::size_t>(n_users));
        CHECK(prog.rsoc.size() == 2 * static_cast<std::size_t>(n_users));
        CHECK(prog.linear.size() == static_cast<std::size_t>(8 + 2 + 1 + n_users));
        CHECK(prog.find_block("P_0") == 0);
        CHECK_NOTHROW(prog.find_scalar("v_c_3"));
        CHECK_NOTHROW(prog.find_scalar("c_1"));
    }
    SUBCASE("space-division") {
        const slipt::LinearizationPoint point = feasible_point(s, ch, slipt::Scheme::sdma);
        const slipt::ConicProgram prog =
            slipt::build_subproblem(point, s, ch, {slipt::Scheme::sdma, {}}, -1.0);
        CHECK(prog.psd_blocks.size() == 3);
        CHECK(prog.n_scalars() == 2 + n_users);
        CHECK(prog.logs.size() == static_cast<std::size_t>(n_users));
        CHECK(prog.rsoc.size() == static_cast<std::size_t>(n_users));
        CHECK(prog.linear.size() == static_cast<std::size_t>(8 + 2 + 1));
        CHECK_THROWS_AS((void)prog.find_scalar("c_1"), slipt::ValidationError);
        CHECK_THROWS_AS((void)prog.find_block("P_0"), slipt::ValidationError);
    }
    SUBCASE("successive decoding") {
        const slipt::LinearizationPoint point = feasible_point(s, ch, slipt::Scheme::noma);
        const slipt::ConicProgram prog =
            slipt::build_subproblem(point, s, ch, {slipt::Scheme::noma, {}}, -1.0);
        CHECK(prog.psd_blocks.size() == 3);
        CHECK(prog.n_scalars() == 2 + n_users);
        CHECK(prog.logs.size() == static_cast<std::size_t>(n_users * (n_users + 1) / 2));
        CHECK(prog.rsoc.size() == static_cast<std::size_t>(n_users));
        CHECK(prog.linear.size() == static_cast<std::size_t>(8 + 2 + 1));
    }
}

TEST_CASE("zero penalty weight leaves a bare max-min objective") {
    const slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    const slipt::LinearizationPoint point = feasible_point(s, ch, slipt::Scheme::rsma);
    const slipt::ConicProgram prog =
        slipt::build_subproblem(point, s, ch, {slipt::Scheme::rsma, {}}, 0.0);
    REQUIRE(prog.objective.terms.size() == 1);
    CHECK(prog.objective.terms[0].first == prog.find_scalar("t"));
    CHECK(prog.objective.terms[0].second == 1.0);
}

TEST_CASE("builder rejects malformed inputs") {
    const slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    slipt::LinearizationPoint point = feasible_point(s, ch, slipt::Scheme::rsma);

    CHECK_THROWS_AS((void)slipt::build_subproblem(point, s, ch, {slipt::Scheme::rsma, {}}, 1.0),
                    slipt::ValidationError);
    CHECK_THROWS_AS((void)slipt::build_subproblem(point, s, ch, {slipt::Scheme::sdma, {}}, -1.0),
                    slipt::ValidationError);
    point.theta = 1.5;
    CHECK_THROWS_AS((void)slipt::build_subproblem(point, s, ch, {slipt::Scheme::rsma, {}}, -1.0),
                    slipt::ValidationError);
    point.theta = 0.9;
    point.covariances.pop_back();
    point.directions.pop_back();
    CHECK_THROWS_AS((void)slipt::build_subproblem(point, s, ch, {slipt::Scheme::rsma, {}}, -1.0),
                    slipt::ValidationError);
}

TEST_CASE("builder reports an empty harvesting window as infeasible") {
    slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    double weakest = std::numeric_limits<double>::infinity();
    for (int k = 0; k < ch.n_users(); ++k)
        weakest = std::min(weakest,
                           2.0 * slipt::ts_harvested(0.5, ch.user_row(k), s.panel, s.led));
    s.energy_threshold = weakest * (1.0 - 5e-10);
    const slipt::ChannelMatrix ch2 = slipt::channel_matrix(s);
    const slipt::LinearizationPoint point = feasible_point(solve_scenario(), ch, slipt::Scheme::rsma);
    CHECK_THROWS_AS((void)slipt::build_subproblem(point, s, ch2, {slipt::Scheme::rsma, {}}, -1.0),
                    slipt::InfeasibleError);
}

TEST_CASE("subproblem start is strictly interior for every scheme") {
    const slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    for (const auto kind : {slipt::Scheme::rsma, slipt::Scheme::sdma, slipt::Scheme::noma}) {
        CAPTURE(slipt::to_string(kind));
        const slipt::LinearizationPoint point = feasible_point(s, ch, kind);
        const slipt::ConicProgram prog = slipt::build_subproblem(point, s, ch, {kind, {}}, -1.0);
        CHECK(slipt::diagnose_start(prog, prog.start) == "");
    }
}

TEST_CASE("rate cones reproduce the exact rates at the expansion point") {
    const slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    const slipt::LinearizationPoint point = feasible_point(s, ch, slipt::Scheme::rsma);
    const slipt::ConicProgram prog =
        slipt::build_subproblem(point, s, ch, {slipt::Scheme::rsma, {}}, -1.0);

    const Eigen::VectorXd taus = slipt::stream_taus(s.led, ch.n_users() + 1);
    const Eigen::VectorXd eps = slipt::stream_eps(s.led, ch.n_users() + 1);
    Eigen::MatrixXd beams(ch.n_leds(), ch.n_users() + 1);
    for (int i = 0; i <= ch.n_users(); ++i) {
        const Eigen::MatrixXd& P = point.covariances[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
        beams.col(i) = std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0)) *
                       es.eigenvectors().col(ch.n_leds() - 1);
    }
    const slipt::BeamformerSet set{beams, slipt::dc_bias(s.led, ch.n_leds())};

    for (int k = 1; k <= ch.n_users(); ++k) {
        for (const auto& cone : prog.logs) {
            const bool is_common = cone.tag == "rate_common:" + std::to_string(k);
            const bool is_private = cone.tag == "rate_private:" + std::to_string(k);
            if (!is_common && !is_private) continue;
            const double gap =
                std::log(cone.arg.eval(prog.start)) - cone.level.eval(prog.start);
            const double rate =
                is_common
                    ? slipt::common_rate_lb(ch.user_row(k - 1), set, taus, eps, s.noise_power)
                    : slipt::private_rate_lb(ch.user_row(k - 1), set, taus, eps, s.noise_power, k);
            const double v = is_common ? point.v_common(k - 1) : point.v_private(k - 1);
            CHECK(gap == doctest::Approx(2.0 * std::numbers::ln2 * (rate - v)).epsilon(1e-6));
        }
    }
}

TEST_CASE("barrier solves a built subproblem above its start value") {
    const slipt::Scenario s = solve_scenario();
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    for (const auto kind : {slipt::Scheme::rsma, slipt::Scheme::sdma, slipt::Scheme::noma}) {
        CAPTURE(slipt::to_string(kind));
        const slipt::LinearizationPoint point = feasible_point(s, ch, kind);
        const slipt::ConicProgram prog = slipt::build_subproblem(point, s, ch, {kind, {}}, 0.0);
        const slipt::BarrierBackend backend;
        const slipt::SolveResult result = backend.solve(prog);
        CAPTURE(result.message);
        REQUIRE(result.status == slipt::SolveStatus::optimal);
        CHECK(result.objective >= point.t - 1e-9);
        const double theta = result.x[prog.find_scalar("theta")];
        CHECK(theta >= 1e-6 - 1e-12);
        CHECK(theta <= 1.0 + 1e-9);
    }
}

TEST_CASE("scheme names parse both ways") {
    CHECK(slipt::to_string(slipt::Scheme::rsma) == "rsma");
    CHECK(slipt::parse_scheme("NOMA") == slipt::Scheme::noma);
    CHECK(slipt::parse_scheme("sdma") == slipt::Scheme::sdma);
    CHECK_THROWS_AS((void)slipt::parse_scheme("tdma"), slipt::ParseError);
}

TEST_CASE("default decoding order sorts by channel strength") {
    slipt::ChannelMatrix ch;
    ch.gains.resize(3, 2);
    ch.gains << 1.0, 1.0, 3.0, 3.0, 2.0, 2.0;
    CHECK(slipt::default_noma_order(ch) == std::vector<int>{1, 2, 0});

    slipt::ChannelMatrix tied;
    tied.gains = Eigen::MatrixXd::Ones(3, 2);
    CHECK(slipt::default_noma_order(tied) == std::vector<int>{0, 1, 2});

    slipt::ChannelMatrix swapped;
    swapped.gains.resize(3, 2);
    swapped.gains << 2.0, 2.0, 1.0, 1.0, 3.0, 3.0;
    CHECK(slipt::default_noma_order(swapped) == std::vector<int>{2, 0, 1});
}

TEST_CASE("decoding order validation") {
    CHECK_NOTHROW(slipt::validate_noma_order({2, 0, 1}, 3));
    CHECK_THROWS_AS(slipt::validate_noma_order({0, 1}, 3), slipt::ValidationError);
    CHECK_THROWS_AS(slipt::validate_noma_order({0, 0, 1}, 3), slipt::ValidationError);
    CHECK_THROWS_AS(slipt::validate_noma_order({0, 1, 3}, 3), slipt::ValidationError);
}

TEST_CASE("successive-decoding pair rates follow the cancellation pattern") {
    slipt::Scenario s = solve_scenario();
    s.user_positions.resize(2);
    const slipt::ChannelMatrix ch = slipt::channel_matrix(s);
    const Eigen::VectorXd taus = slipt::stream_taus(s.led, 3);
    const Eigen::VectorXd eps = slipt::stream_eps(s.led, 3);

    Eigen::MatrixXd beams(ch.n_leds(), 3);
    beams.col(0).setZero();
    beams.col(1) = 0.7 * ch.user_row(0).normalized();
    beams.col(2) = 0.9 * ch.user_row(1).normalized();
    const slipt::BeamformerSet set{beams, slipt::dc_bias(s.led, ch.n_leds())};
    const std::vector<int> order{1, 0};

    // Position 0 stream: decoded only by its owner, no interference left.
    const Eigen::VectorXd h_strong = ch.user_row(1);
    const double g_own = h_strong.dot(set.private_beam(2));
    const double expected0 =
        0.5 * std::log2((kTwoPi * s.noise_power + taus(2) * g_own * g_own) /
                        (kTwoPi * s.noise_power));
    CHECK(slipt::noma_pair_rate_lb(ch, set, taus, eps, s.noise_power, order, 0, 0) ==
          doctest::Approx(expected0).epsilon(1e-12));

    // Position 1 stream seen by the position 0 user: the earlier stream of
    // the chain is still interference for it.
    const double g_cross = h_strong.dot(set.private_beam(1));
    const double expected10 =
        0.5 * std::log2((kTwoPi * s.noise_power + taus(1) * g_cross * g_cross +
                         taus(2) * g_own * g_own) /
                        (kTwoPi * s.noise_power + kTwoPi * eps(2) * g_own * g_own));
    CHECK(slipt::noma_pair_rate_lb(ch, set, taus, eps, s.noise_power, order, 1, 0) ==
          doctest::Approx(expected10).epsilon(1e-12));

    const double layer1 = slipt::noma_layer_rate_lb(ch, set, taus, eps, s.noise_power, order, 1);
    const double pair11 = slipt::noma_pair_rate_lb(ch, set, taus, eps, s.noise_power, order, 1, 1);
    CHECK(layer1 == doctest::Approx(std::min(expected10, pair11)).epsilon(1e-12));

    CHECK_THROWS_AS(
        (void)slipt::noma_pair_rate_lb(ch, set, taus, eps, s.noise_power, order, 0, 1),
        slipt::ValidationError);
}
