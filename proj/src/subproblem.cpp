// SPDX-License-Identifier: Apache-2.0
#include "slipt/subproblem.hpp"

#include "slipt/energy.hpp"
#include "slipt/errors.hpp"
#include "slipt/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace slipt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;

double quad_form(const Eigen::VectorXd& h, const Eigen::MatrixXd& P) {
    return h.dot(P * h);
}

/// Tangent (in bits) of log2(2 pi sigma^2 + 2 pi sum_{j in den} eps_j h'P_j h)
/// at the given covariances; an over-estimator of the log by concavity.
MatrixAffine tangent_interference(const std::vector<Eigen::MatrixXd>& P,
                                  const Eigen::VectorXd& h, const std::vector<int>& den_covs,
                                  const Eigen::VectorXd& eps_by_cov, double sigma2) {
    double den = kTwoPi * sigma2;
    for (int j : den_covs) den += kTwoPi * eps_by_cov(j) * quad_form(h, P[static_cast<std::size_t>(j)]);
    MatrixAffine out;
    out.coeffs.resize(P.size());
    out.constant = std::log2(den);
    const Eigen::MatrixXd hh = h * h.transpose();
    for (int j : den_covs) {
        const double weight = kTwoPi * eps_by_cov(j) / (den * kLn2);
        out.coeffs[static_cast<std::size_t>(j)] = weight * hh;
        out.constant -= weight * quad_form(h, P[static_cast<std::size_t>(j)]);
    }
    return out;
}

} // namespace

double MatrixAffine::eval(const std::vector<Eigen::MatrixXd>& P) const {
    double value = constant;
    for (std::size_t i = 0; i < coeffs.size() && i < P.size(); ++i) {
        if (coeffs[i].size() == 0) continue;
        value += coeffs[i].cwiseProduct(P[i]).sum();
    }
    return value;
}

MatrixAffine linearize_interference(const LinearizationPoint& point, const ChannelMatrix& ch,
                                    const Scenario& s, int k, RateKind kind) {
    const int n_users = ch.n_users();
    if (k < 1 || k > n_users)
        throw ValidationError("linearize_interference: user index out of range");
    const bool with_common = point.n_streams() == n_users + 1;
    if (!with_common && point.n_streams() != n_users)
        throw ValidationError("linearize_interference: covariance count mismatch");
    if (kind == RateKind::common && !with_common)
        throw ValidationError("linearize_interference: the point has no common stream");

    const Eigen::VectorXd eps = stream_eps(s.led, n_users + 1);
    Eigen::VectorXd eps_by_cov(point.n_streams());
    std::vector<int> den_covs;
    for (int i = 0; i < point.n_streams(); ++i) {
        const int stream = with_common ? i : i + 1;
        eps_by_cov(i) = eps(stream);
        if (stream == 0) continue;
        if (kind == RateKind::private_stream && stream == k) continue;
        den_covs.push_back(i);
    }
    return tangent_interference(point.covariances, ch.user_row(k - 1), den_covs, eps_by_cov,
                                s.noise_power);
}

SplitAffine linearize_split(const LinearizationPoint& point, int k, RateKind kind) {
    const Eigen::VectorXd& v = kind == RateKind::common ? point.v_common : point.v_private;
    if (k < 1 || k > v.size()) throw ValidationError("linearize_split: index out of range");
    const double g = 0.5 * (point.theta + v(k - 1));
    return SplitAffine{-g * g, g, g};
}

double bilinear_identity(double a, double b) {
    const double sum = a + b;
    const double diff = a - b;
    return 0.25 * sum * sum - 0.25 * diff * diff;
}

double penalty_residual(const std::vector<Eigen::MatrixXd>& covariances) {
    double total = 0.0;
    for (const auto& P : covariances) {
        if (P.size() == 0) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
        total += P.trace() - es.eigenvalues().maxCoeff();
    }
    return total;
}

ConicProgram build_subproblem(const LinearizationPoint& point, const Scenario& s,
                              const ChannelMatrix& ch, const SchemeConfig& scheme, double rho,
                              double theta_min) {
    const int n_users = ch.n_users();
    const int n_leds = ch.n_leds();
    if (n_users != s.n_users() || n_leds != s.n_leds())
        throw ValidationError("build_subproblem: channel does not match the scenario");
    if (rho > 0.0)
        throw ValidationError("build_subproblem: penalty weight must be nonpositive");
    if (!(theta_min > 0.0))
        throw ValidationError("build_subproblem: theta_min must be positive");

    const bool with_common = scheme.kind == Scheme::rsma;
    const int n_streams = with_common ? n_users + 1 : n_users;
    if (point.n_streams() != n_streams)
        throw ValidationError("build_subproblem: expected " + std::to_string(n_streams) +
                              " covariances, got " + std::to_string(point.n_streams()));
    if (static_cast<int>(point.directions.size()) != n_streams)
        throw ValidationError("build_subproblem: one direction per covariance required");
    for (int i = 0; i < n_streams; ++i) {
        if (point.covariances[static_cast<std::size_t>(i)].rows() != n_leds ||
            point.covariances[static_cast<std::size_t>(i)].cols() != n_leds ||
            point.directions[static_cast<std::size_t>(i)].size() != n_leds)
            throw ValidationError("build_subproblem: covariance/direction size mismatch");
    }
    if (!(point.theta > 0.0 && point.theta <= 1.0))
        throw ValidationError("build_subproblem: point.theta must be in (0, 1]");
    const auto expect_len = [](const Eigen::VectorXd& v, int len, const char* what) {
        if (v.size() != len)
            throw ValidationError(std::string("build_subproblem: ") + what + " has wrong length");
    };
    if (with_common) {
        expect_len(point.common_shares, n_users, "common_shares");
        expect_len(point.v_common, n_users, "v_common");
    } else {
        expect_len(point.common_shares, 0, "common_shares");
        expect_len(point.v_common, 0, "v_common");
    }
    expect_len(point.v_private, n_users, "v_private");

    const double sigma2 = s.noise_power;
    const Eigen::VectorXd taus = stream_taus(s.led, n_users + 1);
    const Eigen::VectorXd eps = stream_eps(s.led, n_users + 1);
    const auto stream_of = [with_common](int cov) { return with_common ? cov : cov + 1; };
    Eigen::VectorXd eps_by_cov(n_streams);
    for (int i = 0; i < n_streams; ++i) eps_by_cov(i) = eps(stream_of(i));

    const double cap = theta_cap(s, ch);
    const double theta_max = std::min(1.0, cap);
    if (theta_max <= theta_min)
        throw InfeasibleError("build_subproblem: harvesting cap leaves no admissible theta");
    const double headroom = optical_headroom(s.led, n_leds);
    if (!(headroom > 0.0))
        throw InfeasibleError(
            "build_subproblem: zero drive headroom admits only the all-off beamformer");
    const double bound2 = headroom * headroom;
    const double p_total = s.transmit_power_budget;
    if (!(p_total > 0.0))
        throw ValidationError("build_subproblem: transmit power budget must be positive");

    ConicProgram prog;
    const VarIndex var_t = prog.add_scalar("t");
    const VarIndex var_theta = prog.add_scalar("theta");
    std::vector<VarIndex> var_c, var_vc, var_vp;
    if (with_common) {
        for (int k = 1; k <= n_users; ++k) var_c.push_back(prog.add_scalar("c_" + std::to_string(k)));
        for (int k = 1; k <= n_users; ++k)
            var_vc.push_back(prog.add_scalar("v_c_" + std::to_string(k)));
        for (int k = 1; k <= n_users; ++k)
            var_vp.push_back(prog.add_scalar("v_p_" + std::to_string(k)));
    } else if (scheme.kind == Scheme::sdma) {
        for (int k = 1; k <= n_users; ++k)
            var_vp.push_back(prog.add_scalar("v_p_" + std::to_string(k)));
    } else {
        for (int i = 1; i <= n_users; ++i) var_vp.push_back(prog.add_scalar("v_" + std::to_string(i)));
    }
    for (int i = 0; i < n_streams; ++i)
        prog.add_psd_block("P_" + std::to_string(stream_of(i)), n_leds);
    const std::vector<PsdBlock>& blocks = prog.psd_blocks;

    // Rate cone: ln(num / num_m) >= ln2 * tangent(den) - ln(num_m) + 2 ln2 * v,
    // i.e. the bits-domain bound v <= (log2(num) - tangent)/2 with the signal
    // log kept exact and everything normalized by the numerator's value at
    // the expansion point so the argument starts at 1.
    const auto add_rate_cone = [&](int user_row, const std::vector<int>& num_covs,
                                   const std::vector<int>& den_covs, VarIndex var_v,
                                   std::string tag) {
        const Eigen::VectorXd h = ch.user_row(user_row);
        const Eigen::MatrixXd hh = h * h.transpose();
        double num_m = kTwoPi * sigma2;
        for (int i : num_covs)
            num_m += taus(stream_of(i)) * quad_form(h, point.covariances[static_cast<std::size_t>(i)]);
        LogConstraint cone;
        cone.tag = std::move(tag);
        cone.arg.constant = kTwoPi * sigma2 / num_m;
        for (int i : num_covs)
            add_trace_term(cone.arg, blocks[static_cast<std::size_t>(i)], hh,
                           taus(stream_of(i)) / num_m);
        const MatrixAffine tangent =
            tangent_interference(point.covariances, h, den_covs, eps_by_cov, sigma2);
        cone.level.constant = kLn2 * tangent.constant - std::log(num_m);
        for (int j : den_covs)
            add_trace_term(cone.level, blocks[static_cast<std::size_t>(j)],
                           tangent.coeffs[static_cast<std::size_t>(j)], kLn2);
        cone.level.add(var_v, 2.0 * kLn2);
        prog.logs.push_back(std::move(cone));
    };

    // Split cone: tangent of (theta + v)^2 / 4 minus the share it must cover,
    // against the exact (theta - v)^2 / 4, so 2 u w >= |z|^2 with w = 1/2
    // recovers theta * v >= share at any rank-one optimum.
    const auto add_split_cone = [&](double v_m, VarIndex var_v, AffineExpr share,
                                    std::string tag) {
        const double g = 0.5 * (point.theta + v_m);
        RotatedSocConstraint cone;
        cone.tag = std::move(tag);
        cone.u = std::move(share);
        cone.u.constant -= g * g;
        cone.u.add(var_theta, g).add(var_v, g);
        cone.w.constant = 0.5;
        AffineExpr z;
        z.add(var_theta, 0.5).add(var_v, -0.5);
        cone.z.push_back(std::move(z));
        prog.rsoc.push_back(std::move(cone));
    };

    if (with_common) {
        std::vector<int> all_covs, private_covs;
        for (int i = 0; i <= n_users; ++i) all_covs.push_back(i);
        for (int j = 1; j <= n_users; ++j) private_covs.push_back(j);
        for (int k = 1; k <= n_users; ++k) {
            add_rate_cone(k - 1, all_covs, private_covs, var_vc[static_cast<std::size_t>(k - 1)],
                          "rate_common:" + std::to_string(k));
            std::vector<int> others;
            for (int j = 1; j <= n_users; ++j)
                if (j != k) others.push_back(j);
            add_rate_cone(k - 1, private_covs, others, var_vp[static_cast<std::size_t>(k - 1)],
                          "rate_private:" + std::to_string(k));

            AffineExpr common_pool;
            for (VarIndex c : var_c) common_pool.add(c, -1.0);
            add_split_cone(point.v_common(k - 1), var_vc[static_cast<std::size_t>(k - 1)],
                           std::move(common_pool), "split_common:" + std::to_string(k));
            AffineExpr private_share;
            private_share.add(var_t, -1.0).add(var_c[static_cast<std::size_t>(k - 1)], 1.0);
            add_split_cone(point.v_private(k - 1), var_vp[static_cast<std::size_t>(k - 1)],
                           std::move(private_share), "split_private:" + std::to_string(k));
        }
    } else if (scheme.kind == Scheme::sdma) {
        for (int k = 1; k <= n_users; ++k) {
            std::vector<int> all_covs, others;
            for (int i = 0; i < n_users; ++i) {
                all_covs.push_back(i);
                if (i != k - 1) others.push_back(i);
            }
            add_rate_cone(k - 1, all_covs, others, var_vp[static_cast<std::size_t>(k - 1)],
                          "rate_private:" + std::to_string(k));
            AffineExpr share;
            share.add(var_t, -1.0);
            add_split_cone(point.v_private(k - 1), var_vp[static_cast<std::size_t>(k - 1)],
                           std::move(share), "split_private:" + std::to_string(k));
        }
    } else {
        const std::vector<int> order = resolve_noma_order(scheme, ch);
        for (int layer = 0; layer < n_users; ++layer) {
            std::vector<int> num_covs, den_covs;
            for (int l = 0; l <= layer; ++l) num_covs.push_back(order[static_cast<std::size_t>(l)]);
            for (int l = 0; l < layer; ++l) den_covs.push_back(order[static_cast<std::size_t>(l)]);
            for (int pos = 0; pos <= layer; ++pos)
                add_rate_cone(order[static_cast<std::size_t>(pos)], num_covs, den_covs,
                              var_vp[static_cast<std::size_t>(layer)],
                              "noma_rate:" + std::to_string(layer + 1) + ":" +
                                  std::to_string(pos + 1));
            AffineExpr share;
            share.add(var_t, -1.0);
            add_split_cone(point.v_private(layer), var_vp[static_cast<std::size_t>(layer)],
                           std::move(share), "noma_split:" + std::to_string(layer + 1));
        }
    }

    const double amp2 = s.led.peak_amplitude * s.led.peak_amplitude;
    for (int n = 0; n < n_leds; ++n) {
        LinearConstraint lin;
        lin.tag = "optical:" + std::to_string(n + 1);
        lin.expr.constant = 1.0;
        for (int i = 0; i < n_streams; ++i)
            lin.expr.add(blocks[static_cast<std::size_t>(i)].offset + svec_index(n, n, n_leds),
                         -amp2 / bound2);
        prog.linear.push_back(std::move(lin));
    }
    {
        LinearConstraint lin;
        lin.tag = "power";
        lin.expr.constant = 1.0;
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n_leds, n_leds);
        for (int i = 0; i < n_streams; ++i)
            add_trace_term(lin.expr, blocks[static_cast<std::size_t>(i)], eye,
                           -eps(stream_of(i)) / p_total);
        prog.linear.push_back(std::move(lin));
    }
    {
        LinearConstraint lin;
        lin.tag = "theta_min";
        lin.expr.constant = -theta_min;
        lin.expr.add(var_theta, 1.0);
        prog.linear.push_back(std::move(lin));
    }
    {
        LinearConstraint lin;
        lin.tag = "theta_max";
        lin.expr.constant = theta_max;
        lin.expr.add(var_theta, -1.0);
        prog.linear.push_back(std::move(lin));
    }
    if (with_common) {
        for (int k = 1; k <= n_users; ++k) {
            LinearConstraint lin;
            lin.tag = "c_nonneg:" + std::to_string(k);
            lin.expr.add(var_c[static_cast<std::size_t>(k - 1)], 1.0);
            prog.linear.push_back(std::move(lin));
        }
    }

    prog.objective.add(var_t, 1.0);
    if (rho != 0.0) {
        for (int i = 0; i < n_streams; ++i) {
            const Eigen::VectorXd& xi = point.directions[static_cast<std::size_t>(i)];
            const Eigen::MatrixXd penalty =
                rho * (Eigen::MatrixXd::Identity(n_leds, n_leds) - xi * xi.transpose());
            add_trace_term(prog.objective, blocks[static_cast<std::size_t>(i)], penalty);
        }
    }

    // Start at the expansion point itself, with each covariance ridged just
    // enough to sit strictly inside the semidefinite cone; the scalar slacks
    // the point carries are preserved untouched.
    const double tr_typical = p_total / (eps_by_cov.mean() * n_streams * n_leds);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(prog.n_vars());
    prog.scales = Eigen::VectorXd::Ones(prog.n_vars());
    x[var_t] = point.t;
    x[var_theta] = point.theta;
    for (int k = 0; k < n_users; ++k) {
        if (with_common) {
            x[var_c[static_cast<std::size_t>(k)]] = point.common_shares(k);
            x[var_vc[static_cast<std::size_t>(k)]] = point.v_common(k);
        }
        x[var_vp[static_cast<std::size_t>(k)]] = point.v_private(k);
    }
    for (int i = 0; i < n_streams; ++i) {
        const Eigen::MatrixXd& P = point.covariances[static_cast<std::size_t>(i)];
        const double trace = P.trace();
        const double ridge = 1e-7 * std::max(trace, 0.0) / n_leds + 1e-10 * tr_typical;
        const Eigen::MatrixXd started =
            P + ridge * Eigen::MatrixXd::Identity(n_leds, n_leds);
        x.segment(blocks[static_cast<std::size_t>(i)].offset,
                  blocks[static_cast<std::size_t>(i)].svec_size()) = svec(started);
        prog.scales
            .segment(blocks[static_cast<std::size_t>(i)].offset,
                     blocks[static_cast<std::size_t>(i)].svec_size())
            .setConstant(std::max(trace / n_leds, 1e-3 * tr_typical));
    }
    prog.start = std::move(x);
    return prog;
}

} // namespace slipt
