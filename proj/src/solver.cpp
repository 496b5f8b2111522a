// SPDX-License-Identifier: Apache-2.0
#include "slipt/solver.hpp"

#include "slipt/energy.hpp"
#include "slipt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace slipt {

namespace {

void validate_options(const SolverOptions& opts) {
    if (!(opts.convergence_tol > 0.0))
        throw ValidationError("solver: convergence_tol must be positive");
    if (!(opts.penalty_rho < 0.0))
        throw ValidationError("solver: penalty_rho must be negative");
    if (!(opts.penalty_growth >= 1.0))
        throw ValidationError("solver: penalty_growth must be at least 1");
    if (opts.max_penalty_rounds < 0)
        throw ValidationError("solver: max_penalty_rounds must be nonnegative");
    if (opts.max_iters < 1) throw ValidationError("solver: max_iters must be at least 1");
    if (!(opts.theta_min > 0.0)) throw ValidationError("solver: theta_min must be positive");
    if (!(opts.rank_tol > 0.0)) throw ValidationError("solver: rank_tol must be positive");
}

/// Reads the next iterate back out of a solved subproblem.
LinearizationPoint extract_point(const ConicProgram& prog, const Eigen::VectorXd& x,
                                 Scheme kind, int n_users) {
    LinearizationPoint next;
    next.t = x[prog.find_scalar("t")];
    next.theta = x[prog.find_scalar("theta")];
    next.v_private.resize(n_users);
    if (kind == Scheme::rsma) {
        next.common_shares.resize(n_users);
        next.v_common.resize(n_users);
    }
    for (int k = 1; k <= n_users; ++k) {
        switch (kind) {
        case Scheme::rsma:
            next.common_shares(k - 1) = x[prog.find_scalar("c_" + std::to_string(k))];
            next.v_common(k - 1) = x[prog.find_scalar("v_c_" + std::to_string(k))];
            next.v_private(k - 1) = x[prog.find_scalar("v_p_" + std::to_string(k))];
            break;
        case Scheme::sdma:
            next.v_private(k - 1) = x[prog.find_scalar("v_p_" + std::to_string(k))];
            break;
        case Scheme::noma:
            next.v_private(k - 1) = x[prog.find_scalar("v_" + std::to_string(k))];
            break;
        }
    }
    for (const auto& block : prog.psd_blocks) {
        Eigen::MatrixXd P = smat(x.segment(block.offset, block.svec_size()), block.dim);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
        next.covariances.push_back(std::move(P));
        next.directions.push_back(es.eigenvectors().col(block.dim - 1));
    }
    return next;
}

} // namespace

const char* to_string(SolveOutcome outcome) {
    switch (outcome) {
    case SolveOutcome::converged: return "converged";
    case SolveOutcome::iteration_limit: return "iteration_limit";
    case SolveOutcome::rank_failure: return "rank_failure";
    case SolveOutcome::backend_failure: return "backend_failure";
    }
    return "unknown";
}

LinearizationPoint initialize(const Scenario& s, const ChannelMatrix& ch,
                              const SchemeConfig& scheme, std::uint64_t seed, double theta_min) {
    (void)seed; // the construction below is deterministic on its own
    const int n_users = ch.n_users();
    const int n_leds = ch.n_leds();
    if (n_users < 1) throw ValidationError("initialize: need at least one user");
    if (n_users != s.n_users() || n_leds != s.n_leds())
        throw ValidationError("initialize: channel does not match the scenario");
    if (!(theta_min > 0.0)) throw ValidationError("initialize: theta_min must be positive");
    const bool with_common = scheme.kind == Scheme::rsma;

    const Eigen::VectorXd taus = stream_taus(s.led, n_users + 1);
    const Eigen::VectorXd eps = stream_eps(s.led, n_users + 1);

    // Matched-filter direction profile on a unit power budget, the common
    // beam along the dominant direction of the pooled channel energy and
    // carrying most of the power so its stream stays decodable everywhere.
    Eigen::MatrixXd beams = Eigen::MatrixXd::Zero(n_leds, n_users + 1);
    if (with_common) {
        Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(n_leds, n_leds);
        for (int k = 0; k < n_users; ++k) pooled += ch.grams[static_cast<std::size_t>(k)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pooled);
        Eigen::VectorXd dir = es.eigenvectors().col(n_leds - 1);
        double align = 0.0;
        for (int k = 0; k < n_users; ++k) align += ch.user_row(k).dot(dir);
        if (align < 0.0) dir = -dir;
        beams.col(0) = std::sqrt(0.7 / eps(0)) * dir;
    }
    // A start whose exact per-user rate bounds are positive can never settle
    // on the degenerate fixed point that collapses the time split: the first
    // subproblem already reaches a positive objective at the start itself,
    // and the ascent is monotone from there. Matched filters alone do not
    // deliver that, because the interference weight 2*pi*eps exceeds the
    // signal weight tau, so each scheme gets its crosstalk suppressed in the
    // way its own decoder allows.
    const double private_pool = with_common ? 0.3 : 1.0;
    Eigen::VectorXd weights = Eigen::VectorXd::Constant(n_users, 1.0 / n_users);
    if (scheme.kind == Scheme::noma && n_users > 1) {
        // Successive decoding forbids nulling: a stream must stay visible to
        // every earlier-positioned decoder. Keep the matched directions and
        // tilt the powers up the decoding chain instead, so each stream
        // clears its not-yet-cancelled interference at every decoder with a
        // factor-two margin; the condition is scale-invariant, so the drive
        // scaling below preserves it.
        constexpr double two_pi = 2.0 * std::numbers::pi;
        const std::vector<int> order = resolve_noma_order(scheme, ch);
        Eigen::MatrixXd gain(n_users, n_users);
        for (int u = 0; u < n_users; ++u)
            for (int i = 0; i < n_users; ++i) {
                const double g = ch.user_row(u).dot(ch.user_row(i).normalized());
                gain(u, i) = g * g;
            }
        Eigen::VectorXd q = Eigen::VectorXd::Zero(n_users);
        q(order[0]) = 1.0;
        bool tilted = true;
        for (int l = 1; l < n_users && tilted; ++l) {
            const int user_l = order[static_cast<std::size_t>(l)];
            double need = 0.0;
            for (int pos = 0; pos <= l; ++pos) {
                const int u = order[static_cast<std::size_t>(pos)];
                if (!(gain(u, user_l) > 0.0)) {
                    tilted = false;
                    break;
                }
                double interference = 0.0;
                for (int i = 0; i < l; ++i) {
                    const int ui = order[static_cast<std::size_t>(i)];
                    interference += std::max(0.0, two_pi * eps(ui + 1) - taus(ui + 1)) * q(ui) *
                                    gain(u, ui);
                }
                need = std::max(need, 2.0 * interference / (taus(user_l + 1) * gain(u, user_l)));
            }
            q(user_l) = std::max(need, 1e-6 * q.sum());
        }
        if (tilted) weights = q / q.sum();
    }
    for (int k = 1; k <= n_users; ++k) {
        const Eigen::VectorXd h = ch.user_row(k - 1);
        if (!(h.norm() > 0.0))
            throw ValidationError("initialize: user " + std::to_string(k) + " has a dark channel");
        Eigen::VectorXd dir = h.normalized();
        if (scheme.kind != Scheme::noma && n_users > 1) {
            // Interference-as-noise decoding (the private side of the
            // rate-splitting scheme included: the common stream enters no
            // private-rate bound) admits outright nulling. Project each
            // channel off the span of the others, keeping the matched filter
            // only when they are near parallel.
            Eigen::MatrixXd others(n_leds, n_users - 1);
            int col = 0;
            for (int j = 1; j <= n_users; ++j)
                if (j != k) others.col(col++) = ch.user_row(j - 1);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(others, Eigen::ComputeThinU);
            Eigen::VectorXd zf = h;
            for (int r = 0; r < svd.singularValues().size(); ++r) {
                if (svd.singularValues()(r) <= 1e-10 * svd.singularValues()(0)) break;
                const Eigen::VectorXd u = svd.matrixU().col(r);
                zf -= u.dot(zf) * u;
            }
            if (zf.norm() > 1e-8 * h.norm()) dir = zf.normalized();
        }
        beams.col(k) = std::sqrt(private_pool * weights(k - 1) / eps(k)) * dir;
    }

    // One uniform scale brings every transmit-side bound to at least 10%
    // slack: the per-LED absolute and signed drive sums and the squared
    // drive bound scale linearly or quadratically, the power budget
    // quadratically, so the tightest closed-form scale wins.
    const double amp = s.led.peak_amplitude;
    const double headroom = optical_headroom(s.led, n_leds);
    if (!(headroom > 0.0))
        throw InfeasibleError("initialize: zero drive headroom admits only the all-off beamformer");
    const double bias = dc_bias(s.led, n_leds);
    double amp_load = 0.0;
    double signed_load = 0.0;
    double square_load = 0.0;
    for (int n = 0; n < n_leds; ++n) {
        double l1 = 0.0;
        double l2 = 0.0;
        double sg = 0.0;
        for (int i = 0; i <= n_users; ++i) {
            l1 += amp * std::abs(beams(n, i));
            l2 += amp * amp * beams(n, i) * beams(n, i);
            sg += amp * beams(n, i);
        }
        amp_load = std::max(amp_load, l1);
        square_load = std::max(square_load, l2);
        signed_load = std::max(signed_load, std::abs(sg));
    }
    double power_load = 0.0;
    for (int i = 0; i <= n_users; ++i) power_load += eps(i) * beams.col(i).squaredNorm();
    double scale = std::sqrt(0.9 * s.transmit_power_budget / power_load);
    if (amp_load > 0.0) scale = std::min(scale, 0.9 * bias / amp_load);
    if (signed_load > 0.0) scale = std::min(scale, 0.9 * headroom / signed_load);
    if (square_load > 0.0)
        scale = std::min(scale, std::sqrt(0.9 * headroom * headroom / square_load));
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw InfeasibleError("initialize: no scale admits the drive bounds");
    beams *= scale;

    BeamformerSet set{beams, bias};
    if (with_common) {
        // Halve the private side until the common stream clears every user;
        // interference vanishes in the limit, so this terminates.
        for (int rounds = 0; rounds < 64; ++rounds) {
            double weakest = std::numeric_limits<double>::infinity();
            for (int k = 1; k <= n_users; ++k)
                weakest = std::min(weakest, common_rate_lb(ch.user_row(k - 1), set, taus, eps,
                                                           s.noise_power));
            if (weakest > 0.02) break;
            set.beams.rightCols(n_users) *= 0.5;
        }
    }

    const double cap = theta_cap(s, ch);
    const double theta_hi = std::min(1.0, cap);
    if (theta_hi <= theta_min)
        throw InfeasibleError("initialize: harvesting cap leaves no admissible theta");
    double theta0 = 0.9 * theta_hi;
    if (theta0 <= theta_min) theta0 = theta_min + 0.9 * (theta_hi - theta_min);

    const auto margined = [](double rate) { return rate - std::max(1e-3, 0.05 * std::abs(rate)); };
    LinearizationPoint point;
    point.theta = theta0;
    const int n_streams = with_common ? n_users + 1 : n_users;
    for (int i = 0; i < n_streams; ++i) {
        const Eigen::VectorXd p = set.beams.col(with_common ? i : i + 1);
        point.covariances.push_back(p * p.transpose());
        point.directions.push_back(p.normalized());
    }
    point.v_private.resize(n_users);
    if (scheme.kind == Scheme::noma) {
        const std::vector<int> order = resolve_noma_order(scheme, ch);
        for (int layer = 0; layer < n_users; ++layer)
            point.v_private(layer) =
                margined(noma_layer_rate_lb(ch, set, taus, eps, s.noise_power, order, layer));
    } else {
        for (int k = 1; k <= n_users; ++k)
            point.v_private(k - 1) =
                margined(private_rate_lb(ch.user_row(k - 1), set, taus, eps, s.noise_power, k));
    }
    if (with_common) {
        point.v_common.resize(n_users);
        for (int k = 1; k <= n_users; ++k)
            point.v_common(k - 1) =
                margined(common_rate_lb(ch.user_row(k - 1), set, taus, eps, s.noise_power));
        const double pool = 0.8 * point.theta * point.v_common.minCoeff();
        if (!(pool > 0.0))
            throw SolveError("initialize: the common stream stayed undecodable");
        point.common_shares = Eigen::VectorXd::Constant(n_users, pool / n_users);
    }
    double reachable = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_users; ++k) {
        const double share = with_common ? point.common_shares(k) : 0.0;
        reachable = std::min(reachable, share + point.theta * point.v_private(k));
    }
    point.t = reachable - std::max(1e-3, 0.05 * std::abs(reachable));
    return point;
}

BeamformerSet recover_beamformers(const std::vector<Eigen::MatrixXd>& covariances,
                                  const Scenario& s, bool with_common, double rank_tol) {
    if (covariances.empty()) throw ValidationError("recover_beamformers: no covariances");
    if (!(rank_tol > 0.0)) throw ValidationError("recover_beamformers: rank_tol must be positive");
    const int n_streams = static_cast<int>(covariances.size());
    const int n_users = with_common ? n_streams - 1 : n_streams;
    const int n_leds = static_cast<int>(covariances.front().rows());
    double total_trace = 0.0;
    for (const auto& P : covariances) total_trace += P.trace();
    const double trace_floor = 1e-12 * std::max(total_trace / n_streams, 1e-300);

    Eigen::MatrixXd beams = Eigen::MatrixXd::Zero(n_leds, n_users + 1);
    for (int i = 0; i < n_streams; ++i) {
        const Eigen::MatrixXd& P = covariances[static_cast<std::size_t>(i)];
        if (P.rows() != n_leds || P.cols() != n_leds)
            throw ValidationError("recover_beamformers: covariance size mismatch");
        const int stream = with_common ? i : i + 1;
        // A stream carrying a vanishing share of the power is simply off;
        // its rank structure is noise and must not fail the recovery.
        if (P.trace() <= 1e-8 * std::max(total_trace, 1e-300)) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
        const double lead = es.eigenvalues().maxCoeff();
        const double residual = (P.trace() - lead) / std::max(P.trace(), trace_floor);
        if (residual > rank_tol)
            throw SolveError("recover_beamformers: stream " + std::to_string(stream) +
                             " is not rank one (relative residual " + std::to_string(residual) +
                             ")");
        beams.col(stream) = std::sqrt(std::max(lead, 0.0)) * es.eigenvectors().col(n_leds - 1);
    }

    // The lifted constraints only see squares, so each stream's sign is
    // free. The quadratic drive bound of the relaxation is also looser than
    // the signed per-LED bound it stands for, by up to a factor of
    // sqrt(n_streams) when several streams load the same LED, so recovered
    // beams can overshoot the original bound even at zero penalty residual.
    // Choose the sign combination with the smallest one-sided drive
    // excursion (ties broken by the two-sided one), then scale the beams
    // back onto the bound if the signs alone could not restore it.
    std::vector<int> cols;
    for (int i = 0; i < n_streams; ++i) cols.push_back(with_common ? i : i + 1);
    const int n_sign = static_cast<int>(cols.size());
    const double amp = s.led.peak_amplitude;
    const double headroom = optical_headroom(s.led, n_leds);
    const auto excursion = [&](const std::vector<double>& sign) {
        double positive = 0.0;
        double absolute = 0.0;
        for (int n = 0; n < n_leds; ++n) {
            double sum = 0.0;
            for (std::size_t j = 0; j < cols.size(); ++j)
                sum += sign[j] * amp * beams(n, cols[static_cast<std::size_t>(j)]);
            positive = std::max(positive, sum);
            absolute = std::max(absolute, std::abs(sum));
        }
        return std::pair{positive, absolute};
    };
    std::vector<double> best(cols.size(), 1.0);
    if (n_sign <= 16) {
        auto best_cost = excursion(best);
        std::vector<double> trial(cols.size(), 1.0);
        for (unsigned mask = 1; mask < (1u << n_sign); ++mask) {
            for (int b = 0; b < n_sign; ++b)
                trial[static_cast<std::size_t>(b)] = (mask >> b) & 1u ? -1.0 : 1.0;
            const auto cost = excursion(trial);
            if (cost < best_cost) {
                best_cost = cost;
                best = trial;
            }
        }
    } else {
        // Too many streams to enumerate: place them largest first, each with
        // the sign that keeps the running excursion smallest.
        std::vector<std::size_t> by_norm(cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) by_norm[j] = j;
        std::stable_sort(by_norm.begin(), by_norm.end(), [&](std::size_t a, std::size_t b) {
            return beams.col(cols[a]).norm() > beams.col(cols[b]).norm();
        });
        Eigen::VectorXd running = Eigen::VectorXd::Zero(n_leds);
        for (std::size_t j : by_norm) {
            const Eigen::VectorXd col = beams.col(cols[j]);
            const double plus = (running + col).cwiseAbs().maxCoeff();
            const double minus = (running - col).cwiseAbs().maxCoeff();
            best[j] = plus <= minus ? 1.0 : -1.0;
            running += best[j] * col;
        }
    }
    for (std::size_t j = 0; j < cols.size(); ++j)
        beams.col(cols[j]) *= best[j];

    // Shrinking the whole beam set keeps every other transmit bound and
    // leaves the harvesting constraint untouched (beams are off during the
    // harvesting phase), so this projection only costs rate.
    double positive = 0.0;
    for (int n = 0; n < n_leds; ++n)
        positive = std::max(positive, amp * beams.row(n).sum());
    if (positive > headroom && headroom > 0.0) beams *= headroom / positive;

    return BeamformerSet{std::move(beams), dc_bias(s.led, n_leds)};
}

Solution solve_mmf(const Scenario& s, const ChannelMatrix& ch, const SchemeConfig& scheme,
                   const SolverOptions& opts) {
    validate_options(opts);
    validate_scenario(s);
    const int n_users = ch.n_users();
    if (scheme.kind == Scheme::noma && !scheme.noma_order.empty())
        validate_noma_order(scheme.noma_order, n_users);
    const bool with_common = scheme.kind == Scheme::rsma;

    Solution sol;
    sol.scheme = scheme.kind;

    LinearizationPoint point = initialize(s, ch, scheme, opts.seed, opts.theta_min);
    const BarrierBackend backend(opts.backend);

    double rho = opts.penalty_rho;
    int growth_rounds = 0;
    double prev_obj = 0.0;
    bool have_prev = false;
    Eigen::VectorXd warm_x;
    double warm_hint = 0.0;
    bool converged = false;

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        ConicProgram prog = build_subproblem(point, s, ch, scheme, rho, opts.theta_min);
        const bool warm = warm_x.size() == prog.start.size();
        if (warm) {
            prog.start = warm_x;
            prog.path_hint = warm_hint;
        }
        SolveResult res = backend.solve(prog);
        if (res.status != SolveStatus::optimal && warm) {
            // Retry with the warm point but a full path walk; the point is
            // feasible no matter how the tangents moved, while a high path
            // restart can land it in badly conditioned territory.
            ConicProgram fresh = build_subproblem(point, s, ch, scheme, rho, opts.theta_min);
            fresh.start = warm_x;
            res = backend.solve(fresh);
        }
        if (res.status != SolveStatus::optimal) {
            sol.outcome = SolveOutcome::backend_failure;
            sol.message = std::string("subproblem backend: ") + to_string(res.status) +
                          (res.message.empty() ? "" : " (" + res.message + ")");
            return sol;
        }

        point = extract_point(prog, res.x, scheme.kind, n_users);
        warm_x = res.x;
        // Skip the early path stages next time, but never restart so deep
        // that re-centering must fight the nearly active constraints.
        warm_hint = std::min(res.path_final / 400.0, 1e4);

        const double residual = penalty_residual(point.covariances);
        double total_trace = 0.0;
        for (const auto& P : point.covariances) total_trace += P.trace();
        sol.trace.push_back({iter, point.t, res.objective, rho, residual, point.theta,
                             res.newton_steps});

        const bool settled = have_prev && std::abs(res.objective - prev_obj) < opts.convergence_tol;
        prev_obj = res.objective;
        have_prev = true;
        if (!settled) continue;

        if (residual <= opts.rank_tol * std::max(total_trace, 1e-300)) {
            converged = true;
            break;
        }
        if (growth_rounds < opts.max_penalty_rounds) {
            // Same feasible set, stronger pull toward rank one; the warm
            // interior point stays valid.
            rho *= opts.penalty_growth;
            ++growth_rounds;
            have_prev = false;
            continue;
        }
        sol.outcome = SolveOutcome::rank_failure;
        sol.penalty_residual = residual;
        sol.message = "penalty rounds exhausted with relative residual " +
                      std::to_string(residual / std::max(total_trace, 1e-300));
        return sol;
    }

    sol.outcome = converged ? SolveOutcome::converged : SolveOutcome::iteration_limit;
    sol.penalty_residual = penalty_residual(point.covariances);
    try {
        sol.beamformers = recover_beamformers(point.covariances, s, with_common, opts.rank_tol);
    } catch (const SolveError& err) {
        if (converged) sol.outcome = SolveOutcome::rank_failure;
        sol.message = err.what();
        return sol;
    }

    // Replay the recovered beams through the exact formulas so the reported
    // value is what the physical solution achieves, not the surrogate.
    const Eigen::VectorXd taus = stream_taus(s.led, n_users + 1);
    const Eigen::VectorXd eps = stream_eps(s.led, n_users + 1);
    RateAllocation alloc;
    alloc.theta = point.theta;
    alloc.common_shares = Eigen::VectorXd::Zero(n_users);
    alloc.private_ts = Eigen::VectorXd::Zero(n_users);
    alloc.common_ts = Eigen::VectorXd::Zero(n_users);
    if (scheme.kind == Scheme::noma) {
        const std::vector<int> order = resolve_noma_order(scheme, ch);
        for (int layer = 0; layer < n_users; ++layer) {
            const double rate = noma_layer_rate_lb(ch, sol.beamformers, taus, eps, s.noise_power,
                                                   order, layer);
            alloc.private_ts(order[static_cast<std::size_t>(layer)]) =
                std::max(0.0, point.theta * rate);
        }
    } else {
        for (int k = 1; k <= n_users; ++k) {
            const double rate = private_rate_lb(ch.user_row(k - 1), sol.beamformers, taus, eps,
                                                s.noise_power, k);
            alloc.private_ts(k - 1) = std::max(0.0, point.theta * rate);
            if (with_common)
                alloc.common_ts(k - 1) =
                    std::max(0.0, point.theta * common_rate_lb(ch.user_row(k - 1), sol.beamformers,
                                                               taus, eps, s.noise_power));
        }
    }
    if (with_common) {
        // The solved shares sit on the surrogate bound; shrink them onto the
        // replayed one if the exact rates came out a hair tighter.
        Eigen::VectorXd shares = point.common_shares.cwiseMax(0.0);
        const double pool = alloc.common_ts.minCoeff();
        const double total = shares.sum();
        if (total > pool) shares *= pool / std::max(total, 1e-300);
        alloc.common_shares = shares;
    }
    sol.allocation = alloc;
    sol.mmf_value = mmf_rate(alloc);
    sol.validation = check_feasible(sol.beamformers, s, 1e-6);
    sol.ts_harvest.resize(n_users);
    bool energy_ok = true;
    for (int k = 0; k < n_users; ++k) {
        sol.ts_harvest(k) = ts_harvested(point.theta, ch.user_row(k), s.panel, s.led);
        energy_ok = energy_ok &&
                    sol.ts_harvest(k) >=
                        s.energy_threshold - 1e-6 * std::max(1.0, s.energy_threshold);
    }
    sol.energy_satisfied = energy_ok;
    return sol;
}

Solution solve_mmf(const Scenario& s, const SchemeConfig& scheme, const SolverOptions& opts) {
    return solve_mmf(s, channel_matrix(s), scheme, opts);
}

} // namespace slipt
