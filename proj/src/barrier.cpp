// SPDX-License-Identifier: Apache-2.0
#include "slipt/conic.hpp"

#include "slipt/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace slipt {

namespace {

struct DenseExpr {
    Eigen::VectorXd a;
    double b = 0.0;

    double eval(const Eigen::VectorXd& x) const { return a.dot(x) + b; }
};

DenseExpr densify(const AffineExpr& expr, int n) {
    return DenseExpr{expr.dense(n), expr.constant};
}

struct RsocWork {
    DenseExpr u, w;
    std::vector<DenseExpr> z;
};

struct LogWork {
    DenseExpr s, lvl;
};

struct PsdWork {
    int offset = 0;
    int dim = 0;
};

/// Pre-densified constraint data; affine gradients are constant over a solve.
struct Workspace {
    int n = 0;
    std::vector<DenseExpr> lin;
    std::vector<RsocWork> rsocs;
    std::vector<LogWork> logs;
    std::vector<PsdWork> psds;
    double nu = 0.0;
};

Workspace build_workspace(const ConicProgram& prog) {
    Workspace ws;
    ws.n = prog.n_vars();
    for (const auto& con : prog.linear) ws.lin.push_back(densify(con.expr, ws.n));
    for (const auto& con : prog.rsoc) {
        RsocWork rw{densify(con.u, ws.n), densify(con.w, ws.n), {}};
        for (const auto& zi : con.z) rw.z.push_back(densify(zi, ws.n));
        ws.rsocs.push_back(std::move(rw));
    }
    for (const auto& con : prog.logs)
        ws.logs.push_back(LogWork{densify(con.arg, ws.n), densify(con.level, ws.n)});
    for (const auto& block : prog.psd_blocks) ws.psds.push_back(PsdWork{block.offset, block.dim});

    ws.nu = static_cast<double>(ws.lin.size()) + 2.0 * static_cast<double>(ws.rsocs.size()) +
            2.0 * static_cast<double>(ws.logs.size());
    for (const auto& p : ws.psds) ws.nu += static_cast<double>(p.dim);
    return ws;
}

/// Barrier value at x, or +inf when x is not strictly interior.
double barrier_value(const Workspace& ws, const Eigen::VectorXd& x) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double phi = 0.0;
    for (const auto& con : ws.lin) {
        const double g = con.eval(x);
        if (!(g > 0.0)) return inf;
        phi -= std::log(g);
    }
    for (const auto& con : ws.rsocs) {
        const double u = con.u.eval(x);
        const double w = con.w.eval(x);
        if (!(u > 0.0) || !(w > 0.0)) return inf;
        double q = 2.0 * u * w;
        for (const auto& zi : con.z) {
            const double z = zi.eval(x);
            q -= z * z;
        }
        if (!(q > 0.0)) return inf;
        phi -= std::log(q);
    }
    for (const auto& con : ws.logs) {
        const double s = con.s.eval(x);
        if (!(s > 0.0)) return inf;
        const double r = std::log(s) - con.lvl.eval(x);
        if (!(r > 0.0)) return inf;
        phi -= std::log(r) + std::log(s);
    }
    for (const auto& p : ws.psds) {
        const Eigen::MatrixXd P = smat(x.segment(p.offset, p.dim * (p.dim + 1) / 2), p.dim);
        Eigen::LLT<Eigen::MatrixXd> llt(P);
        if (llt.info() != Eigen::Success) return inf;
        const auto& L = llt.matrixLLT();
        for (int i = 0; i < p.dim; ++i) {
            if (!(L(i, i) > 0.0)) return inf;
            phi -= 2.0 * std::log(L(i, i));
        }
    }
    return std::isfinite(phi) ? phi : inf;
}

} // namespace

std::string diagnose_start(const ConicProgram& prog, const Eigen::VectorXd& x) {
    for (const auto& con : prog.linear)
        if (!(con.expr.eval(x) > 0.0)) return "linear[" + con.tag + "]";
    for (const auto& con : prog.rsoc) {
        const double u = con.u.eval(x);
        const double w = con.w.eval(x);
        double q = 2.0 * u * w;
        for (const auto& zi : con.z) {
            const double z = zi.eval(x);
            q -= z * z;
        }
        if (!(u > 0.0) || !(w > 0.0) || !(q > 0.0)) return "rsoc[" + con.tag + "]";
    }
    for (const auto& con : prog.logs) {
        const double s = con.arg.eval(x);
        if (!(s > 0.0) || !(std::log(s) - con.level.eval(x) > 0.0)) return "log[" + con.tag + "]";
    }
    for (const auto& block : prog.psd_blocks) {
        const Eigen::MatrixXd P = smat(x.segment(block.offset, block.svec_size()), block.dim);
        Eigen::LLT<Eigen::MatrixXd> llt(P);
        if (llt.info() != Eigen::Success) return "psd[" + block.name + "]";
    }
    return {};
}

namespace {

/// Accumulates barrier gradient and Hessian at a strictly interior x.
/// H receives rank updates on its lower triangle only.
void barrier_derivatives(const Workspace& ws, const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                         Eigen::MatrixXd& H) {
    auto rank_update = [&H](const Eigen::VectorXd& v, double alpha) {
        H.selfadjointView<Eigen::Lower>().rankUpdate(v, alpha);
    };

    for (const auto& con : ws.lin) {
        const double g = con.eval(x);
        grad -= con.a / g;
        rank_update(con.a, 1.0 / (g * g));
    }
    for (const auto& con : ws.rsocs) {
        const double u = con.u.eval(x);
        const double w = con.w.eval(x);
        double q = 2.0 * u * w;
        Eigen::VectorXd dq = 2.0 * w * con.u.a + 2.0 * u * con.w.a;
        for (const auto& zi : con.z) {
            const double z = zi.eval(x);
            q -= z * z;
            dq -= 2.0 * z * zi.a;
        }
        grad -= dq / q;
        rank_update(dq, 1.0 / (q * q));
        // -(1/q) * Hess(q): Hess(q) = 2(au aw' + aw au') - 2 sum az az'.
        rank_update(con.u.a + con.w.a, -2.0 / q);
        rank_update(con.u.a, 2.0 / q);
        rank_update(con.w.a, 2.0 / q);
        for (const auto& zi : con.z) rank_update(zi.a, 2.0 / q);
    }
    for (const auto& con : ws.logs) {
        const double s = con.s.eval(x);
        const double r = std::log(s) - con.lvl.eval(x);
        const Eigen::VectorXd dr = con.s.a / s - con.lvl.a;
        grad -= dr / r + con.s.a / s;
        rank_update(dr, 1.0 / (r * r));
        rank_update(con.s.a, (1.0 + 1.0 / r) / (s * s));
    }
    for (const auto& p : ws.psds) {
        const int m = p.dim * (p.dim + 1) / 2;
        const Eigen::MatrixXd P = smat(x.segment(p.offset, m), p.dim);
        Eigen::LLT<Eigen::MatrixXd> llt(P);
        const Eigen::MatrixXd Q = llt.solve(Eigen::MatrixXd::Identity(p.dim, p.dim));
        grad.segment(p.offset, m) -= svec(Q);

        // Symmetric-Kronecker Hessian of -ln det in svec coordinates.
        Eigen::MatrixXd Hb = Eigen::MatrixXd::Zero(m, m);
        int row = 0;
        for (int j = 0; j < p.dim; ++j)
            for (int i = 0; i <= j; ++i, ++row) {
                int col = 0;
                for (int l = 0; l < p.dim; ++l)
                    for (int k = 0; k <= l; ++k, ++col) {
                        if (col > row) continue;
                        double value;
                        if (i == j && k == l)
                            value = Q(i, k) * Q(i, k);
                        else if (i == j)
                            value = std::numbers::sqrt2 * Q(i, k) * Q(i, l);
                        else if (k == l)
                            value = std::numbers::sqrt2 * Q(i, k) * Q(j, k);
                        else
                            value = Q(i, k) * Q(j, l) + Q(i, l) * Q(j, k);
                        Hb(row, col) = value;
                    }
            }
        H.block(p.offset, p.offset, m, m).triangularView<Eigen::Lower>() += Hb;
    }
}

} // namespace

SolveResult BarrierBackend::solve(const ConicProgram& prog) const {
    SolveResult result;
    const int n = prog.n_vars();
    if (prog.start.size() != n) {
        result.status = SolveStatus::infeasible_start;
        result.message = "start point size mismatch";
        return result;
    }

    Eigen::VectorXd x = prog.start;
    if (!x.allFinite()) {
        result.status = SolveStatus::infeasible_start;
        result.message = "start point is not finite";
        return result;
    }
    if (const std::string bad = diagnose_start(prog, x); !bad.empty()) {
        result.status = SolveStatus::infeasible_start;
        result.message = "start violates " + bad;
        result.x = x;
        return result;
    }

    const Workspace ws = build_workspace(prog);
    const Eigen::VectorXd cvec = prog.objective.dense(n);

    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    if (prog.scales.size() == n)
        for (int i = 0; i < n; ++i) d[i] = std::max(std::abs(prog.scales[i]), 1e-300);

    double obj_scale = 0.0;
    for (int i = 0; i < n; ++i) obj_scale = std::max(obj_scale, std::abs(cvec[i]) * d[i]);
    if (obj_scale == 0.0) obj_scale = 1.0;
    const Eigen::VectorXd cs = cvec / obj_scale;

    int steps = 0;
    auto finish = [&](SolveStatus status, std::string message) {
        result.status = status;
        result.x = x;
        result.objective = prog.objective.eval(x);
        result.newton_steps = steps;
        result.message = std::move(message);
        return result;
    };

    if (ws.nu == 0.0) return finish(SolveStatus::optimal, "no constraints");

    double t_path = prog.path_hint > 0.0 ? std::max(1.0, prog.path_hint) : 1.0;
    result.path_final = t_path;

    Eigen::VectorXd grad(n);
    Eigen::MatrixXd H(n, n);

    while (true) {
        // Center at the current path parameter.
        double best_decrement = std::numeric_limits<double>::infinity();
        int stall = 0;
        for (;;) {
            if (steps >= opts_.max_newton_steps)
                return finish(SolveStatus::iteration_limit, "newton step budget exhausted");

            grad = -t_path * cs;
            H.setZero();
            barrier_derivatives(ws, x, grad, H);

            // Jacobi-style preconditioning with the builder's magnitude hints.
            Eigen::MatrixXd Hs = H.selfadjointView<Eigen::Lower>();
            Hs = d.asDiagonal() * Hs * d.asDiagonal();
            Eigen::VectorXd gs = d.cwiseProduct(grad);

            Eigen::VectorXd dxs;
            double decrement2 = -1.0;
            double reg = 0.0;
            for (int attempt = 0; attempt < 4; ++attempt) {
                Eigen::MatrixXd Hreg = Hs;
                if (reg > 0.0) Hreg.diagonal().array() += reg;
                Eigen::LDLT<Eigen::MatrixXd> ldlt(Hreg);
                if (ldlt.info() == Eigen::Success) {
                    dxs = ldlt.solve(-gs);
                    if (dxs.allFinite()) {
                        decrement2 = -gs.dot(dxs);
                        if (decrement2 >= 0.0) break;
                    }
                }
                const double base = std::max(Hs.diagonal().maxCoeff(), 1.0);
                reg = (reg == 0.0) ? 1e-12 * base : reg * 1e3;
            }
            if (decrement2 < 0.0)
                return finish(SolveStatus::numerical_failure, "newton system not solvable");
            if (0.5 * decrement2 <= opts_.center_tol) break;

            if (decrement2 < 0.5 * best_decrement) {
                best_decrement = decrement2;
                stall = 0;
            }

            const Eigen::VectorXd dx = d.cwiseProduct(dxs);
            double alpha = 1.0;
            bool accepted = false;
            bool progressed = false;
            if (decrement2 <= 0.0625) {
                // Quadratic-convergence region of a self-concordant barrier:
                // take the full Newton step, shrinking only if rounding ever
                // pushes the trial outside the cone interior.
                while (alpha >= 1e-16) {
                    const Eigen::VectorXd trial = x + alpha * dx;
                    if (std::isfinite(barrier_value(ws, trial))) {
                        x = trial;
                        accepted = true;
                        break;
                    }
                    alpha *= 0.5;
                }
            } else {
                const double f0 = -t_path * cs.dot(x) + barrier_value(ws, x);
                const double slope = grad.dot(dx); // = -decrement2
                const double noise = 1e-14 * std::max(1.0, std::abs(f0));
                while (alpha >= 1e-16) {
                    const Eigen::VectorXd trial = x + alpha * dx;
                    const double phi = barrier_value(ws, trial);
                    if (std::isfinite(phi)) {
                        const double f1 = -t_path * cs.dot(trial) + phi;
                        // Accept on sufficient decrease, or when the expected
                        // decrease is below what doubles can resolve in f.
                        if (f1 <= f0 + 0.25 * alpha * slope || 0.25 * alpha * decrement2 < noise) {
                            progressed = f0 - f1 > noise;
                            x = trial;
                            accepted = true;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
            }

            // Progress guard: damped steps may hold the decrement roughly flat
            // for a long stretch while the value still falls, so progress is
            // either a halved decrement or a resolvable decrease. A run of
            // steps with neither means rounding has won; a point already in
            // the quadratic region is then centered for every practical
            // purpose (it shifts the gap by O(sqrt(nu) * decrement / path)),
            // while anything farther out is a genuine failure.
            if (progressed) {
                stall = 0;
            } else if (++stall >= 40) {
                if (decrement2 <= 0.0625) break;
                return finish(SolveStatus::numerical_failure,
                              "centering stalled (path " + std::to_string(t_path) +
                                  ", decrement^2 " + std::to_string(decrement2) + ")");
            }
            ++steps;
            if (!accepted) {
                // Fully blocked line search at a small decrement: centered enough.
                if (0.5 * decrement2 <= 1e4 * opts_.center_tol) break;
                return finish(SolveStatus::numerical_failure, "line search failed");
            }
        }

        result.path_final = t_path;
        const double gap = ws.nu / t_path;
        if (gap <= opts_.gap_tol * (1.0 + std::abs(cs.dot(x)))) break;
        t_path *= opts_.mu;
    }

    return finish(SolveStatus::optimal, "");
}

} // namespace slipt
