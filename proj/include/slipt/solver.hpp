// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slipt/channel.hpp"
#include "slipt/conic.hpp"
#include "slipt/rates.hpp"
#include "slipt/scenario.hpp"
#include "slipt/schemes.hpp"
#include "slipt/signal_model.hpp"
#include "slipt/subproblem.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace slipt {

/// Outer-loop controls. The penalty weight starts at penalty_rho and is
/// multiplied by penalty_growth (up to max_penalty_rounds times) whenever the
/// loop settles on covariances that are not yet rank one. A gentle start is
/// deliberate: rotating a rank-one covariance by an angle costs the penalty
/// a quadratic bite, so a heavy weight throttles how far the beam directions
/// can move per iteration and multiplies the iteration count without buying
/// a lower residual; the growth rounds supply the heavy hand only when the
/// covariances actually refuse to collapse.
struct SolverOptions {
    double convergence_tol = 1e-4; ///< |change of the penalized objective| to stop at
    double penalty_rho = -0.1;     ///< initial rank-one penalty weight, strictly negative
    double penalty_growth = 5.0;   ///< magnitude growth factor, >= 1
    int max_penalty_rounds = 4;
    int max_iters = 100;           ///< safety net on outer iterations
    double theta_min = 1e-6;       ///< closed stand-in for the open bound theta > 0
    double rank_tol = 1e-4;        ///< relative trace residual accepted at recovery
    std::uint64_t seed = 0;        ///< kept for interface stability; construction is deterministic
    /// Subproblem accuracy far beyond convergence_tol is wasted and leaves
    /// the iterate hugging the active constraints, which the next warm start
    /// then has to fight; 1e-8 is deep enough for a 1e-4 outer loop.
    BarrierBackend::Options backend{.gap_tol = 1e-8};
};

enum class SolveOutcome { converged, iteration_limit, rank_failure, backend_failure };

const char* to_string(SolveOutcome outcome);

/// One outer iteration: the subproblem's optimum split into the max-min value
/// t and the penalized objective actually maximized, plus rank bookkeeping.
struct IterationRecord {
    int iteration = 0;
    double t = 0.0;
    double penalized = 0.0;
    double rho = 0.0;
    double residual = 0.0;
    double theta = 0.0;
    int newton_steps = 0;
};

/// Final solve artifact. The allocation is a replay of the recovered beams
/// through the exact rate formulas, so mmf_value is the value the physical
/// beams actually achieve rather than the solver's surrogate.
struct Solution {
    SolveOutcome outcome = SolveOutcome::backend_failure;
    Scheme scheme = Scheme::rsma;
    BeamformerSet beamformers;
    RateAllocation allocation;
    double mmf_value = 0.0;
    std::vector<IterationRecord> trace;
    double penalty_residual = 0.0;
    ConstraintReport validation;
    Eigen::VectorXd ts_harvest;    ///< per-user harvest under the final time split
    bool energy_satisfied = false;
    std::string message;
};

/// Deterministic strictly-slack starting iterate: matched-filter beams (the
/// common stream along the dominant direction of the summed channel outer
/// products, carrying most of the power so it stays decodable), uniformly
/// scaled until the drive, range, and power bounds all hold with at least
/// 10% slack; theta at 90% of its cap and the rate surrogates at the exact
/// rates less a safety margin. Throws InfeasibleError when the harvesting
/// requirement admits no theta.
LinearizationPoint initialize(const Scenario& s, const ChannelMatrix& ch,
                              const SchemeConfig& scheme, std::uint64_t seed = 0,
                              double theta_min = 1e-6);

/// Principal eigen-pair extraction p_i = sqrt(lambda_max) u_i, with stream
/// signs then chosen to minimize the worst per-LED signed drive excursion
/// (the lifted program constrains squares, which a sign flip leaves
/// untouched). Throws SolveError naming the first stream whose relative
/// trace residual exceeds rank_tol.
BeamformerSet recover_beamformers(const std::vector<Eigen::MatrixXd>& covariances,
                                  const Scenario& s, bool with_common, double rank_tol);

/// Runs the full outer loop for one scheme: build the convex subproblem at
/// the current iterate, solve it with the barrier backend (warm-started from
/// the previous interior point), advance the iterate, and stop once the
/// penalized objective settles; grows the penalty if the settled covariances
/// are not rank one. On success the beams are recovered, replayed through
/// the exact rate and constraint validators, and reported with the trace.
Solution solve_mmf(const Scenario& s, const ChannelMatrix& ch, const SchemeConfig& scheme,
                   const SolverOptions& opts = {});
Solution solve_mmf(const Scenario& s, const SchemeConfig& scheme, const SolverOptions& opts = {});

} // namespace slipt
