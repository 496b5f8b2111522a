// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace slipt {

/// Index into the flattened variable vector of a ConicProgram.
using VarIndex = int;

/// Symmetric matrix variable stored in scaled-vector (svec) coordinates:
/// column-major upper triangle, off-diagonal entries multiplied by sqrt(2)
/// so that <A, B> = svec(A) . svec(B). The block occupies svec_size()
/// consecutive entries of the variable vector starting at `offset`.
struct PsdBlock {
    std::string name;
    int dim = 0;
    int offset = 0;

    int svec_size() const { return dim * (dim + 1) / 2; }
};

/// Sparse affine functional a'x + b over the program variables.
struct AffineExpr {
    std::vector<std::pair<VarIndex, double>> terms;
    double constant = 0.0;

    AffineExpr& add(VarIndex v, double coeff) {
        terms.emplace_back(v, coeff);
        return *this;
    }

    double eval(const Eigen::VectorXd& x) const;

    /// Dense gradient vector of the functional.
    Eigen::VectorXd dense(int n_vars) const;
};

/// expr >= 0.
struct LinearConstraint {
    AffineExpr expr;
    std::string tag;
};

/// Rotated second-order cone: 2 u w >= |z|^2 with u >= 0, w >= 0.
struct RotatedSocConstraint {
    AffineExpr u;
    AffineExpr w;
    std::vector<AffineExpr> z;
    std::string tag;
};

/// Logarithmic constraint ln(arg) >= level with arg > 0 (an instance of the
/// exponential cone written in the form the rate bounds need).
struct LogConstraint {
    AffineExpr arg;
    AffineExpr level;
    std::string tag;
};

enum class SolveStatus {
    optimal,
    infeasible_start,
    iteration_limit,
    numerical_failure,
};

const char* to_string(SolveStatus status);

/// Solver-agnostic conic program: scalar variables followed by svec blocks of
/// PSD matrix variables, a linear objective (maximized), and typed cone
/// constraints. Membership of each PsdBlock in the PSD cone is implicit.
struct ConicProgram {
    std::vector<std::string> scalar_names;
    std::vector<PsdBlock> psd_blocks;
    AffineExpr objective;
    std::vector<LinearConstraint> linear;
    std::vector<RotatedSocConstraint> rsoc;
    std::vector<LogConstraint> logs;

    /// Strictly interior start point, required by the barrier backend.
    Eigen::VectorXd start;
    /// Per-variable magnitude hints used to precondition Newton systems.
    Eigen::VectorXd scales;
    /// Barrier path warm-start hint (0 = cold start).
    double path_hint = 0.0;

    int n_scalars() const { return static_cast<int>(scalar_names.size()); }
    int n_vars() const;

    VarIndex add_scalar(std::string name);
    PsdBlock& add_psd_block(std::string name, int dim);

    /// Index of a named scalar; throws ValidationError when absent.
    VarIndex find_scalar(const std::string& name) const;
    /// Index of a named PSD block; throws ValidationError when absent.
    int find_block(const std::string& name) const;

    /// Human-readable dump for debugging backend discrepancies.
    std::string to_text() const;
};

/// svec coordinate of entry (i, j), i <= j, within a block of side `dim`.
int svec_index(int i, int j, int dim);

/// Scaled upper-triangle vectorization; S must be square (assumed symmetric).
Eigen::VectorXd svec(const Eigen::MatrixXd& S);

/// Inverse of svec.
Eigen::MatrixXd smat(const Eigen::VectorXd& v, int dim);

/// Adds coeff * Tr(C P) over the given block to the expression. C is
/// symmetrized first, so only its symmetric part contributes.
void add_trace_term(AffineExpr& expr, const PsdBlock& block, const Eigen::MatrixXd& C,
                    double coeff = 1.0);

/// Names the first cone whose strict interior excludes x, e.g.
/// "linear[power]" or "psd[P_0]"; empty when x is a valid barrier start.
std::string diagnose_start(const ConicProgram& prog, const Eigen::VectorXd& x);

struct SolveResult {
    SolveStatus status = SolveStatus::numerical_failure;
    Eigen::VectorXd x;
    double objective = 0.0;
    int newton_steps = 0;
    /// Final barrier path parameter, usable as path_hint for a warm restart.
    double path_final = 0.0;
    std::string message;
};

/// Backend contract: consume a ConicProgram, return primal values and status.
class ConicBackend {
public:
    virtual ~ConicBackend() = default;
    virtual SolveResult solve(const ConicProgram& prog) const = 0;
};

/// Primal log-barrier path-following interior-point backend. Requires the
/// program's `start` to be strictly feasible for every cone.
class BarrierBackend : public ConicBackend {
public:
    struct Options {
        double gap_tol = 1e-10;       ///< stop when nu / t <= gap_tol * (1 + |obj|)
        double center_tol = 1e-10;    ///< Newton decrement^2 / 2 threshold
        double mu = 20.0;             ///< path parameter growth factor
        int max_newton_steps = 4000;  ///< global step budget per solve
    };

    BarrierBackend() = default;
    explicit BarrierBackend(Options opts) : opts_(opts) {}

    SolveResult solve(const ConicProgram& prog) const override;

private:
    Options opts_;
};

} // namespace slipt
