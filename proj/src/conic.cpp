// SPDX-License-Identifier: Apache-2.0
#include "slipt/conic.hpp"

#include "slipt/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace slipt {

double AffineExpr::eval(const Eigen::VectorXd& x) const {
    double value = constant;
    for (const auto& [index, coeff] : terms) value += coeff * x[index];
    return value;
}

Eigen::VectorXd AffineExpr::dense(int n_vars) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n_vars);
    for (const auto& [index, coeff] : terms) a[index] += coeff;
    return a;
}

const char* to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible_start: return "infeasible_start";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

int ConicProgram::n_vars() const {
    int n = n_scalars();
    for (const auto& block : psd_blocks) n += block.svec_size();
    return n;
}

VarIndex ConicProgram::add_scalar(std::string name) {
    if (!psd_blocks.empty())
        throw ValidationError("scalar variables must be declared before PSD blocks");
    scalar_names.push_back(std::move(name));
    return n_scalars() - 1;
}

PsdBlock& ConicProgram::add_psd_block(std::string name, int dim) {
    if (dim < 1) throw ValidationError("PSD block dimension must be positive");
    PsdBlock block;
    block.name = std::move(name);
    block.dim = dim;
    block.offset = n_vars();
    psd_blocks.push_back(std::move(block));
    return psd_blocks.back();
}

VarIndex ConicProgram::find_scalar(const std::string& name) const {
    for (int i = 0; i < n_scalars(); ++i)
        if (scalar_names[i] == name) return i;
    throw ValidationError("unknown scalar variable: " + name);
}

int ConicProgram::find_block(const std::string& name) const {
    for (int i = 0; i < static_cast<int>(psd_blocks.size()); ++i)
        if (psd_blocks[i].name == name) return i;
    throw ValidationError("unknown PSD block: " + name);
}

int svec_index(int i, int j, int dim) {
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= dim) throw ValidationError("svec index out of range");
    return j * (j + 1) / 2 + i;
}

Eigen::VectorXd svec(const Eigen::MatrixXd& S) {
    const int d = static_cast<int>(S.rows());
    Eigen::VectorXd v(d * (d + 1) / 2);
    int idx = 0;
    for (int j = 0; j < d; ++j)
        for (int i = 0; i <= j; ++i)
            v[idx++] = (i == j) ? S(i, j) : std::numbers::sqrt2 * 0.5 * (S(i, j) + S(j, i));
    return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v, int dim) {
    if (v.size() != dim * (dim + 1) / 2) throw ValidationError("svec length mismatch");
    Eigen::MatrixXd S(dim, dim);
    int idx = 0;
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i <= j; ++i) {
            const double value = (i == j) ? v[idx] : v[idx] / std::numbers::sqrt2;
            S(i, j) = value;
            S(j, i) = value;
            ++idx;
        }
    return S;
}

void add_trace_term(AffineExpr& expr, const PsdBlock& block, const Eigen::MatrixXd& C,
                    double coeff) {
    if (C.rows() != block.dim || C.cols() != block.dim)
        throw ValidationError("trace coefficient dimension mismatch for block " + block.name);
    for (int j = 0; j < block.dim; ++j)
        for (int i = 0; i <= j; ++i) {
            const double sym = 0.5 * (C(i, j) + C(j, i));
            const double c = (i == j) ? sym : std::numbers::sqrt2 * sym;
            if (c != 0.0) expr.add(block.offset + svec_index(i, j, block.dim), coeff * c);
        }
}

namespace {

void print_expr(std::ostringstream& out, const ConicProgram& prog, const AffineExpr& expr) {
    bool first = true;
    for (const auto& [index, coeff] : expr.terms) {
        out << (first ? "" : " + ") << coeff << "*x" << index;
        if (index < prog.n_scalars()) out << "(" << prog.scalar_names[index] << ")";
        first = false;
    }
    if (first || expr.constant != 0.0) out << (first ? "" : " + ") << expr.constant;
}

} // namespace

std::string ConicProgram::to_text() const {
    std::ostringstream out;
    out.precision(12);
    out << "vars " << n_vars() << " (" << n_scalars() << " scalar";
    for (const auto& block : psd_blocks)
        out << ", " << block.name << " psd " << block.dim << "x" << block.dim << " @" << block.offset;
    out << ")\nmaximize ";
    print_expr(out, *this, objective);
    out << "\n";
    for (const auto& con : linear) {
        out << "lin[" << con.tag << "]: ";
        print_expr(out, *this, con.expr);
        out << " >= 0\n";
    }
    for (const auto& con : rsoc) {
        out << "rsoc[" << con.tag << "]: 2*(";
        print_expr(out, *this, con.u);
        out << ")*(";
        print_expr(out, *this, con.w);
        out << ") >= sum_sq{";
        for (size_t i = 0; i < con.z.size(); ++i) {
            if (i) out << "; ";
            print_expr(out, *this, con.z[i]);
        }
        out << "}\n";
    }
    for (const auto& con : logs) {
        out << "log[" << con.tag << "]: ln(";
        print_expr(out, *this, con.arg);
        out << ") >= ";
        print_expr(out, *this, con.level);
        out << "\n";
    }
    return out.str();
}

} // namespace slipt
