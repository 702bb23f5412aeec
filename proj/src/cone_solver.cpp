#include "cone_solver.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "hermitian.hpp"
#include "ipm.hpp"

namespace wpcj {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::Unbounded: return "Unbounded";
        case SolveStatus::NumericalFailure: return "NumericalFailure";
    }
    return "?";
}

PointValues ConeSolution::point() const {
    PointValues p;
    p.herm = herm_values;
    p.scalar = scalar_values;
    p.cvec = cvec_values;
    return p;
}

namespace {

struct DofLayout {
    std::vector<int> herm_off, scalar_off, cvec_off;
    int epi_off = -1;
    int total = 0;
};

DofLayout make_dof_layout(const ConeProgram& p) {
    DofLayout d;
    int off = 0;
    for (const auto& [name, side] : p.hermitian_vars()) {
        d.herm_off.push_back(off);
        off += herm_dof_dim(side);
    }
    for (size_t i = 0; i < p.scalar_vars().size(); ++i) {
        d.scalar_off.push_back(off);
        off += 1;
    }
    for (const auto& [name, len] : p.complex_vector_vars()) {
        d.cvec_off.push_back(off);
        off += 2 * len;
    }
    if (p.norm_sq_var()) {
        d.epi_off = off;
        off += 1;
    }
    d.total = off;
    return d;
}

// Coefficient vector of a LinearExpr over the real dof vector; the affine
// constant is returned separately.
void expr_coeffs(const ConeProgram& p, const DofLayout& dof, const LinearExpr& e, VecXd& g,
                 double& constant) {
    g.setZero(dof.total);
    constant = e.constant;
    for (const auto& [idx, c] : e.herm_terms)
        g.segment(dof.herm_off[idx], herm_dof_dim(p.hermitian_vars()[idx].second)) += herm_trace_coeffs(c);
    for (const auto& [idx, coeff] : e.scalar_terms) g[dof.scalar_off[idx]] += coeff;
    for (const auto& [idx, a] : e.cvec_terms) {
        const int len = p.complex_vector_vars()[idx].second;
        for (int k = 0; k < len; ++k) {
            // Re(a^H v) = sum_k Re(a_k) Re(v_k) + Im(a_k) Im(v_k)
            g[dof.cvec_off[idx] + 2 * k] += a[k].real();
            g[dof.cvec_off[idx] + 2 * k + 1] += a[k].imag();
        }
    }
}

// Rows identifying svec(embed(H(u))) with the PSD slack block.
void fill_embedding_rows(MatXd& g, int row0, int col0, int side) {
    const double s2 = 1.4142135623730951;
    const int d = 2 * side;
    // svec index of (r, c) with r >= c in a d x d matrix
    auto svec_row = [&](int r, int c) { return row0 + c * d - c * (c - 1) / 2 - c + r; };
    auto dof_col = [&](int r, int c, bool imag) {
        // lower-triangle dof index of H(r, c), r >= c
        int base = col0;
        for (int j = 0; j < c; ++j) base += 1 + 2 * (side - j - 1);
        if (r == c) return base;
        return base + 1 + 2 * (r - c - 1) + (imag ? 1 : 0);
    };
    for (int c = 0; c < side; ++c) {
        // diagonal of Re-blocks
        g(svec_row(c, c), dof_col(c, c, false)) = -1.0;
        g(svec_row(side + c, side + c), dof_col(c, c, false)) = -1.0;
        for (int r = c + 1; r < side; ++r) {
            // Re H(r,c) appears in both diagonal blocks
            g(svec_row(r, c), dof_col(r, c, false)) = -s2;
            g(svec_row(side + r, side + c), dof_col(r, c, false)) = -s2;
            // Im H(r,c) in the bottom-left block: B(r,c) and B(c,r) = -B(r,c)
            g(svec_row(side + r, c), dof_col(r, c, true)) = -s2;
            g(svec_row(side + c, r), dof_col(r, c, true)) = s2;
        }
        // B(c,c) = 0: no entries on (side + c, c)
    }
}

struct Compiled {
    DofLayout dof;
    VecXd c;
    double obj_sign = 1.0; // multiply solver objective by this to recover program sense
    MatXd a;
    VecXd b;
    MatXd g;
    VecXd h;
    ConeLayout layout;
    std::vector<int> soc_offsets; // row offset per declared soc
    std::vector<int> psd_offsets; // row offset per Hermitian variable
};

Compiled compile(const ConeProgram& p) {
    Compiled out;
    out.dof = make_dof_layout(p);
    const auto& dof = out.dof;

    // objective (minimization form)
    double obj_const = 0.0;
    expr_coeffs(p, dof, p.objective(), out.c, obj_const);
    if (p.sense() == Sense::Maximize) {
        out.c = -out.c;
        out.obj_sign = -1.0;
    }
    if (p.norm_sq_var()) out.c[dof.epi_off] += 1.0;

    // equalities
    const int neq = static_cast<int>(p.eq_constraints().size());
    out.a.setZero(neq, dof.total);
    out.b.setZero(neq);
    for (int i = 0; i < neq; ++i) {
        VecXd row;
        double cst;
        expr_coeffs(p, dof, p.eq_constraints()[i].expr, row, cst);
        out.a.row(i) = row;
        out.b[i] = -cst;
    }

    // cone rows
    ConeLayout& lay = out.layout;
    lay.nonneg = static_cast<int>(p.ineq_constraints().size());
    for (const auto& soc : p.soc_constraints()) lay.soc_dims.push_back(1 + static_cast<int>(soc.rows.size()));
    if (p.norm_sq_var()) {
        const int len = p.complex_vector_vars()[*p.norm_sq_var()].second;
        lay.soc_dims.push_back(2 + 2 * len);
    }
    for (const auto& [name, side] : p.hermitian_vars()) lay.psd_sides.push_back(2 * side);

    const int m = lay.rows();
    out.g.setZero(m, dof.total);
    out.h.setZero(m);

    int row = 0;
    for (const auto& con : p.ineq_constraints()) {
        VecXd coef;
        double cst;
        expr_coeffs(p, dof, con.expr, coef, cst);
        out.g.row(row) = coef;
        out.h[row] = -cst;
        ++row;
    }
    for (const auto& soc : p.soc_constraints()) {
        out.soc_offsets.push_back(row);
        VecXd coef;
        double cst;
        expr_coeffs(p, dof, soc.rhs, coef, cst);
        out.g.row(row) = -coef;
        out.h[row] = cst;
        ++row;
        for (const auto& r : soc.rows) {
            expr_coeffs(p, dof, r, coef, cst);
            out.g.row(row) = -coef;
            out.h[row] = cst;
            ++row;
        }
    }
    if (p.norm_sq_var()) {
        // || [2 v; w - 1] || <= w + 1  encodes  ||v||^2 <= w
        const int idx = *p.norm_sq_var();
        const int len = p.complex_vector_vars()[idx].second;
        out.g(row, dof.epi_off) = -1.0;
        out.h[row] = 1.0;
        ++row;
        for (int k = 0; k < 2 * len; ++k) {
            out.g(row, dof.cvec_off[idx] + k) = -2.0;
            out.h[row] = 0.0;
            ++row;
        }
        out.g(row, dof.epi_off) = -1.0;
        out.h[row] = -1.0;
        ++row;
    }
    for (size_t i = 0; i < p.hermitian_vars().size(); ++i) {
        out.psd_offsets.push_back(row);
        const int side = p.hermitian_vars()[i].second;
        fill_embedding_rows(out.g, row, dof.herm_off[i], side);
        row += svec_dim(2 * side);
    }
    return out;
}

struct Equilibration {
    VecXd row_g, row_a, col;
};

Equilibration equilibrate(Compiled& c) {
    Equilibration eq;
    const int m = static_cast<int>(c.g.rows());
    const int p = static_cast<int>(c.a.rows());
    const int n = static_cast<int>(c.g.cols());
    eq.row_g = VecXd::Ones(m);
    eq.row_a = VecXd::Ones(p);
    eq.col = VecXd::Ones(n);

    std::vector<std::pair<int, int>> groups; // cone-uniform row groups of G
    for (int i = 0; i < c.layout.nonneg; ++i) groups.emplace_back(i, 1);
    int off = c.layout.nonneg;
    for (int d : c.layout.soc_dims) {
        groups.emplace_back(off, d);
        off += d;
    }
    for (int side : c.layout.psd_sides) {
        groups.emplace_back(off, svec_dim(side));
        off += svec_dim(side);
    }

    auto clip = [](double v) { return std::min(std::max(v, 1e-8), 1e8); };
    for (int sweep = 0; sweep < 8; ++sweep) {
        for (auto [o, len] : groups) {
            double mx = c.g.middleRows(o, len).cwiseAbs().maxCoeff();
            mx = std::max(mx, c.h.segment(o, len).cwiseAbs().maxCoeff());
            if (mx <= 0.0) continue;
            const double d = clip(1.0 / std::sqrt(mx));
            c.g.middleRows(o, len) *= d;
            c.h.segment(o, len) *= d;
            eq.row_g.segment(o, len) *= d;
        }
        for (int i = 0; i < p; ++i) {
            double mx = std::max(c.a.row(i).cwiseAbs().maxCoeff(), std::abs(c.b[i]));
            if (mx <= 0.0) continue;
            const double d = clip(1.0 / std::sqrt(mx));
            c.a.row(i) *= d;
            c.b[i] *= d;
            eq.row_a[i] *= d;
        }
        for (int j = 0; j < n; ++j) {
            double mx = c.g.col(j).cwiseAbs().maxCoeff();
            if (p > 0) mx = std::max(mx, c.a.col(j).cwiseAbs().maxCoeff());
            if (mx <= 0.0) continue;
            const double d = clip(1.0 / std::sqrt(mx));
            c.g.col(j) *= d;
            if (p > 0) c.a.col(j) *= d;
            eq.col[j] *= d;
        }
    }
    c.c = eq.col.asDiagonal() * c.c;
    return eq;
}

} // namespace

ConeSolution solve(const ConeProgram& program, const SolverOptions& opts) {
    program.validate();
    if (opts.tol < 1e-10 || opts.tol > 1e-4) throw InvalidConfig("solver tol must lie in [1e-10, 1e-4]");

    Compiled cp = compile(program);
    Equilibration eq;
    if (opts.equilibrate) {
        eq = equilibrate(cp);
    } else {
        eq.row_g = VecXd::Ones(cp.g.rows());
        eq.row_a = VecXd::Ones(cp.a.rows());
        eq.col = VecXd::Ones(cp.g.cols());
    }

    IpmOptions iopts;
    iopts.feastol = opts.tol;
    iopts.reltol = opts.tol;
    iopts.max_iters = opts.max_iters;
    IpmResult r = solve_conelp(cp.c, cp.a, cp.b, cp.g, cp.h, cp.layout, iopts);

    ConeSolution sol;
    sol.iterations = r.iterations;
    sol.residuals = {r.primal_residual, r.dual_residual, r.gap};
    switch (r.status) {
        case IpmStatus::Optimal: sol.status = SolveStatus::Optimal; break;
        case IpmStatus::PrimalInfeasible: sol.status = SolveStatus::Infeasible; break;
        case IpmStatus::DualInfeasible: sol.status = SolveStatus::Unbounded; break;
        default: sol.status = SolveStatus::NumericalFailure; break;
    }
    if (sol.status != SolveStatus::Optimal) return sol;

    // Undo the diagonal scaling: x = Dc x~, z = Dr z~, y likewise.
    VecXd x = eq.col.asDiagonal() * r.x;
    VecXd z = eq.row_g.asDiagonal() * r.z;
    VecXd y = (r.y.size() > 0) ? VecXd(eq.row_a.asDiagonal() * r.y) : VecXd();

    sol.objective_value = cp.obj_sign * r.pobj;

    const auto& dof = cp.dof;
    for (size_t i = 0; i < program.hermitian_vars().size(); ++i) {
        const auto& [name, side] = program.hermitian_vars()[i];
        sol.herm_values[name] = herm_unpack(x.segment(dof.herm_off[i], herm_dof_dim(side)), side);
    }
    for (size_t i = 0; i < program.scalar_vars().size(); ++i)
        sol.scalar_values[program.scalar_vars()[i]] = x[dof.scalar_off[i]];
    for (size_t i = 0; i < program.complex_vector_vars().size(); ++i) {
        const auto& [name, len] = program.complex_vector_vars()[i];
        VecXcd v(len);
        for (int k = 0; k < len; ++k)
            v[k] = cxd(x[dof.cvec_off[i] + 2 * k], x[dof.cvec_off[i] + 2 * k + 1]);
        sol.cvec_values[name] = std::move(v);
    }

    sol.has_duals = true;
    for (size_t i = 0; i < program.ineq_constraints().size(); ++i)
        sol.ineq_duals[program.ineq_constraints()[i].id] = z[static_cast<int>(i)];
    for (size_t i = 0; i < program.eq_constraints().size(); ++i)
        sol.eq_duals[program.eq_constraints()[i].id] = y[static_cast<int>(i)];
    for (size_t i = 0; i < program.soc_constraints().size(); ++i) {
        const auto& soc = program.soc_constraints()[i];
        sol.soc_duals[soc.id] = z.segment(cp.soc_offsets[i], 1 + soc.rows.size());
    }
    for (size_t i = 0; i < program.hermitian_vars().size(); ++i) {
        const auto& [name, side] = program.hermitian_vars()[i];
        const MatXd zm = smat(z.segment(cp.psd_offsets[i], svec_dim(2 * side)), 2 * side);
        sol.psd_duals[name] = 2.0 * hermitian_unembed(zm);
    }
    return sol;
}

} // namespace wpcj
