#pragma once

#include <vector>

#include "dense.hpp"

namespace wpcj {

// Dense homogeneous self-dual interior-point method for
//
//   minimize    c'x
//   subject to  A x = b,
//               G x + s = h,   s in K,
//
// where K is a product of a nonnegative orthant, second-order cones and
// real PSD cones (svec storage, sqrt(2)-scaled off-diagonals). Rows of G
// are ordered orthant, then SOC blocks, then PSD blocks. Uses
// Nesterov-Todd scaling with a Mehrotra predictor-corrector and returns
// certificates for infeasible and unbounded problems.

struct ConeLayout {
    int nonneg = 0;
    std::vector<int> soc_dims;
    std::vector<int> psd_sides;

    int rows() const;
    int degree() const;
};

enum class IpmStatus { Optimal, PrimalInfeasible, DualInfeasible, NumericalFailure, IterationLimit };

struct IpmOptions {
    double feastol = 1e-8;
    double reltol = 1e-8;
    int max_iters = 200;
    double step_damping = 0.99;
    int refine_rounds = 12;
    double static_reg = 1e-11;
};

struct IpmResult {
    IpmStatus status = IpmStatus::NumericalFailure;
    VecXd x, y, s, z;   // tau-normalized primal/dual (certificates when infeasible)
    double pobj = 0.0;  // c'x
    double dobj = 0.0;  // -b'y - h'z
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0; // s'z after normalization
};

IpmResult solve_conelp(const VecXd& c, const MatXd& a, const VecXd& b, const MatXd& g, const VecXd& h,
                       const ConeLayout& layout, const IpmOptions& opts = {});

} // namespace wpcj
