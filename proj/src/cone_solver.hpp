#pragma once

#include <map>
#include <string>

#include "cone_program.hpp"
#include "dense.hpp"

namespace wpcj {

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus s);

struct SolverOptions {
    double tol = 1e-6;   // feasibility and duality-gap tolerance
    int max_iters = 200; // iteration cap before NumericalFailure
    bool equilibrate = true;
};

struct ResidualTriple {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
};

struct ConeSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    double objective_value = 0.0; // in the program's own sense
    int iterations = 0;
    ResidualTriple residuals;

    std::map<std::string, MatXcd> herm_values;
    std::map<std::string, double> scalar_values;
    std::map<std::string, VecXcd> cvec_values;

    // Multipliers of the minimization form of the program (maximization
    // objectives are negated before dual extraction).
    std::map<std::string, double> ineq_duals;
    std::map<std::string, double> eq_duals;
    std::map<std::string, MatXcd> psd_duals; // keyed by Hermitian variable name
    std::map<std::string, VecXd> soc_duals;

    bool has_duals = false;

    PointValues point() const;
};

ConeSolution solve(const ConeProgram& program, const SolverOptions& opts = {});

} // namespace wpcj
