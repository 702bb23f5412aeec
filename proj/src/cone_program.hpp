#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dense.hpp"

namespace wpcj {

// Modeling layer for the cone programs this project solves: Hermitian PSD
// matrix variables, real scalars, complex vector variables, real-valued
// affine constraints and second-order cones. Everything is lowered to a
// real symmetric-cone standard form by the solver (see cone_solver.hpp);
// complex PSD blocks go through the 2n x 2n real embedding.

enum class Sense { Minimize, Maximize };

enum class VarKind { Hermitian, Scalar, ComplexVector };

struct VarRef {
    VarKind kind;
    int index = -1;
};

// Real-valued affine function of the program variables. Hermitian terms
// mean Re trace(C * H); complex-vector terms mean Re(a^H v).
struct LinearExpr {
    std::map<int, MatXcd> herm_terms;
    std::map<int, double> scalar_terms;
    std::map<int, VecXcd> cvec_terms;
    double constant = 0.0;

    LinearExpr& trace(VarRef h, const MatXcd& c);
    LinearExpr& scalar(VarRef s, double coeff);
    LinearExpr& re_inner(VarRef v, const VecXcd& a);
    LinearExpr& constant_term(double c);
};

// One entry of a second-order-cone vector; complex entries occupy two
// real rows when compiled.
struct ComplexAffine {
    LinearExpr re;
    LinearExpr im;
};

struct SocConstraint {
    std::string id;
    std::vector<LinearExpr> rows; // real entries of the cone vector
    LinearExpr rhs;               // ||rows|| <= rhs
};

struct NamedConstraint {
    std::string id;
    LinearExpr expr; // eq: expr == 0; ineq: expr <= 0
};

// Named values for evaluating a program at a point.
struct PointValues {
    std::map<std::string, MatXcd> herm;
    std::map<std::string, double> scalar;
    std::map<std::string, VecXcd> cvec;
};

struct ConstraintResiduals {
    double objective = 0.0;          // sense-oriented objective value
    double max_eq_violation = 0.0;   // max |expr|
    double max_ineq_violation = 0.0; // max positive part of expr
    double max_soc_violation = 0.0;  // max positive part of ||vec|| - rhs
    double min_psd_eigenvalue = 0.0; // over all Hermitian variables
    double worst() const;
};

class ConeProgram {
  public:
    VarRef add_hermitian(const std::string& name, int side);
    VarRef add_scalar(const std::string& name);
    VarRef add_complex_vector(const std::string& name, int len);

    void set_objective(Sense sense, LinearExpr expr);
    // Adds min ||v||^2 on top of the linear objective. Lowered to an
    // internal epigraph cone at compile time; not listed in socs().
    void set_norm_sq_objective(VarRef cvec, LinearExpr extra = {});

    void add_eq(const std::string& id, LinearExpr expr);
    void add_ineq(const std::string& id, LinearExpr expr);
    SocConstraint& add_soc(const std::string& id);
    void soc_complex_entry(SocConstraint& soc, VarRef v, const VecXcd& a,
                           double scale = 1.0) const; // appends scale * a^H v

    // accessors
    Sense sense() const { return sense_; }
    const LinearExpr& objective() const { return objective_; }
    std::optional<int> norm_sq_var() const { return norm_sq_var_; }
    const std::vector<std::pair<std::string, int>>& hermitian_vars() const { return herm_vars_; }
    const std::vector<std::string>& scalar_vars() const { return scalar_vars_; }
    const std::vector<std::pair<std::string, int>>& complex_vector_vars() const { return cvec_vars_; }
    const std::vector<NamedConstraint>& eq_constraints() const { return eqs_; }
    const std::vector<NamedConstraint>& ineq_constraints() const { return ineqs_; }
    const std::vector<SocConstraint>& soc_constraints() const { return socs_; }

    // Re-evaluates every constraint at the given point, independent of any
    // solver bookkeeping.
    ConstraintResiduals residuals(const PointValues& point) const;

    void validate() const; // throws on malformed programs

    // Text dump (sparse triplet listing per constraint); format documented
    // in the README and stable across versions.
    void dump(std::ostream& os) const;
    std::string dump_string() const;

  private:
    friend class ProgramCompiler;
    double eval(const LinearExpr& e, const PointValues& p) const;

    Sense sense_ = Sense::Minimize;
    LinearExpr objective_;
    std::optional<int> norm_sq_var_;
    std::vector<std::pair<std::string, int>> herm_vars_;
    std::vector<std::string> scalar_vars_;
    std::vector<std::pair<std::string, int>> cvec_vars_;
    std::vector<NamedConstraint> eqs_;
    std::vector<NamedConstraint> ineqs_;
    std::vector<SocConstraint> socs_;
};

} // namespace wpcj
