#include "cone_program.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "hermitian.hpp"

namespace wpcj {

LinearExpr& LinearExpr::trace(VarRef h, const MatXcd& c) {
    auto it = herm_terms.find(h.index);
    if (it == herm_terms.end())
        herm_terms.emplace(h.index, c);
    else
        it->second += c;
    return *this;
}

LinearExpr& LinearExpr::scalar(VarRef s, double coeff) {
    scalar_terms[s.index] += coeff;
    return *this;
}

LinearExpr& LinearExpr::re_inner(VarRef v, const VecXcd& a) {
    auto it = cvec_terms.find(v.index);
    if (it == cvec_terms.end())
        cvec_terms.emplace(v.index, a);
    else
        it->second += a;
    return *this;
}

LinearExpr& LinearExpr::constant_term(double c) {
    constant += c;
    return *this;
}

double ConstraintResiduals::worst() const {
    double w = std::max(max_eq_violation, std::max(max_ineq_violation, max_soc_violation));
    return std::max(w, std::max(0.0, -min_psd_eigenvalue));
}

VarRef ConeProgram::add_hermitian(const std::string& name, int side) {
    if (side < 1) throw InvalidConfig("hermitian variable side must be >= 1");
    herm_vars_.emplace_back(name, side);
    return {VarKind::Hermitian, static_cast<int>(herm_vars_.size()) - 1};
}

VarRef ConeProgram::add_scalar(const std::string& name) {
    scalar_vars_.push_back(name);
    return {VarKind::Scalar, static_cast<int>(scalar_vars_.size()) - 1};
}

VarRef ConeProgram::add_complex_vector(const std::string& name, int len) {
    if (len < 1) throw InvalidConfig("complex vector length must be >= 1");
    cvec_vars_.emplace_back(name, len);
    return {VarKind::ComplexVector, static_cast<int>(cvec_vars_.size()) - 1};
}

void ConeProgram::set_objective(Sense sense, LinearExpr expr) {
    sense_ = sense;
    objective_ = std::move(expr);
}

void ConeProgram::set_norm_sq_objective(VarRef cvec, LinearExpr extra) {
    sense_ = Sense::Minimize;
    objective_ = std::move(extra);
    norm_sq_var_ = cvec.index;
}

void ConeProgram::add_eq(const std::string& id, LinearExpr expr) {
    eqs_.push_back({id, std::move(expr)});
}

void ConeProgram::add_ineq(const std::string& id, LinearExpr expr) {
    ineqs_.push_back({id, std::move(expr)});
}

SocConstraint& ConeProgram::add_soc(const std::string& id) {
    socs_.push_back(SocConstraint{id, {}, {}});
    return socs_.back();
}

void ConeProgram::soc_complex_entry(SocConstraint& soc, VarRef v, const VecXcd& a,
                                    double scale) const {
    // scale * a^H v contributes Re and Im rows; Im(a^H v) == Re((i a)^H v).
    LinearExpr re;
    re.re_inner(v, scale * a);
    LinearExpr im;
    im.re_inner(v, scale * (cxd(0.0, 1.0) * a));
    soc.rows.push_back(std::move(re));
    soc.rows.push_back(std::move(im));
}

double ConeProgram::eval(const LinearExpr& e, const PointValues& p) const {
    double val = e.constant;
    for (const auto& [idx, c] : e.herm_terms) {
        const auto& [name, side] = herm_vars_.at(idx);
        const MatXcd& h = p.herm.at(name);
        val += (c.cwiseProduct(h.transpose())).sum().real(); // Re trace(C H)
    }
    for (const auto& [idx, coeff] : e.scalar_terms) val += coeff * p.scalar.at(scalar_vars_.at(idx));
    for (const auto& [idx, a] : e.cvec_terms) {
        const auto& [name, len] = cvec_vars_.at(idx);
        val += a.dot(p.cvec.at(name)).real(); // Eigen dot conjugates the left arg
    }
    return val;
}

ConstraintResiduals ConeProgram::residuals(const PointValues& point) const {
    ConstraintResiduals r;
    double obj = eval(objective_, point);
    if (norm_sq_var_) {
        const auto& [name, len] = cvec_vars_.at(*norm_sq_var_);
        obj += point.cvec.at(name).squaredNorm();
    }
    r.objective = obj;
    for (const auto& c : eqs_) r.max_eq_violation = std::max(r.max_eq_violation, std::abs(eval(c.expr, point)));
    for (const auto& c : ineqs_) r.max_ineq_violation = std::max(r.max_ineq_violation, eval(c.expr, point));
    for (const auto& soc : socs_) {
        double sq = 0.0;
        for (const auto& row : soc.rows) {
            const double v = eval(row, point);
            sq += v * v;
        }
        r.max_soc_violation = std::max(r.max_soc_violation, std::sqrt(sq) - eval(soc.rhs, point));
    }
    r.min_psd_eigenvalue = 0.0;
    bool first = true;
    for (const auto& [name, side] : herm_vars_) {
        Eigen::SelfAdjointEigenSolver<MatXcd> eig(point.herm.at(name));
        const double mn = eig.eigenvalues().minCoeff();
        r.min_psd_eigenvalue = first ? mn : std::min(r.min_psd_eigenvalue, mn);
        first = false;
    }
    return r;
}

void ConeProgram::validate() const {
    std::set<std::string> names;
    auto check_unique = [&](const std::string& n) {
        if (!names.insert(n).second) throw InvalidConfig("duplicate variable name: " + n);
    };
    for (const auto& [n, s] : herm_vars_) check_unique(n);
    for (const auto& n : scalar_vars_) check_unique(n);
    for (const auto& [n, s] : cvec_vars_) check_unique(n);

    auto check_expr = [&](const LinearExpr& e) {
        for (const auto& [idx, c] : e.herm_terms) {
            if (idx < 0 || idx >= static_cast<int>(herm_vars_.size()))
                throw InvalidConfig("expression references undeclared hermitian variable");
            const int side = herm_vars_[idx].second;
            if (c.rows() != side || c.cols() != side)
                throw DimensionMismatch("trace coefficient has wrong side");
            if (!is_hermitian(c, 1e-10)) throw DimensionMismatch("trace coefficient is not Hermitian");
        }
        for (const auto& [idx, coeff] : e.scalar_terms)
            if (idx < 0 || idx >= static_cast<int>(scalar_vars_.size()))
                throw InvalidConfig("expression references undeclared scalar");
        for (const auto& [idx, a] : e.cvec_terms) {
            if (idx < 0 || idx >= static_cast<int>(cvec_vars_.size()))
                throw InvalidConfig("expression references undeclared complex vector");
            if (a.size() != cvec_vars_[idx].second) throw DimensionMismatch("inner-product vector has wrong length");
        }
    };
    check_expr(objective_);
    for (const auto& c : eqs_) check_expr(c.expr);
    for (const auto& c : ineqs_) check_expr(c.expr);
    for (const auto& soc : socs_) {
        for (const auto& row : soc.rows) check_expr(row);
        check_expr(soc.rhs);
    }
    if (norm_sq_var_ && (*norm_sq_var_ < 0 || *norm_sq_var_ >= static_cast<int>(cvec_vars_.size())))
        throw InvalidConfig("norm-squared objective references undeclared complex vector");
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void dump_expr(std::ostream& os, const ConeProgram& p, const LinearExpr& e, const char* indent) {
    if (e.constant != 0.0) os << indent << "const " << fmt(e.constant) << "\n";
    for (const auto& [idx, c] : e.herm_terms) {
        const auto& [name, side] = p.hermitian_vars()[idx];
        for (int j = 0; j < side; ++j)
            for (int i = j; i < side; ++i) {
                const cxd v = c(i, j);
                if (v == cxd(0.0, 0.0)) continue;
                os << indent << "herm " << name << " " << i << " " << j << " " << fmt(v.real()) << " "
                   << fmt(v.imag()) << "\n";
            }
    }
    for (const auto& [idx, coeff] : e.scalar_terms) {
        if (coeff == 0.0) continue;
        os << indent << "scalar " << p.scalar_vars()[idx] << " " << fmt(coeff) << "\n";
    }
    for (const auto& [idx, a] : e.cvec_terms) {
        const auto& [name, len] = p.complex_vector_vars()[idx];
        for (int k = 0; k < len; ++k) {
            if (a[k] == cxd(0.0, 0.0)) continue;
            os << indent << "cvec " << name << " " << k << " " << fmt(a[k].real()) << " " << fmt(a[k].imag())
               << "\n";
        }
    }
}

} // namespace

void ConeProgram::dump(std::ostream& os) const {
    os << "coneprogram v1\n";
    os << "sense " << (sense_ == Sense::Minimize ? "min" : "max") << "\n";
    for (const auto& [n, s] : herm_vars_) os << "var herm " << n << " " << s << "\n";
    for (const auto& n : scalar_vars_) os << "var scalar " << n << "\n";
    for (const auto& [n, l] : cvec_vars_) os << "var cvec " << n << " " << l << "\n";
    os << "objective:\n";
    if (norm_sq_var_) os << "  normsq " << cvec_vars_[*norm_sq_var_].first << "\n";
    dump_expr(os, *this, objective_, "  ");
    for (const auto& c : eqs_) {
        os << "eq " << c.id << ":\n";
        dump_expr(os, *this, c.expr, "  ");
    }
    for (const auto& c : ineqs_) {
        os << "ineq " << c.id << ":\n";
        dump_expr(os, *this, c.expr, "  ");
    }
    for (const auto& soc : socs_) {
        os << "soc " << soc.id << " " << soc.rows.size() << ":\n";
        os << "  rhs:\n";
        dump_expr(os, *this, soc.rhs, "    ");
        for (size_t r = 0; r < soc.rows.size(); ++r) {
            os << "  row " << r << ":\n";
            dump_expr(os, *this, soc.rows[r], "    ");
        }
    }
    os << "end\n";
}

std::string ConeProgram::dump_string() const {
    std::ostringstream os;
    dump(os);
    return os.str();
}

} // namespace wpcj
