#include <doctest.h>

#include <random>
#include <sstream>

#include "cone_solver.hpp"
#include "errors.hpp"
#include "hermitian.hpp"

using namespace wpcj;

namespace {

MatXcd random_hermitian(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    MatXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cxd(nd(rng), nd(rng));
    return 0.5 * (a + a.adjoint().eval());
}

} // namespace

TEST_CASE("forced diagonal: min tr(X) with X11 = 1") {
    ConeProgram p;
    auto x = p.add_hermitian("X", 3);
    LinearExpr obj;
    obj.trace(x, MatXcd::Identity(3, 3));
    p.set_objective(Sense::Minimize, obj);
    LinearExpr pin;
    MatXcd e11 = MatXcd::Zero(3, 3);
    e11(0, 0) = 1.0;
    pin.trace(x, e11).constant_term(-1.0);
    p.add_eq("x11", pin);

    ConeSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective_value == doctest::Approx(1.0).epsilon(1e-6));
    MatXcd xs = sol.herm_values.at("X");
    MatXcd expect = MatXcd::Zero(3, 3);
    expect(0, 0) = 1.0;
    CHECK((xs - expect).norm() < 1e-5);

    // Known dual pair: y = -1 on the pin, P = I - e1 e1'.
    CHECK(sol.eq_duals.at("x11") == doctest::Approx(-1.0).epsilon(1e-6));
    MatXcd pd = sol.psd_duals.at("X");
    MatXcd pexpect = MatXcd::Identity(3, 3) - e11;
    CHECK((pd - pexpect).norm() < 1e-5);
}

TEST_CASE("3-4-5 cone: max t with ||(t,3)|| <= 5") {
    ConeProgram p;
    auto t = p.add_scalar("t");
    LinearExpr obj;
    obj.scalar(t, 1.0);
    p.set_objective(Sense::Maximize, obj);
    auto& soc = p.add_soc("cone");
    LinearExpr row1;
    row1.scalar(t, 1.0);
    soc.rows.push_back(row1);
    LinearExpr row2;
    row2.constant_term(3.0);
    soc.rows.push_back(row2);
    soc.rhs.constant_term(5.0);

    ConeSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective_value == doctest::Approx(4.0).epsilon(1e-7));
    CHECK(sol.scalar_values.at("t") == doctest::Approx(4.0).epsilon(1e-7));
}

TEST_CASE("largest eigenvalue as an SDP against an eigensolver oracle") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 2 + trial % 4;
        MatXcd c = random_hermitian(n, rng);

        ConeProgram p;
        auto x = p.add_hermitian("X", n);
        LinearExpr obj;
        obj.trace(x, c);
        p.set_objective(Sense::Maximize, obj);
        LinearExpr tr;
        tr.trace(x, MatXcd::Identity(n, n)).constant_term(-1.0);
        p.add_ineq("tr", tr);

        ConeSolution sol = solve(p);
        REQUIRE(sol.status == SolveStatus::Optimal);
        Eigen::SelfAdjointEigenSolver<MatXcd> eig(c, Eigen::EigenvaluesOnly);
        const double lmax = eig.eigenvalues().maxCoeff();
        CHECK(sol.objective_value == doctest::Approx(lmax).epsilon(1e-6));
        // the trace cap's multiplier equals lambda_max at optimality
        CHECK(sol.ineq_duals.at("tr") == doctest::Approx(lmax).epsilon(1e-5));
    }
}

TEST_CASE("small LP with equality and known solution") {
    ConeProgram p;
    auto x = p.add_scalar("x");
    auto y = p.add_scalar("y");
    LinearExpr obj;
    obj.scalar(x, 1.0).scalar(y, 1.0);
    p.set_objective(Sense::Minimize, obj);
    LinearExpr eq;
    eq.scalar(x, 1.0).scalar(y, 2.0).constant_term(-1.0);
    p.add_eq("budget", eq);
    LinearExpr nx;
    nx.scalar(x, -1.0);
    p.add_ineq("x_nonneg", nx);
    LinearExpr ny;
    ny.scalar(y, -1.0);
    p.add_ineq("y_nonneg", ny);

    ConeSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective_value == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(sol.scalar_values.at("x") == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(sol.scalar_values.at("y") == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("norm-squared objective lowers to an epigraph cone") {
    ConeProgram p;
    auto v = p.add_complex_vector("v", 3);
    VecXcd a(3);
    a << cxd(1, 1), cxd(0, 2), cxd(-1, 0);
    p.set_norm_sq_objective(v);
    LinearExpr con; // Re(a^H v) >= 1
    con.re_inner(v, -a).constant_term(1.0);
    p.add_ineq("align", con);

    ConeSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective_value == doctest::Approx(1.0 / a.squaredNorm()).epsilon(1e-6));
    VecXcd vs = sol.cvec_values.at("v");
    CHECK((vs - a / a.squaredNorm()).norm() < 1e-5);
    CHECK(p.soc_constraints().empty()); // the epigraph cone is internal
}

TEST_CASE("infeasible bounds are certified") {
    ConeProgram p;
    auto x = p.add_scalar("x");
    LinearExpr obj;
    obj.scalar(x, 1.0);
    p.set_objective(Sense::Minimize, obj);
    LinearExpr lo; // 1 - x <= 0
    lo.scalar(x, -1.0).constant_term(1.0);
    p.add_ineq("lower", lo);
    LinearExpr hi; // x + 1 <= 0
    hi.scalar(x, 1.0).constant_term(1.0);
    p.add_ineq("upper", hi);

    ConeSolution sol = solve(p);
    CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded objective is certified") {
    ConeProgram p;
    auto x = p.add_scalar("x");
    LinearExpr obj;
    obj.scalar(x, -1.0);
    p.set_objective(Sense::Minimize, obj);
    LinearExpr nn;
    nn.scalar(x, -1.0);
    p.add_ineq("nonneg", nn);

    ConeSolution sol = solve(p);
    CHECK(sol.status == SolveStatus::Unbounded);
}

TEST_CASE("objective scaling leaves the argmax unchanged") {
    std::mt19937_64 rng(5);
    MatXcd c = random_hermitian(3, rng);
    auto build = [&](double scale) {
        ConeProgram p;
        auto x = p.add_hermitian("X", 3);
        LinearExpr obj;
        obj.trace(x, scale * c);
        p.set_objective(Sense::Maximize, obj);
        LinearExpr tr;
        tr.trace(x, MatXcd::Identity(3, 3)).constant_term(-1.0);
        p.add_ineq("tr", tr);
        return solve(p);
    };
    ConeSolution s1 = build(1.0);
    ConeSolution s5 = build(5.0);
    REQUIRE(s1.status == SolveStatus::Optimal);
    REQUIRE(s5.status == SolveStatus::Optimal);
    CHECK(s5.objective_value == doctest::Approx(5.0 * s1.objective_value).epsilon(1e-6));
    CHECK((s5.herm_values.at("X") - s1.herm_values.at("X")).norm() < 1e-5);
}

TEST_CASE("returned primal re-satisfies every constraint independently") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 2 + trial % 3;
        ConeProgram p;
        auto x = p.add_hermitian("X", n);
        auto t = p.add_scalar("t");
        LinearExpr obj;
        obj.trace(x, random_hermitian(n, rng)).scalar(t, 0.5);
        p.set_objective(Sense::Maximize, obj);
        LinearExpr tr;
        tr.trace(x, MatXcd::Identity(n, n)).scalar(t, 1.0).constant_term(-2.0);
        p.add_ineq("budget", tr);
        LinearExpr tpos;
        tpos.scalar(t, -1.0);
        p.add_ineq("t_nonneg", tpos);
        LinearExpr tcap;
        tcap.scalar(t, 1.0).constant_term(-1.0);
        p.add_ineq("t_cap", tcap);

        ConeSolution sol = solve(p);
        REQUIRE(sol.status == SolveStatus::Optimal);
        ConstraintResiduals res = p.residuals(sol.point());
        CHECK(res.worst() < 1e-6);
        CHECK(res.objective == doctest::Approx(sol.objective_value).epsilon(1e-6));
    }
}

TEST_CASE("weak duality and feasibility on a mixed-cone program") {
    // max Re tr(C X) + Re(a^H v)  s.t. tr(X) <= 1, ||v|| <= 2, X >= 0
    std::mt19937_64 rng(123);
    MatXcd c = random_hermitian(3, rng);
    VecXcd a(2);
    a << cxd(1, -1), cxd(2, 0.5);

    ConeProgram p;
    auto x = p.add_hermitian("X", 3);
    auto v = p.add_complex_vector("v", 2);
    LinearExpr obj;
    obj.trace(x, c).re_inner(v, a);
    p.set_objective(Sense::Maximize, obj);
    LinearExpr tr;
    tr.trace(x, MatXcd::Identity(3, 3)).constant_term(-1.0);
    p.add_ineq("tr", tr);
    auto& soc = p.add_soc("vnorm");
    p.soc_complex_entry(soc, v, VecXcd::Unit(2, 0));
    p.soc_complex_entry(soc, v, VecXcd::Unit(2, 1));
    soc.rhs.constant_term(2.0);

    ConeSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    Eigen::SelfAdjointEigenSolver<MatXcd> eig(c, Eigen::EigenvaluesOnly);
    const double expect = eig.eigenvalues().maxCoeff() + 2.0 * a.norm();
    CHECK(sol.objective_value == doctest::Approx(expect).epsilon(1e-6));
    CHECK(p.residuals(sol.point()).worst() < 1e-6);
}

TEST_CASE("badly scaled data still solves after equilibration") {
    ConeProgram p;
    auto x = p.add_scalar("x");
    auto y = p.add_scalar("y");
    LinearExpr obj;
    obj.scalar(x, 1e-6).scalar(y, 1e6);
    p.set_objective(Sense::Minimize, obj);
    LinearExpr c1; // x >= 1e6
    c1.scalar(x, -1.0).constant_term(1e6);
    p.add_ineq("c1", c1);
    LinearExpr c2; // y >= 1e-6
    c2.scalar(y, -1.0).constant_term(1e-6);
    p.add_ineq("c2", c2);

    ConeSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective_value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("solve is deterministic") {
    std::mt19937_64 rng(77);
    MatXcd c = random_hermitian(4, rng);
    auto run = [&]() {
        ConeProgram p;
        auto x = p.add_hermitian("X", 4);
        LinearExpr obj;
        obj.trace(x, c);
        p.set_objective(Sense::Maximize, obj);
        LinearExpr tr;
        tr.trace(x, MatXcd::Identity(4, 4)).constant_term(-1.0);
        p.add_ineq("tr", tr);
        return solve(p);
    };
    ConeSolution s1 = run();
    ConeSolution s2 = run();
    CHECK(s1.objective_value == s2.objective_value); // bitwise
    CHECK((s1.herm_values.at("X") - s2.herm_values.at("X")).norm() == 0.0);
    CHECK(s1.iterations == s2.iterations);
}

TEST_CASE("program dump is stable and reflects the builder") {
    ConeProgram p;
    auto x = p.add_hermitian("X", 2);
    auto t = p.add_scalar("t");
    MatXcd c(2, 2);
    c << cxd(1, 0), cxd(0.5, -0.25), cxd(0.5, 0.25), cxd(2, 0);
    LinearExpr obj;
    obj.trace(x, c).scalar(t, 3.0);
    p.set_objective(Sense::Maximize, obj);
    LinearExpr con;
    con.scalar(t, 1.0).constant_term(-1.0);
    p.add_ineq("cap", con);

    std::string d1 = p.dump_string();
    std::string d2 = p.dump_string();
    CHECK(d1 == d2);
    CHECK(d1.find("coneprogram v1") == 0);
    CHECK(d1.find("var herm X 2") != std::string::npos);
    CHECK(d1.find("ineq cap:") != std::string::npos);
}

TEST_CASE("validate rejects malformed programs") {
    ConeProgram p;
    auto x = p.add_hermitian("X", 2);
    LinearExpr obj;
    obj.trace(x, MatXcd::Identity(3, 3)); // wrong side
    p.set_objective(Sense::Minimize, obj);
    CHECK_THROWS_AS(p.validate(), DimensionMismatch);

    ConeProgram q;
    q.add_scalar("a");
    q.add_scalar("a");
    CHECK_THROWS_AS(q.validate(), InvalidConfig);
}
