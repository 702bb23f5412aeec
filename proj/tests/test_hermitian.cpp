#include <doctest.h>

#include <random>

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

TEST_CASE("svec is an isometry for the trace inner product") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 6;
        MatXd a(n, n), b(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                a(i, j) = nd(rng);
                b(i, j) = nd(rng);
            }
        a = (0.5 * (a + a.transpose())).eval();
        b = (0.5 * (b + b.transpose())).eval();
        CHECK(svec(a).dot(svec(b)) == doctest::Approx((a * b).trace()).epsilon(1e-12));
        CHECK((smat(svec(a), n) - a).norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("hermitian_embed of the identity") {
    CHECK((hermitian_embed(MatXcd::Identity(2, 2)) - MatXd::Identity(4, 4)).norm() ==
          doctest::Approx(0.0));
}

TEST_CASE("hermitian_embed doubles the spectrum of [[0,-i],[i,0]]") {
    MatXcd h(2, 2);
    h << cxd(0, 0), cxd(0, -1), cxd(0, 1), cxd(0, 0);
    MatXd y = hermitian_embed(h);
    Eigen::SelfAdjointEigenSolver<MatXd> eig(y);
    VecXd ev = eig.eigenvalues();
    CHECK(ev[0] == doctest::Approx(-1.0));
    CHECK(ev[1] == doctest::Approx(-1.0));
    CHECK(ev[2] == doctest::Approx(1.0));
    CHECK(ev[3] == doctest::Approx(1.0));
}

TEST_CASE("hermitian_embed preserves positive semidefiniteness") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 5;
        MatXcd a = random_hermitian(n, rng);
        MatXcd psd = a * a.adjoint(); // PSD by construction
        MatXd y = hermitian_embed(psd);
        Eigen::SelfAdjointEigenSolver<MatXd> eig(y, Eigen::EigenvaluesOnly);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, psd.norm()));
        // linearity + trace doubling
        CHECK(y.trace() == doctest::Approx(2.0 * psd.trace().real()).epsilon(1e-12));
        // round trip
        CHECK((hermitian_unembed(y) - psd).norm() == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("hermitian_embed rejects non-Hermitian input") {
    MatXcd bad(2, 2);
    bad << cxd(1, 0), cxd(2, 3), cxd(9, 9), cxd(1, 0);
    CHECK_THROWS(hermitian_embed(bad));
}

TEST_CASE("herm pack/unpack round trip and trace coefficients") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 6;
        MatXcd h = random_hermitian(n, rng);
        MatXcd c = random_hermitian(n, rng);
        CHECK((herm_unpack(herm_pack(h), n) - h).norm() == doctest::Approx(0.0));
        const double via_coeffs = herm_trace_coeffs(c).dot(herm_pack(h));
        const double direct = (c * h).trace().real();
        CHECK(via_coeffs == doctest::Approx(direct).epsilon(1e-12));
    }
}
