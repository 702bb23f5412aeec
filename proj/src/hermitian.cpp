#include "hermitian.hpp"

#include <cmath>

#include "errors.hpp"

namespace wpcj {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

int svec_dim(int side) { return side * (side + 1) / 2; }

VecXd svec(const MatXd& x) {
    const int d = static_cast<int>(x.rows());
    VecXd v(svec_dim(d));
    int k = 0;
    for (int j = 0; j < d; ++j) {
        v[k++] = x(j, j);
        for (int i = j + 1; i < d; ++i) v[k++] = kSqrt2 * x(i, j);
    }
    return v;
}

MatXd smat(const VecXd& v, int side) {
    MatXd x(side, side);
    int k = 0;
    for (int j = 0; j < side; ++j) {
        x(j, j) = v[k++];
        for (int i = j + 1; i < side; ++i) {
            const double val = v[k++] / kSqrt2;
            x(i, j) = val;
            x(j, i) = val;
        }
    }
    return x;
}

bool is_hermitian(const MatXcd& h, double tol) {
    if (h.rows() != h.cols()) return false;
    return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, h.cwiseAbs().maxCoeff());
}

MatXd hermitian_embed(const MatXcd& h, double herm_tol) {
    if (!is_hermitian(h, herm_tol)) throw DimensionMismatch("hermitian_embed: input is not Hermitian");
    const int n = static_cast<int>(h.rows());
    MatXd y(2 * n, 2 * n);
    const MatXd re = h.real();
    const MatXd im = h.imag();
    y.topLeftCorner(n, n) = re;
    y.topRightCorner(n, n) = -im;
    y.bottomLeftCorner(n, n) = im;
    y.bottomRightCorner(n, n) = re;
    return y;
}

MatXcd hermitian_unembed(const MatXd& y) {
    const int n = static_cast<int>(y.rows()) / 2;
    const MatXd re = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
    const MatXd im = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
    MatXcd h = re.cast<cxd>() + cxd(0.0, 1.0) * im.cast<cxd>();
    return 0.5 * (h + h.adjoint().eval());
}

int herm_dof_dim(int side) { return side * side; }

VecXd herm_pack(const MatXcd& h) {
    const int n = static_cast<int>(h.rows());
    VecXd u(herm_dof_dim(n));
    int k = 0;
    for (int j = 0; j < n; ++j) {
        u[k++] = h(j, j).real();
        for (int i = j + 1; i < n; ++i) {
            u[k++] = h(i, j).real();
            u[k++] = h(i, j).imag();
        }
    }
    return u;
}

MatXcd herm_unpack(const VecXd& u, int side) {
    MatXcd h(side, side);
    int k = 0;
    for (int j = 0; j < side; ++j) {
        h(j, j) = u[k++];
        for (int i = j + 1; i < side; ++i) {
            const double re = u[k++];
            const double im = u[k++];
            h(i, j) = cxd(re, im);
            h(j, i) = cxd(re, -im);
        }
    }
    return h;
}

VecXd herm_trace_coeffs(const MatXcd& c) {
    const int n = static_cast<int>(c.rows());
    VecXd g(herm_dof_dim(n));
    int k = 0;
    for (int j = 0; j < n; ++j) {
        g[k++] = c(j, j).real();
        for (int i = j + 1; i < n; ++i) {
            g[k++] = 2.0 * c(i, j).real();
            g[k++] = 2.0 * c(i, j).imag();
        }
    }
    return g;
}

} // namespace wpcj
