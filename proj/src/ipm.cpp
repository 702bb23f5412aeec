#include "ipm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "hermitian.hpp"

namespace wpcj {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int ConeLayout::rows() const {
    int m = nonneg;
    for (int d : soc_dims) m += d;
    for (int p : psd_sides) m += svec_dim(p);
    return m;
}

int ConeLayout::degree() const {
    int deg = nonneg + static_cast<int>(soc_dims.size());
    for (int p : psd_sides) deg += p;
    return deg;
}

namespace {

struct Scaling {
    VecXd w_orth; // sqrt(s/z)
    struct Soc {
        double eta = 1.0;
        VecXd wbar;
    };
    std::vector<Soc> socs;
    std::vector<MatXd> r, rti; // per PSD block
    std::vector<VecXd> sig;    // PSD lambda diagonal
};

template <class FOrth, class FSoc, class FPsd>
void for_blocks(const ConeLayout& lay, FOrth forth, FSoc fsoc, FPsd fpsd) {
    int off = 0;
    if (lay.nonneg > 0) {
        forth(off, lay.nonneg);
        off += lay.nonneg;
    }
    for (size_t i = 0; i < lay.soc_dims.size(); ++i) {
        fsoc(static_cast<int>(i), off, lay.soc_dims[i]);
        off += lay.soc_dims[i];
    }
    for (size_t i = 0; i < lay.psd_sides.size(); ++i) {
        const int side = lay.psd_sides[i];
        fpsd(static_cast<int>(i), off, side);
        off += svec_dim(side);
    }
}

VecXd cone_identity(const ConeLayout& lay) {
    VecXd e = VecXd::Zero(lay.rows());
    for_blocks(
        lay, [&](int off, int d) { e.segment(off, d).setOnes(); }, [&](int, int off, int) { e[off] = 1.0; },
        [&](int, int off, int side) { e.segment(off, svec_dim(side)) = svec(MatXd::Identity(side, side)); });
    return e;
}

// Smallest Jordan eigenvalue of a point (used to push starts into the cone).
double min_eig_like(const ConeLayout& lay, const VecXd& v) {
    double me = kInf;
    for_blocks(
        lay, [&](int off, int d) { me = std::min(me, v.segment(off, d).minCoeff()); },
        [&](int, int off, int d) { me = std::min(me, v[off] - v.segment(off + 1, d - 1).norm()); },
        [&](int, int off, int side) {
            Eigen::SelfAdjointEigenSolver<MatXd> eig(smat(v.segment(off, svec_dim(side)), side),
                                                     Eigen::EigenvaluesOnly);
            me = std::min(me, eig.eigenvalues().minCoeff());
        });
    return me == kInf ? 1.0 : me;
}

bool compute_scaling(const ConeLayout& lay, const VecXd& s, const VecXd& z, Scaling& w) {
    bool ok = true;
    w.socs.assign(lay.soc_dims.size(), {});
    w.r.assign(lay.psd_sides.size(), {});
    w.rti.assign(lay.psd_sides.size(), {});
    w.sig.assign(lay.psd_sides.size(), {});
    for_blocks(
        lay,
        [&](int off, int d) {
            if ((s.segment(off, d).minCoeff() <= 0.0) || (z.segment(off, d).minCoeff() <= 0.0)) {
                ok = false;
                return;
            }
            w.w_orth = (s.segment(off, d).array() / z.segment(off, d).array()).sqrt();
        },
        [&](int i, int off, int d) {
            const VecXd sb = s.segment(off, d);
            const VecXd zb = z.segment(off, d);
            const double sres = sb[0] * sb[0] - sb.tail(d - 1).squaredNorm();
            const double zres = zb[0] * zb[0] - zb.tail(d - 1).squaredNorm();
            if (sres <= 0.0 || zres <= 0.0 || sb[0] <= 0.0 || zb[0] <= 0.0) {
                ok = false;
                return;
            }
            VecXd sbar = sb / std::sqrt(sres);
            VecXd zbar = zb / std::sqrt(zres);
            const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
            VecXd jz = zbar;
            jz.tail(d - 1) = -jz.tail(d - 1);
            w.socs[i].eta = std::pow(sres / zres, 0.25);
            w.socs[i].wbar = (sbar + jz) / (2.0 * gamma);
        },
        [&](int i, int off, int side) {
            const int sd = svec_dim(side);
            MatXd ms = smat(s.segment(off, sd), side);
            MatXd mz = smat(z.segment(off, sd), side);
            Eigen::LLT<MatXd> ls(ms);
            Eigen::LLT<MatXd> lz(mz);
            if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) {
                ls.compute(ms + 1e-14 * std::max(1.0, ms.trace()) * MatXd::Identity(side, side));
                lz.compute(mz + 1e-14 * std::max(1.0, mz.trace()) * MatXd::Identity(side, side));
                if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) {
                    ok = false;
                    return;
                }
            }
            MatXd lsm = ls.matrixL();
            MatXd lzm = lz.matrixL();
            Eigen::JacobiSVD<MatXd> svd(lzm.transpose() * lsm, Eigen::ComputeFullU | Eigen::ComputeFullV);
            VecXd sig = svd.singularValues();
            if (sig.minCoeff() <= 0.0) {
                ok = false;
                return;
            }
            VecXd isqrt = sig.array().sqrt().inverse();
            w.r[i] = lsm * svd.matrixV() * isqrt.asDiagonal();
            w.rti[i] = lzm * svd.matrixU() * isqrt.asDiagonal();
            w.sig[i] = std::move(sig);
        });
    return ok;
}

enum class WOp { W, WT, Winv, WinvT };

// Applies the Nesterov-Todd scaling (or its transpose/inverse) blockwise.
void apply_scaling(const ConeLayout& lay, const Scaling& w, WOp op, const VecXd& in, VecXd& out) {
    out.resize(in.size());
    for_blocks(
        lay,
        [&](int off, int d) {
            if (op == WOp::W || op == WOp::WT)
                out.segment(off, d) = w.w_orth.array() * in.segment(off, d).array();
            else
                out.segment(off, d) = in.segment(off, d).array() / w.w_orth.array();
        },
        [&](int i, int off, int d) {
            // W = eta * [[w0, w1'], [w1, I + w1 w1'/(1+w0)]]; W^{-1} = J W J / eta^2.
            const auto& sc = w.socs[i];
            const double w0 = sc.wbar[0];
            const auto w1 = sc.wbar.tail(d - 1);
            const double u0 = in[off];
            const auto u1 = in.segment(off + 1, d - 1);
            const double p = w1.dot(u1);
            if (op == WOp::W || op == WOp::WT) {
                out[off] = sc.eta * (w0 * u0 + p);
                out.segment(off + 1, d - 1) = sc.eta * (u0 * w1 + u1 + (p / (1.0 + w0)) * w1);
            } else {
                out[off] = (w0 * u0 - p) / sc.eta;
                out.segment(off + 1, d - 1) = (u1 - u0 * w1 + (p / (1.0 + w0)) * w1) / sc.eta;
            }
        },
        [&](int i, int off, int side) {
            const int sd = svec_dim(side);
            MatXd u = smat(in.segment(off, sd), side);
            const MatXd& r = w.r[i];
            const MatXd& rti = w.rti[i];
            MatXd res;
            switch (op) {
                case WOp::W: res = r.transpose() * u * r; break;
                case WOp::WT: res = r * u * r.transpose(); break;
                case WOp::Winv: res = rti * u * rti.transpose(); break;
                case WOp::WinvT: res = rti.transpose() * u * rti; break;
            }
            out.segment(off, sd) = svec(res);
        });
}

VecXd apply_scaling(const ConeLayout& lay, const Scaling& w, WOp op, const VecXd& in) {
    VecXd out;
    apply_scaling(lay, w, op, in, out);
    return out;
}

VecXd jordan_prod(const ConeLayout& lay, const VecXd& u, const VecXd& v) {
    VecXd out(u.size());
    for_blocks(
        lay,
        [&](int off, int d) {
            out.segment(off, d) = u.segment(off, d).array() * v.segment(off, d).array();
        },
        [&](int, int off, int d) {
            const double u0 = u[off];
            const double v0 = v[off];
            out[off] = u.segment(off, d).dot(v.segment(off, d));
            out.segment(off + 1, d - 1) =
                u0 * v.segment(off + 1, d - 1) + v0 * u.segment(off + 1, d - 1);
        },
        [&](int, int off, int side) {
            const int sd = svec_dim(side);
            MatXd a = smat(u.segment(off, sd), side);
            MatXd b = smat(v.segment(off, sd), side);
            out.segment(off, sd) = svec(0.5 * (a * b + b * a));
        });
    return out;
}

// Solves lambda o u = d for u; lambda is the scaling point (diagonal in the
// scaled frame for PSD blocks).
VecXd jordan_div(const ConeLayout& lay, const Scaling& w, const VecXd& lambda, const VecXd& d) {
    VecXd out(d.size());
    for_blocks(
        lay,
        [&](int off, int n) {
            out.segment(off, n) = d.segment(off, n).array() / lambda.segment(off, n).array();
        },
        [&](int, int off, int n) {
            const double l0 = lambda[off];
            const auto lbar = lambda.segment(off + 1, n - 1);
            const double aa = l0 * l0 - lbar.squaredNorm();
            const double d0 = d[off];
            const auto dbar = d.segment(off + 1, n - 1);
            const double u0 = (l0 * d0 - lbar.dot(dbar)) / aa;
            out[off] = u0;
            out.segment(off + 1, n - 1) = (dbar - u0 * lbar) / l0;
        },
        [&](int i, int off, int side) {
            const int sd = svec_dim(side);
            MatXd dm = smat(d.segment(off, sd), side);
            const VecXd& sig = w.sig[i];
            for (int c = 0; c < side; ++c)
                for (int r2 = 0; r2 < side; ++r2) dm(r2, c) = 2.0 * dm(r2, c) / (sig[r2] + sig[c]);
            out.segment(off, sd) = svec(dm);
        });
    return out;
}

// Largest step alpha keeping lambda + alpha * dir in the cone.
double max_step_from(const ConeLayout& lay, const Scaling& w, const VecXd& lambda, const VecXd& dir) {
    double alpha = kInf;
    for_blocks(
        lay,
        [&](int off, int d) {
            for (int k = 0; k < d; ++k)
                if (dir[off + k] < 0.0) alpha = std::min(alpha, -lambda[off + k] / dir[off + k]);
        },
        [&](int, int off, int d) {
            const double l0 = lambda[off];
            const auto lbar = lambda.segment(off + 1, d - 1);
            const double g0 = dir[off];
            const auto gbar = dir.segment(off + 1, d - 1);
            const double a = g0 * g0 - gbar.squaredNorm();
            const double b = 2.0 * (l0 * g0 - lbar.dot(gbar));
            const double c = l0 * l0 - lbar.squaredNorm();
            double root = kInf;
            if (std::abs(a) < 1e-300) {
                if (b < 0.0) root = -c / b;
            } else {
                const double disc = b * b - 4.0 * a * c;
                if (disc >= 0.0) {
                    const double sq = std::sqrt(disc);
                    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
                    double r1 = q / a;
                    double r2 = (q != 0.0) ? c / q : kInf;
                    if (r1 > r2) std::swap(r1, r2);
                    if (r1 > 0.0)
                        root = r1;
                    else if (r2 > 0.0)
                        root = r2;
                }
            }
            if (g0 < 0.0) root = std::min(root, -l0 / g0);
            alpha = std::min(alpha, root);
        },
        [&](int i, int off, int side) {
            const int sd = svec_dim(side);
            MatXd dm = smat(dir.segment(off, sd), side);
            const VecXd& sig = w.sig[i];
            VecXd isq = sig.array().sqrt().inverse();
            MatXd m = isq.asDiagonal() * dm * isq.asDiagonal();
            Eigen::SelfAdjointEigenSolver<MatXd> eig(m, Eigen::EigenvaluesOnly);
            const double mn = eig.eigenvalues().minCoeff();
            if (mn < 0.0) alpha = std::min(alpha, -1.0 / mn);
        });
    return alpha;
}

// Sparse view of the PSD segments of G's columns; the Hermitian embedding
// rows carry O(1) entries per column, which makes W^{-T} G cheap.
struct PsdColumnPattern {
    struct Entry {
        int r, c;
        double v;
    };
    std::vector<std::vector<std::vector<Entry>>> entries; // [block][col]
};

PsdColumnPattern analyze_columns(const ConeLayout& lay, const MatXd& g) {
    PsdColumnPattern pat;
    const int n = static_cast<int>(g.cols());
    for_blocks(
        lay, [&](int, int) {}, [&](int, int, int) {},
        [&](int, int off, int side) {
            pat.entries.emplace_back();
            auto& block = pat.entries.back();
            block.resize(n);
            for (int col = 0; col < n; ++col) {
                int k = off;
                for (int j = 0; j < side; ++j) {
                    double v = g(k++, col);
                    if (v != 0.0) block[col].push_back({j, j, v});
                    for (int r2 = j + 1; r2 < side; ++r2) {
                        v = g(k++, col);
                        if (v != 0.0) block[col].push_back({r2, j, v / 1.4142135623730951});
                    }
                }
            }
        });
    return pat;
}

// gs = W^{-T} G.
void scale_matrix(const ConeLayout& lay, const Scaling& w, const MatXd& g, const PsdColumnPattern& pat,
                  MatXd& gs) {
    const int n = static_cast<int>(g.cols());
    gs.resize(g.rows(), n);
    for_blocks(
        lay,
        [&](int off, int d) {
            gs.middleRows(off, d) = w.w_orth.cwiseInverse().asDiagonal() * g.middleRows(off, d);
        },
        [&](int i, int off, int d) {
            const auto& sc = w.socs[i];
            const double w0 = sc.wbar[0];
            const VecXd w1 = sc.wbar.tail(d - 1);
            const auto r0 = g.row(off);
            const auto rt = g.middleRows(off + 1, d - 1);
            Eigen::RowVectorXd proj = w1.transpose() * rt;
            gs.row(off) = (w0 * r0 - proj) / sc.eta;
            gs.middleRows(off + 1, d - 1) = (rt - w1 * r0 + w1 * (proj / (1.0 + w0))) / sc.eta;
        },
        [&](int i, int off, int side) {
            const int sd = svec_dim(side);
            const MatXd& rti = w.rti[i];
            const auto& block = pat.entries[i];
            MatXd acc(side, side);
            for (int col = 0; col < n; ++col) {
                const auto& ents = block[col];
                if (ents.empty()) {
                    gs.col(col).segment(off, sd).setZero();
                    continue;
                }
                if (static_cast<int>(ents.size()) > 2 * side) {
                    MatXd u = smat(g.col(col).segment(off, sd), side);
                    acc.noalias() = rti.transpose() * u * rti;
                } else {
                    acc.setZero();
                    for (const auto& e : ents) {
                        const VecXd rr = rti.row(e.r).transpose();
                        const VecXd rc = rti.row(e.c).transpose();
                        if (e.r == e.c) {
                            acc.noalias() += e.v * rr * rc.transpose();
                        } else {
                            acc.noalias() += e.v * rr * rc.transpose();
                            acc.noalias() += e.v * rc * rr.transpose();
                        }
                    }
                }
                gs.col(col).segment(off, sd) = svec(0.5 * (acc + acc.transpose()));
            }
        });
}

// Factors [0 A' G'; A 0 0; G 0 -W'W] via the Schur complement on x. The
// x-block system (W^{-T}G)'(W^{-T}G) dx = rhs is solved through a QR
// factorization of W^{-T}G, which keeps the effective condition number at
// kappa(W^{-T}G) rather than its square.
struct KktSolver {
    const ConeLayout& lay;
    const MatXd& a;
    const MatXd& g;
    const Scaling& w;
    MatXd gs; // W^{-T} G
    Eigen::HouseholderQR<MatXd> qr;
    MatXd r_mat; // upper-triangular factor of gs
    MatXd hi_at;                        // H^{-1} A'
    Eigen::PartialPivLU<MatXd> schur_a; // A H^{-1} A'
    int refine_rounds;
    bool good = false;

    KktSolver(const ConeLayout& l, const MatXd& amat, const MatXd& gmat, const Scaling& sc,
              const PsdColumnPattern& pat, double reg, int refine)
        : lay(l), a(amat), g(gmat), w(sc), refine_rounds(refine) {
        (void)reg;
        scale_matrix(lay, w, g, pat, gs);
        const int n = static_cast<int>(g.cols());
        if (g.rows() < n) return;
        qr.compute(gs);
        r_mat = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        if (!(r_mat.diagonal().cwiseAbs().minCoeff() > 0.0)) return;
        if (a.rows() > 0) {
            hi_at.resize(n, a.rows());
            for (int j = 0; j < a.rows(); ++j) hi_at.col(j) = hsolve(a.row(j).transpose());
            schur_a.compute(a * hi_at);
        }
        good = true;
    }

    // (G~' G~)^{-1} v via two triangular solves with R.
    VecXd hsolve(const VecXd& v) const {
        VecXd u = r_mat.triangularView<Eigen::Upper>().transpose().solve(v);
        return r_mat.triangularView<Eigen::Upper>().solve(u);
    }

    // Returns the final relative residual of the 3x3 system so the caller
    // can tell when the factorization has run out of accuracy.
    double solve(const VecXd& bx, const VecXd& by, const VecXd& bz, VecXd& dx, VecXd& dy,
                 VecXd& dz) const {
        solve_once(bx, by, bz, dx, dy, dz);
        const double rhs_norm = std::max({bx.norm(), by.norm(), bz.norm(), 1e-300});
        double prev = std::numeric_limits<double>::infinity();
        for (int r = 0; r < refine_rounds; ++r) {
            VecXd r1 = bx - (a.rows() > 0 ? VecXd(a.transpose() * dy) : VecXd::Zero(dx.size())) -
                       g.transpose() * dz;
            VecXd r2 = by;
            if (a.rows() > 0) r2 -= a * dx;
            VecXd wdz = apply_scaling(lay, w, WOp::W, dz);
            VecXd r3 = bz - (g * dx - apply_scaling(lay, w, WOp::WT, wdz));
            const double rn = std::max({r1.norm(), r2.norm(), r3.norm()});
            if (rn <= 1e-14 * rhs_norm) return rn / rhs_norm;
            if (rn >= 0.9 * prev && r > 0) return std::min(rn, prev) / rhs_norm;
            prev = rn;
            VecXd cx, cy, cz;
            solve_once(r1, r2, r3, cx, cy, cz);
            VecXd nx = dx + cx, ny = dy + cy, nz = dz + cz;
            // re-measure; keep the correction only if it helped
            VecXd q1 = bx - (a.rows() > 0 ? VecXd(a.transpose() * ny) : VecXd::Zero(nx.size())) -
                       g.transpose() * nz;
            VecXd q2 = by;
            if (a.rows() > 0) q2 -= a * nx;
            VecXd wnz = apply_scaling(lay, w, WOp::W, nz);
            VecXd q3 = bz - (g * nx - apply_scaling(lay, w, WOp::WT, wnz));
            const double qn = std::max({q1.norm(), q2.norm(), q3.norm()});
            if (qn >= rn) return rn / rhs_norm;
            dx = std::move(nx);
            dy = std::move(ny);
            dz = std::move(nz);
        }
        return prev / rhs_norm;
    }

  private:
    void solve_once(const VecXd& bx, const VecXd& by, const VecXd& bz, VecXd& dx, VecXd& dy,
                    VecXd& dz) const {
        const int n = static_cast<int>(g.cols());
        VecXd bzs = apply_scaling(lay, w, WOp::WinvT, bz);
        // (R'R) t1 = bx + G~' bzs  solved as  R t1 = R^{-T} bx + (Q' bzs)_n
        VecXd u = r_mat.triangularView<Eigen::Upper>().transpose().solve(bx);
        u += (qr.householderQ().transpose() * bzs).head(n);
        VecXd t1 = r_mat.triangularView<Eigen::Upper>().solve(u);
        if (a.rows() > 0) {
            dy = schur_a.solve(a * t1 - by);
            dx = t1 - hi_at * dy;
        } else {
            dy.resize(0);
            dx = t1;
        }
        VecXd t2 = gs * dx - bzs;
        dz = apply_scaling(lay, w, WOp::Winv, t2);
    }
};

} // namespace

IpmResult solve_conelp(const VecXd& c, const MatXd& a, const VecXd& b, const MatXd& g, const VecXd& h,
                       const ConeLayout& layout, const IpmOptions& opts) {
    IpmResult res;
    const int n = static_cast<int>(g.cols());
    const int m = static_cast<int>(g.rows());
    const int p = static_cast<int>(a.rows());
    if (m != layout.rows() || m != h.size() || n != c.size() || (p > 0 && a.cols() != n) || p != b.size())
        throw std::invalid_argument("solve_conelp: inconsistent dimensions");

    static const bool verbose = std::getenv("WPCJ_IPM_VERBOSE") != nullptr;
    const VecXd e = cone_identity(layout);
    const double deg = layout.degree();
    const double resx0 = std::max(1.0, c.norm());
    const double resy0 = std::max(1.0, b.norm());
    const double resz0 = std::max(1.0, h.norm());
    const PsdColumnPattern pattern = analyze_columns(layout, g);

    // Initial point: least-squares primal/dual pushed into the cone interior.
    VecXd x, y, s, z;
    {
        MatXd h0m = MatXd::Zero(n, n);
        h0m.selfadjointView<Eigen::Lower>().rankUpdate(g.transpose());
        h0m.diagonal().array() += std::max(opts.static_reg, 1e-12) * (1.0 + h0m.diagonal().maxCoeff());
        Eigen::LLT<MatXd> llt0(h0m.selfadjointView<Eigen::Lower>());
        if (llt0.info() != Eigen::Success) {
            res.status = IpmStatus::NumericalFailure;
            return res;
        }
        MatXd hi_at;
        Eigen::PartialPivLU<MatXd> schur;
        if (p > 0) {
            hi_at = llt0.solve(a.transpose());
            schur.compute(a * hi_at);
        }
        auto init_solve = [&](const VecXd& bx, const VecXd& by, VecXd& ox, VecXd& oy) {
            VecXd t1 = llt0.solve(bx);
            if (p > 0) {
                oy = schur.solve(a * t1 - by);
                ox = t1 - hi_at * oy;
            } else {
                oy.resize(0);
                ox = t1;
            }
        };
        VecXd ytmp;
        init_solve(g.transpose() * h, b, x, ytmp);
        s = h - g * x;
        double me = min_eig_like(layout, s);
        if (me < 1e-8) s += (1.0 - me) * e;
        VecXd u;
        init_solve(-c, VecXd::Zero(p), u, y);
        z = g * u;
        me = min_eig_like(layout, z);
        if (me < 1e-8) z += (1.0 - me) * e;
    }
    double tau = 1.0, kappa = 1.0;

    // Track the best iterate seen; late iterations can lose feasibility to
    // rounding once the gap outruns the attainable residual floor.
    struct Snapshot {
        double score = kInf;
        VecXd x, y, s, z;
        double tau = 1.0;
        double pres = 0.0, dres = 0.0, gap = 0.0, pcost = 0.0, dcost = 0.0;
        int iter = 0;
    } best;

    auto finish_from_best = [&](IpmResult& out) {
        if (best.score > std::max(opts.feastol, opts.reltol)) return false;
        out.status = IpmStatus::Optimal;
        out.x = best.x / best.tau;
        out.y = (p > 0) ? VecXd(best.y / best.tau) : VecXd();
        out.s = best.s / best.tau;
        out.z = best.z / best.tau;
        out.pobj = best.pcost;
        out.dobj = best.dcost;
        out.iterations = best.iter;
        out.primal_residual = best.pres;
        out.dual_residual = best.dres;
        out.gap = best.gap;
        return true;
    };

    Scaling w;
    for (int iter = 0; iter <= opts.max_iters; ++iter) {
        VecXd rx = g.transpose() * z + c * tau;
        if (p > 0) rx += a.transpose() * y;
        VecXd ry = (p > 0) ? VecXd(a * x - b * tau) : VecXd();
        VecXd rz = g * x + s - h * tau;
        const double cx = c.dot(x);
        const double by_hz = (p > 0 ? b.dot(y) : 0.0) + h.dot(z);
        const double rt = kappa + cx + by_hz;

        const double pcost = cx / tau;
        const double dcost = -by_hz / tau;
        const double gap = s.dot(z);
        // Residuals are measured relative to the iterate magnitudes so that
        // problems whose solutions span many orders of magnitude terminate
        // at a meaningful relative accuracy.
        const double primal_scale = resz0 + s.norm() / tau;
        const double dual_scale = resx0 + (rx - c * tau).norm() / tau;
        const double pres =
            std::max(rz.norm() / primal_scale, p > 0 ? ry.norm() / (resy0 + s.norm() / tau) : 0.0) / tau;
        const double dres = rx.norm() / dual_scale / tau;
        const double relgap = gap / (tau * tau) / std::max(1.0, std::abs(pcost));

        res.iterations = iter;
        res.primal_residual = pres;
        res.dual_residual = dres;
        res.gap = gap / (tau * tau);

        if (verbose)
            std::fprintf(stderr, "ipm %3d: pcost=% .6e pres=%.2e dres=%.2e relgap=%.2e tau=%.2e kappa=%.2e\n",
                         iter, pcost, pres, dres, relgap, tau, kappa);

        const double score = std::max({pres, dres, std::max(relgap, 0.0)});
        if (score < best.score) {
            best = {score, x, y, s, z, tau, pres, dres, gap / (tau * tau), pcost, dcost, iter};
        }

        if (pres <= opts.feastol && dres <= opts.feastol && relgap <= opts.reltol) {
            res.status = IpmStatus::Optimal;
            res.x = x / tau;
            res.y = (p > 0) ? VecXd(y / tau) : VecXd();
            res.s = s / tau;
            res.z = z / tau;
            res.pobj = pcost;
            res.dobj = dcost;
            return res;
        }
        if (iter - best.iter >= 8 && finish_from_best(res)) return res;
        // Certificate residuals are normalized by the certificate's own size,
        // so a large-norm iterate cannot trigger a spurious declaration.
        if (by_hz < 0.0) {
            const double scale = -1.0 / by_hz;
            VecXd atz = g.transpose() * z;
            if (p > 0) atz += a.transpose() * y;
            const double denom = 1.0 + scale * (z.norm() + (p > 0 ? y.norm() : 0.0));
            if (atz.norm() * scale / denom <= std::min(1e-9, 0.01 * opts.feastol)) {
                res.status = IpmStatus::PrimalInfeasible;
                res.y = (p > 0) ? VecXd(y * scale) : VecXd();
                res.z = z * scale;
                res.x = VecXd::Zero(n);
                res.s = VecXd::Zero(m);
                return res;
            }
        }
        if (cx < 0.0) {
            const double scale = -1.0 / cx;
            const double denom = 1.0 + scale * (x.norm() + s.norm());
            const double pr = std::max((g * x + s).norm(), p > 0 ? (a * x).norm() : 0.0);
            if (pr * scale / denom <= std::min(1e-9, 0.01 * opts.feastol)) {
                res.status = IpmStatus::DualInfeasible;
                res.x = x * scale;
                res.s = s * scale;
                res.y = VecXd::Zero(p);
                res.z = VecXd::Zero(m);
                return res;
            }
        }
        if (iter == opts.max_iters) break;
        if (tau <= 1e-12 * std::max(1.0, kappa)) {
            if (finish_from_best(res)) return res;
            res.status = IpmStatus::NumericalFailure;
            return res;
        }

        const double mu = (gap + tau * kappa) / (deg + 1.0);

        if (!compute_scaling(layout, s, z, w)) {
            if (finish_from_best(res)) return res;
            res.status = IpmStatus::NumericalFailure;
            return res;
        }
        VecXd lambda = apply_scaling(layout, w, WOp::W, z);

        KktSolver kkt(layout, a, g, w, pattern, opts.static_reg, opts.refine_rounds);
        if (!kkt.good) {
            if (finish_from_best(res)) return res;
            res.status = IpmStatus::NumericalFailure;
            return res;
        }

        VecXd x1, y1, z1;
        double solve_quality = kkt.solve(-c, b, h, x1, y1, z1);
        const double denom = c.dot(x1) + (p > 0 ? b.dot(y1) : 0.0) + h.dot(z1) - kappa / tau;

        auto direction = [&](double eta, const VecXd& ds_c, double dk_c, VecXd& dx, VecXd& dy, VecXd& dz,
                             VecXd& ds, double& dtau, double& dkappa) {
            VecXd lds = jordan_div(layout, w, lambda, ds_c);
            VecXd bz = -eta * rz - apply_scaling(layout, w, WOp::WT, lds);
            VecXd x2, y2, z2;
            solve_quality = std::max(solve_quality,
                                     kkt.solve(-eta * rx, p > 0 ? VecXd(-eta * ry) : VecXd(), bz, x2, y2, z2));
            dtau = (-eta * rt - c.dot(x2) - (p > 0 ? b.dot(y2) : 0.0) - h.dot(z2) - dk_c / tau) / denom;
            dx = x2 + dtau * x1;
            if (p > 0) dy = y2 + dtau * y1;
            dz = z2 + dtau * z1;
            VecXd wdz = apply_scaling(layout, w, WOp::W, dz);
            ds = apply_scaling(layout, w, WOp::WT, lds - wdz);
            dkappa = (dk_c - kappa * dtau) / tau;
        };

        auto step_bound = [&](const VecXd& dz, const VecXd& ds, double dtau, double dkappa) {
            VecXd ds_sc = apply_scaling(layout, w, WOp::WinvT, ds);
            VecXd dz_sc = apply_scaling(layout, w, WOp::W, dz);
            double alpha = std::min(max_step_from(layout, w, lambda, ds_sc),
                                    max_step_from(layout, w, lambda, dz_sc));
            if (dtau < 0.0) alpha = std::min(alpha, -tau / dtau);
            if (dkappa < 0.0) alpha = std::min(alpha, -kappa / dkappa);
            return alpha;
        };

        VecXd dxa, dya, dza, dsa;
        double dtaua, dkappaa;
        direction(1.0, -jordan_prod(layout, lambda, lambda), -tau * kappa, dxa, dya, dza, dsa, dtaua,
                  dkappaa);
        const double alpha_aff = std::min(1.0, step_bound(dza, dsa, dtaua, dkappaa));
        double sigma = std::pow(1.0 - alpha_aff, 3);
        sigma = std::min(std::max(sigma, 1e-8), 0.999);

        VecXd gamma = jordan_prod(layout, apply_scaling(layout, w, WOp::WinvT, dsa),
                                  apply_scaling(layout, w, WOp::W, dza));
        VecXd ds_c = sigma * mu * e - jordan_prod(layout, lambda, lambda) - gamma;
        const double dk_c = sigma * mu - tau * kappa - dtaua * dkappaa;
        VecXd dx, dy, dz, ds;
        double dtau, dkappa;
        direction(1.0 - sigma, ds_c, dk_c, dx, dy, dz, ds, dtau, dkappa);

        double alpha = opts.step_damping * step_bound(dz, ds, dtau, dkappa);
        alpha = std::min(alpha, 1.0);
        if (!(alpha > 1e-13) || !std::isfinite(alpha) || !std::isfinite(solve_quality)) {
            if (finish_from_best(res)) return res;
            res.status = IpmStatus::NumericalFailure;
            return res;
        }

        if (verbose)
            std::fprintf(stderr, "        alpha_aff=%.3e sigma=%.3e alpha=%.3e |x|=%.2e |z|=%.2e\n",
                         alpha_aff, sigma, alpha, x.norm(), z.norm());

        x += alpha * dx;
        if (p > 0) y += alpha * dy;
        z += alpha * dz;
        s += alpha * ds;
        tau += alpha * dtau;
        kappa += alpha * dkappa;
    }

    if (finish_from_best(res)) return res;
    res.status = IpmStatus::IterationLimit;
    res.x = x / tau;
    res.y = (p > 0) ? VecXd(y / tau) : VecXd();
    res.s = s / tau;
    res.z = z / tau;
    res.pobj = c.dot(x) / tau;
    res.dobj = -((p > 0 ? b.dot(y) : 0.0) + h.dot(z)) / tau;
    return res;
}

} // namespace wpcj
