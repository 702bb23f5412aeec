#pragma once

#include "dense.hpp"

namespace wpcj {

// Symmetric vectorization with sqrt(2)-scaled off-diagonals so that
// dot(svec(X), svec(Y)) == trace(X*Y). Column-major lower triangle.
int svec_dim(int side);
VecXd svec(const MatXd& x);
MatXd smat(const VecXd& v, int side);

// Real-symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian
// matrix. H >= 0 iff the embedding >= 0; the trace doubles.
MatXd hermitian_embed(const MatXcd& h, double herm_tol = 1e-10);

// Inverse of hermitian_embed restricted to the embedded subspace; a general
// symmetric 2n x 2n argument is first projected onto that subspace.
MatXcd hermitian_unembed(const MatXd& y);

// Real degrees of freedom of a Hermitian n x n matrix, n^2 of them:
// for each column j, H(j,j), then (Re H(i,j), Im H(i,j)) for i > j.
int herm_dof_dim(int side);
VecXd herm_pack(const MatXcd& h);
MatXcd herm_unpack(const VecXd& u, int side);

// Coefficient vector g with g.dot(herm_pack(H)) == Re trace(C * H)
// for every Hermitian H.
VecXd herm_trace_coeffs(const MatXcd& c);

bool is_hermitian(const MatXcd& h, double tol = 1e-10);

} // namespace wpcj
