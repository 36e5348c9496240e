#pragma once

#include "derham/mesh.hpp"
#include "derham/sparse.hpp"

namespace derham {

// Lowest-order tensor-product elements on the hexahedral grid, one space per
// form degree: trilinear nodal (0), first-kind Nedelec edge (1), Raviart-Thomas
// face (2) and piecewise-constant cell (3) functions.
//
// Bases are normalized to unit magnitude: the coefficient of a basis function
// is the point value at a node, the tangential component along an edge, the
// normal component on a face, or the cell value. Every Gram matrix then
// scales like h^3, and the discrete differential in coefficient space is the
// signed incidence matrix divided by h.

/// Gram matrix <v_i, v_j> of the degree-`degree` space, integrated exactly.
CsrMatrix assemble_mass(const StructuredMesh& mesh, int degree);

/// Coefficient-space d^degree: incidence(mesh, degree) / h.
CsrMatrix differential(const StructuredMesh& mesh, int degree);

/// Prolongation between consecutive levels in the unit-magnitude
/// normalization. It is the exact embedding of the coarse space, so the
/// transpose is the matching restriction.
CsrMatrix prolongation(const StructuredMesh& coarse, const StructuredMesh& fine, int degree);

/// Diagonal stand-in for the inverse of the (k-1)-form mass matrix.
struct USpec {
    double scale = 0.0;

    /// 5 / h^3, mirroring the 1/h^d growth of the inverse mass matrix.
    static USpec standard(double h);
    CsrMatrix matrix(Index size) const;
};

/// Matrices of the d*d problem on V^k together with its neighbours V^(k-1), V^(k+1).
struct ComplexOperators {
    int k = 1;
    double c = 1.0;
    double u_scale = 0.0;
    CsrMatrix A;     // <d v_i, d v_j>, N x N
    CsrMatrix B;     // D_{k-1}^T M_k, M x N
    CsrMatrix Mk;    // N x N
    CsrMatrix Mkm1;  // M x M
    CsrMatrix Mkp1;
    CsrMatrix U;     // M x M diagonal
    CsrMatrix Dk;    // coefficient differential V^k -> V^(k+1)
    CsrMatrix Dkm1;  // coefficient differential V^(k-1) -> V^k

    Index size() const noexcept { return Mk.rows(); }
};

ComplexOperators build_operators(const StructuredMesh& mesh, int k, double c, const USpec& u);
/// Uses USpec::standard(mesh.h()).
ComplexOperators build_operators(const StructuredMesh& mesh, int k, double c);

/// B^T U B, N x N.
CsrMatrix auxiliary_term(const ComplexOperators& ops);
/// A + B^T U B + c M_k
CsrMatrix build_auxiliary_matrix(const ComplexOperators& ops);
/// A + B^T U B + shift M_k, for callers that need a different shift than ops.c.
CsrMatrix build_auxiliary_matrix(const ComplexOperators& ops, double shift);
/// A + c M_k
CsrMatrix build_original_matrix(const ComplexOperators& ops);

}  // namespace derham
