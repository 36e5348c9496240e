#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "derham/sparse.hpp"

namespace derham {

enum class DomainKind {
    Cube,          // [0, pi]^3
    CubeWithHole,  // [0, pi]^3 minus [pi/4, 3pi/4]^2 x [0, pi]
};

std::string_view to_string(DomainKind d);
DomainKind parse_domain(std::string_view s);

/// A lattice position for a k-dimensional entity: the lower-corner node plus
/// an axis. Edges run along `axis`; faces are normal to `axis`; nodes and
/// cells always use axis 0.
struct LatticeEntity {
    std::array<int, 3> anchor{};
    int axis = 0;
};

/// Axes spanned by an entity of the given degree.
std::array<bool, 3> spanned_axes(int degree, int axis);

/// Uniform hexahedral grid of [0, pi]^3 with n = 2^(level+1) cells per axis.
/// Entities are numbered densely in (z, y, x, axis) lexicographic order,
/// skipping those that touch no cell of the domain.
class StructuredMesh {
public:
    StructuredMesh(DomainKind domain, int level);

    DomainKind domain() const noexcept { return domain_; }
    int level() const noexcept { return level_; }
    int cells_per_axis() const noexcept { return n_; }
    double h() const noexcept { return h_; }

    /// Degree 0..3: nodes, edges, faces, cells.
    Index count(int degree) const;
    /// Dense id of a lattice entity, or -1 if it is outside the domain.
    Index id(int degree, const LatticeEntity& e) const;
    const LatticeEntity& entity(int degree, Index id) const;
    /// Barycenter in physical coordinates.
    std::array<double, 3> center(int degree, Index id) const;

    bool cell_in_domain(int x, int y, int z) const;
    long euler_characteristic() const;

    /// Number of orientations an entity of this degree can take (3 for edges and faces).
    static int orientations(int degree) { return degree == 1 || degree == 2 ? 3 : 1; }

private:
    std::size_t slot(int degree, const LatticeEntity& e) const;
    bool in_lattice(int degree, const LatticeEntity& e) const;
    bool touches_domain(int degree, const LatticeEntity& e) const;

    DomainKind domain_;
    int level_;
    int n_;
    double h_;
    std::array<std::vector<Index>, 4> slot_to_id_;
    std::array<std::vector<LatticeEntity>, 4> entities_;
};

StructuredMesh build_mesh(DomainKind domain, int level);

/// Signed incidence matrix of the discrete differential on coefficient space.
struct SignedIncidence {
    CsrMatrix matrix;
    int domain_degree = 0;
    int codomain_degree = 1;
};

/// degree 0: edge-node (gradient), 1: face-edge (curl), 2: cell-face (divergence).
SignedIncidence incidence(const StructuredMesh& mesh, int degree);

/// Prolongation for integral degrees of freedom (nodal values, edge
/// circulations, face fluxes, cell integrals): column j holds the fine
/// degrees of freedom of coarse basis function j. Restriction is the transpose.
CsrMatrix coarse_fine_map(const StructuredMesh& coarse, const StructuredMesh& fine, int degree);

}  // namespace derham
