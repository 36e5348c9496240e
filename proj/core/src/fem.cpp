#include "derham/fem.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace derham {

namespace {

// Exact 1D Gram entries on the unit interval for the linear shape pair
// {1 - s, s}, selected by endpoint.
constexpr double kLinearGram[2][2] = {{1.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 1.0 / 3.0}};

struct LocalEntity {
    std::array<int, 3> offset;
    int axis;
};

// Entities of the given degree belonging to the reference cell.
std::vector<LocalEntity> local_entities(int degree)
{
    std::vector<LocalEntity> out;
    const int axes = StructuredMesh::orientations(degree);
    for (int a = 0; a < axes; ++a) {
        const auto span = spanned_axes(degree, a);
        for (int z = 0; z < (span[2] ? 1 : 2); ++z) {
            for (int y = 0; y < (span[1] ? 1 : 2); ++y) {
                for (int x = 0; x < (span[0] ? 1 : 2); ++x) {
                    out.push_back({{x, y, z}, a});
                }
            }
        }
    }
    return out;
}

}  // namespace

CsrMatrix assemble_mass(const StructuredMesh& mesh, int degree)
{
    if (degree < 0 || degree > 3) {
        throw std::invalid_argument("assemble_mass: degree must be in 0..3");
    }
    const auto local = local_entities(degree);
    const std::size_t nloc = local.size();
    const double volume = std::pow(mesh.h(), 3);

    std::vector<double> element(nloc * nloc, 0.0);
    for (std::size_t i = 0; i < nloc; ++i) {
        for (std::size_t j = 0; j < nloc; ++j) {
            if (local[i].axis != local[j].axis) {
                continue;  // orthogonal vector components
            }
            const auto span = spanned_axes(degree, local[i].axis);
            double v = volume;
            for (int d = 0; d < 3; ++d) {
                if (!span[d]) {
                    v *= kLinearGram[local[i].offset[d]][local[j].offset[d]];
                }
            }
            element[i * nloc + j] = v;
        }
    }

    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(mesh.count(3)) * nloc * nloc);
    std::vector<Index> dofs(nloc);
    for (Index cell = 0; cell < mesh.count(3); ++cell) {
        const auto& anchor = mesh.entity(3, cell).anchor;
        for (std::size_t i = 0; i < nloc; ++i) {
            LatticeEntity e{anchor, local[i].axis};
            for (int d = 0; d < 3; ++d) {
                e.anchor[d] += local[i].offset[d];
            }
            dofs[i] = mesh.id(degree, e);
        }
        for (std::size_t i = 0; i < nloc; ++i) {
            for (std::size_t j = 0; j < nloc; ++j) {
                if (element[i * nloc + j] != 0.0) {
                    t.push_back({dofs[i], dofs[j], element[i * nloc + j]});
                }
            }
        }
    }
    return CsrMatrix::from_triplets(mesh.count(degree), mesh.count(degree), std::move(t));
}

CsrMatrix differential(const StructuredMesh& mesh, int degree)
{
    CsrMatrix d = incidence(mesh, degree).matrix;
    d.scale(1.0 / mesh.h());
    return d;
}

CsrMatrix prolongation(const StructuredMesh& coarse, const StructuredMesh& fine, int degree)
{
    // Integral DOFs of a k-form scale by h^k relative to the unit-magnitude ones.
    CsrMatrix p = coarse_fine_map(coarse, fine, degree);
    p.scale(static_cast<double>(1 << degree));
    return p;
}

USpec USpec::standard(double h)
{
    return USpec{5.0 / (h * h * h)};
}

CsrMatrix USpec::matrix(Index size) const
{
    if (!(scale > 0.0)) {
        throw std::invalid_argument("USpec: scale must be positive");
    }
    return CsrMatrix::identity(size, scale);
}

ComplexOperators build_operators(const StructuredMesh& mesh, int k, double c, const USpec& u)
{
    if (k != 1 && k != 2) {
        throw std::invalid_argument("build_operators: form degree must be 1 or 2");
    }
    if (c < 0.0) {
        throw std::invalid_argument("build_operators: shift c must be non-negative");
    }
    ComplexOperators ops;
    ops.k = k;
    ops.c = c;
    ops.u_scale = u.scale;
    ops.Mk = assemble_mass(mesh, k);
    ops.Mkm1 = assemble_mass(mesh, k - 1);
    ops.Mkp1 = assemble_mass(mesh, k + 1);
    ops.Dk = differential(mesh, k);
    ops.Dkm1 = differential(mesh, k - 1);
    ops.A = spgemm(transpose(ops.Dk), spgemm(ops.Mkp1, ops.Dk));
    ops.B = spgemm(transpose(ops.Dkm1), ops.Mk);
    ops.U = u.matrix(ops.Mkm1.rows());
    return ops;
}

ComplexOperators build_operators(const StructuredMesh& mesh, int k, double c)
{
    return build_operators(mesh, k, c, USpec::standard(mesh.h()));
}

CsrMatrix auxiliary_term(const ComplexOperators& ops)
{
    return spgemm(transpose(ops.B), spgemm(ops.U, ops.B));
}

CsrMatrix build_auxiliary_matrix(const ComplexOperators& ops, double shift)
{
    // B^T (U B) + A + shift M in a single product pass.
    const CsrMatrix ub = spgemm(ops.U, ops.B);
    const std::array<ScaledTerm, 2> terms{ScaledTerm{1.0, &ops.A}, ScaledTerm{shift, &ops.Mk}};
    return spgemm_sum(transpose(ops.B), ub, 1.0,
                      std::span<const ScaledTerm>(terms.data(), shift != 0.0 ? 2 : 1));
}

CsrMatrix build_auxiliary_matrix(const ComplexOperators& ops)
{
    return build_auxiliary_matrix(ops, ops.c);
}

CsrMatrix build_original_matrix(const ComplexOperators& ops)
{
    return add_scaled(ops.A, ops.Mk, 1.0, ops.c);
}

}  // namespace derham
