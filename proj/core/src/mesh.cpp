#include "derham/mesh.hpp"

#include <numbers>
#include <stdexcept>

namespace derham {

std::string_view to_string(DomainKind d)
{
    return d == DomainKind::Cube ? "cube" : "cube-with-hole";
}

DomainKind parse_domain(std::string_view s)
{
    if (s == "cube" || s == "1") {
        return DomainKind::Cube;
    }
    if (s == "cube-with-hole" || s == "hole" || s == "2") {
        return DomainKind::CubeWithHole;
    }
    throw std::invalid_argument("unknown domain '" + std::string(s) + "'");
}

std::array<bool, 3> spanned_axes(int degree, int axis)
{
    switch (degree) {
    case 0:
        return {false, false, false};
    case 1: {
        std::array<bool, 3> s{false, false, false};
        s[axis] = true;
        return s;
    }
    case 2: {
        std::array<bool, 3> s{true, true, true};
        s[axis] = false;
        return s;
    }
    case 3:
        return {true, true, true};
    default:
        throw std::invalid_argument("entity degree must be in 0..3");
    }
}

StructuredMesh::StructuredMesh(DomainKind domain, int level)
    : domain_(domain), level_(level), n_(0), h_(0.0)
{
    if (level < 1) {
        throw std::invalid_argument("mesh level must be >= 1");
    }
    if (level > 8) {
        throw std::invalid_argument("mesh level too large for 32-bit indices");
    }
    n_ = 1 << (level + 1);
    h_ = std::numbers::pi / n_;

    const int m = n_ + 1;
    for (int degree = 0; degree <= 3; ++degree) {
        const int axes = orientations(degree);
        auto& ids = slot_to_id_[degree];
        auto& list = entities_[degree];
        ids.assign(static_cast<std::size_t>(m) * m * m * axes, -1);
        for (int z = 0; z < m; ++z) {
            for (int y = 0; y < m; ++y) {
                for (int x = 0; x < m; ++x) {
                    for (int a = 0; a < axes; ++a) {
                        const LatticeEntity e{{x, y, z}, a};
                        if (in_lattice(degree, e) && touches_domain(degree, e)) {
                            ids[slot(degree, e)] = static_cast<Index>(list.size());
                            list.push_back(e);
                        }
                    }
                }
            }
        }
    }
}

std::size_t StructuredMesh::slot(int degree, const LatticeEntity& e) const
{
    const std::size_t m = static_cast<std::size_t>(n_) + 1;
    const std::size_t node = (static_cast<std::size_t>(e.anchor[2]) * m + e.anchor[1]) * m +
                             static_cast<std::size_t>(e.anchor[0]);
    return node * orientations(degree) + static_cast<std::size_t>(e.axis);
}

bool StructuredMesh::in_lattice(int degree, const LatticeEntity& e) const
{
    const auto span = spanned_axes(degree, e.axis);
    for (int d = 0; d < 3; ++d) {
        const int limit = span[d] ? n_ - 1 : n_;
        if (e.anchor[d] < 0 || e.anchor[d] > limit) {
            return false;
        }
    }
    return e.axis >= 0 && e.axis < orientations(degree);
}

bool StructuredMesh::cell_in_domain(int x, int y, int z) const
{
    if (x < 0 || y < 0 || z < 0 || x >= n_ || y >= n_ || z >= n_) {
        return false;
    }
    if (domain_ == DomainKind::CubeWithHole) {
        const int lo = n_ / 4;
        const int hi = 3 * n_ / 4;
        if (x >= lo && x < hi && y >= lo && y < hi) {
            return false;
        }
    }
    return true;
}

bool StructuredMesh::touches_domain(int degree, const LatticeEntity& e) const
{
    const auto span = spanned_axes(degree, e.axis);
    // Each non-spanned axis offers two neighbouring cell layers.
    for (int mask = 0; mask < 8; ++mask) {
        std::array<int, 3> c = e.anchor;
        bool valid = true;
        for (int d = 0; d < 3; ++d) {
            const bool lower = (mask >> d) & 1;
            if (span[d]) {
                valid = valid && !lower;
            } else if (lower) {
                c[d] -= 1;
            }
        }
        if (valid && cell_in_domain(c[0], c[1], c[2])) {
            return true;
        }
    }
    return false;
}

Index StructuredMesh::count(int degree) const
{
    if (degree < 0 || degree > 3) {
        throw std::invalid_argument("entity degree must be in 0..3");
    }
    return static_cast<Index>(entities_[degree].size());
}

Index StructuredMesh::id(int degree, const LatticeEntity& e) const
{
    if (degree < 0 || degree > 3) {
        throw std::invalid_argument("entity degree must be in 0..3");
    }
    if (!in_lattice(degree, e)) {
        return -1;
    }
    return slot_to_id_[degree][slot(degree, e)];
}

const LatticeEntity& StructuredMesh::entity(int degree, Index id) const
{
    return entities_.at(degree).at(static_cast<std::size_t>(id));
}

std::array<double, 3> StructuredMesh::center(int degree, Index id) const
{
    const auto& e = entity(degree, id);
    const auto span = spanned_axes(degree, e.axis);
    std::array<double, 3> c{};
    for (int d = 0; d < 3; ++d) {
        c[d] = (e.anchor[d] + (span[d] ? 0.5 : 0.0)) * h_;
    }
    return c;
}

long StructuredMesh::euler_characteristic() const
{
    return static_cast<long>(count(0)) - count(1) + count(2) - count(3);
}

StructuredMesh build_mesh(DomainKind domain, int level)
{
    return StructuredMesh(domain, level);
}

namespace {

LatticeEntity shifted(LatticeEntity e, int axis, int by = 1)
{
    e.anchor[axis] += by;
    return e;
}

}  // namespace

SignedIncidence incidence(const StructuredMesh& mesh, int degree)
{
    if (degree < 0 || degree > 2) {
        throw std::invalid_argument("incidence degree must be in 0..2");
    }
    const int target = degree + 1;
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(mesh.count(target)) * (degree == 0 ? 2 : degree == 1 ? 4 : 6));

    auto add = [&](Index row, const LatticeEntity& e, double sign) {
        const Index col = mesh.id(degree, e);
        if (col < 0) {
            throw std::logic_error("boundary entity missing from mesh");
        }
        t.push_back({row, col, sign});
    };

    for (Index r = 0; r < mesh.count(target); ++r) {
        const LatticeEntity& e = mesh.entity(target, r);
        if (degree == 0) {
            const LatticeEntity node{e.anchor, 0};
            add(r, node, -1.0);
            add(r, shifted(node, e.axis), 1.0);
        } else if (degree == 1) {
            // Circulation counter-clockwise about the +axis normal.
            const int b = (e.axis + 1) % 3;
            const int c = (e.axis + 2) % 3;
            add(r, LatticeEntity{e.anchor, b}, 1.0);
            add(r, shifted(LatticeEntity{e.anchor, c}, b), 1.0);
            add(r, shifted(LatticeEntity{e.anchor, b}, c), -1.0);
            add(r, LatticeEntity{e.anchor, c}, -1.0);
        } else {
            for (int a = 0; a < 3; ++a) {
                add(r, LatticeEntity{e.anchor, a}, -1.0);
                add(r, shifted(LatticeEntity{e.anchor, a}, a), 1.0);
            }
        }
    }
    return {CsrMatrix::from_triplets(mesh.count(target), mesh.count(degree), std::move(t)),
            degree, target};
}

CsrMatrix coarse_fine_map(const StructuredMesh& coarse, const StructuredMesh& fine, int degree)
{
    if (coarse.domain() != fine.domain()) {
        throw std::invalid_argument("coarse_fine_map: meshes cover different domains");
    }
    if (fine.level() != coarse.level() + 1) {
        throw std::invalid_argument("coarse_fine_map: levels must be adjacent");
    }
    if (degree < 0 || degree > 3) {
        throw std::invalid_argument("coarse_fine_map: degree must be in 0..3");
    }

    // Integral DOFs of a fine entity pick up 1/2 of the coarse value per
    // spanned axis; transverse directions interpolate linearly.
    const double span_weight = 1.0 / static_cast<double>(1 << degree);
    std::vector<Triplet> t;
    for (Index f = 0; f < fine.count(degree); ++f) {
        const LatticeEntity& e = fine.entity(degree, f);
        const auto span = spanned_axes(degree, e.axis);
        std::array<std::array<int, 2>, 3> choices{};
        std::array<std::array<double, 2>, 3> weights{};
        std::array<int, 3> nchoice{};
        for (int d = 0; d < 3; ++d) {
            const int q = e.anchor[d];
            if (span[d] || q % 2 == 0) {
                choices[d] = {q / 2, 0};
                weights[d] = {1.0, 0.0};
                nchoice[d] = 1;
            } else {
                choices[d] = {(q - 1) / 2, (q + 1) / 2};
                weights[d] = {0.5, 0.5};
                nchoice[d] = 2;
            }
        }
        for (int i = 0; i < nchoice[0]; ++i) {
            for (int j = 0; j < nchoice[1]; ++j) {
                for (int k = 0; k < nchoice[2]; ++k) {
                    const LatticeEntity ce{{choices[0][i], choices[1][j], choices[2][k]}, e.axis};
                    const Index c = coarse.id(degree, ce);
                    if (c < 0) {
                        throw std::logic_error("coarse_fine_map: coarse support outside domain");
                    }
                    t.push_back({f, c, span_weight * weights[0][i] * weights[1][j] * weights[2][k]});
                }
            }
        }
    }
    return CsrMatrix::from_triplets(fine.count(degree), coarse.count(degree), std::move(t));
}

}  // namespace derham
