#pragma once

#include "tubular/field.hpp"
#include "tubular/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace tubular {

/// Triangles are counter-clockwise seen from outside (positive SDF side).
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;

    bool empty() const noexcept { return triangles.empty(); }
};

struct MeshReport {
    std::size_t vertices = 0; ///< referenced by at least one triangle
    std::size_t edges = 0;
    std::size_t triangles = 0;
    std::size_t boundary_edges = 0;    ///< used by exactly one triangle
    std::size_t nonmanifold_edges = 0; ///< used by more than two triangles
    long euler_characteristic = 0;     ///< V - E + F

    bool watertight() const noexcept { return boundary_edges == 0 && nonmanifold_edges == 0; }
};

/// Binary occupancy on the field lattice, x fastest, one byte (0 or 1) per voxel.
struct MaskVolume {
    std::array<int, 3> dims{0, 0, 0};
    Vec3 origin = Vec3::Zero();
    double spacing = 1.0;
    std::vector<std::uint8_t> bits;

    std::size_t voxel_count() const noexcept
    {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    std::size_t index(int i, int j, int k) const noexcept
    {
        return (static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i;
    }
    std::size_t count() const noexcept;
};

/// Extracts the zero level set of every stored block. Vertices on the same
/// lattice edge are shared, and the result is identical for any thread count.
TriangleMesh marching_cubes(const SparseTsdfField& field, unsigned threads = 0);

/// One voxel per lattice point of `box`; set where sample_at is negative
/// (interior cubes included).
MaskVolume extract_mask(const SparseTsdfField& field, const LatticeBox& box);

/// Mask over the field's whole lattice extent; an empty field gives an empty mask.
MaskVolume extract_mask(const SparseTsdfField& field);

MeshReport inspect(const TriangleMesh& mesh);

/// Merges vertices with identical coordinates, drops triangles that collapse
/// and unreferenced vertices, and reports the edge topology of the result.
std::pair<TriangleMesh, MeshReport> weld_and_validate(const TriangleMesh& mesh);

} // namespace tubular
