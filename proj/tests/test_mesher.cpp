#include "tubular/mesher.hpp"
#include "tubular/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace tubular;

namespace {

SparseTsdfField field_from(const GridSpec& spec, const std::vector<CubeKey>& keys,
                           const std::function<double(const Vec3&)>& f)
{
    SparseTsdfField field(spec);
    for (const auto& key : keys) {
        CubeBlock b;
        b.key = key;
        for (int k = 0; k < CubeBlock::n; ++k)
            for (int j = 0; j < CubeBlock::n; ++j)
                for (int i = 0; i < CubeBlock::n; ++i) {
                    const LatticePoint g{8 * key.x + i, 8 * key.y + j, 8 * key.z + k};
                    b.at(i, j, k) = std::clamp(f(spec.position(g)), -spec.truncation, spec.truncation);
                }
        field.insert_block(std::move(b));
    }
    return field;
}

struct SphereCase {
    Skeleton s;
    SkeletonGraph g{1};
    SpatialIndex index;
    GridSpec spec;
    SparseTsdfField field;

    SphereCase()
    {
        s.points = {Vec3::Zero()};
        s.radii = {1.0};
        index = SpatialIndex(s.points);
        spec = make_grid_spec(s, 0.05, 0.2);
        field = populate(s, g, index, spec, 5, SdfMode::Fast);
    }
};

const SphereCase& sphere()
{
    static const SphereCase c;
    return c;
}

} // namespace

TEST(MarchingCubes, SphereIsClosedGenusZero)
{
    const TriangleMesh mesh = marching_cubes(sphere().field);
    ASSERT_FALSE(mesh.empty());
    for (const Vec3& v : mesh.vertices)
        EXPECT_NEAR(v.norm(), 1.0, 0.05);
    const MeshReport r = inspect(mesh);
    EXPECT_TRUE(r.watertight());
    EXPECT_EQ(r.euler_characteristic, 2);
    EXPECT_EQ(r.vertices, mesh.vertices.size());
    for (const auto& t : mesh.triangles) {
        EXPECT_NE(t[0], t[1]);
        EXPECT_NE(t[1], t[2]);
        EXPECT_NE(t[0], t[2]);
    }
}

TEST(MarchingCubes, SphereTrianglesFaceOutward)
{
    const TriangleMesh mesh = marching_cubes(sphere().field);
    std::size_t checked = 0;
    for (const auto& t : mesh.triangles) {
        const Vec3 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
        const Vec3 n = (b - a).cross(c - a);
        if (n.norm() < 1e-12)
            continue;
        EXPECT_GT(n.dot((a + b + c) / 3.0), 0.0);
        ++checked;
    }
    EXPECT_GT(checked, 1000u);
}

TEST(MarchingCubes, VerticesInterpolateLinearlyOnLatticeEdges)
{
    // A plane field is linear, so interpolated vertices lie exactly on it.
    GridSpec spec;
    spec.voxel_size = 0.1;
    spec.truncation = 10.0;
    const Vec3 normal = Vec3(0.3, -0.5, 0.8).normalized();
    const auto f = [&](const Vec3& p) { return normal.dot(p - Vec3(0.4, 0.4, 0.4)); };
    const TriangleMesh mesh = marching_cubes(field_from(spec, {{0, 0, 0}}, f));
    ASSERT_FALSE(mesh.empty());
    for (const Vec3& v : mesh.vertices)
        EXPECT_NEAR(f(v), 0.0, 1e-12);
    EXPECT_GT(inspect(mesh).boundary_edges, 0u);
}

TEST(MarchingCubes, EmptyAndAllPositiveFields)
{
    EXPECT_TRUE(marching_cubes(SparseTsdfField(GridSpec{})).empty());
    const GridSpec spec;
    const auto mesh = marching_cubes(field_from(spec, {{0, 0, 0}, {1, 0, 0}}, [](const Vec3&) { return 0.05; }));
    EXPECT_TRUE(mesh.empty());
    EXPECT_TRUE(mesh.vertices.empty());
}

TEST(MarchingCubes, SingleNegativeCornerGivesOneTriangle)
{
    const GridSpec spec;
    SparseTsdfField field(spec);
    CubeBlock b;
    b.key = {0, 0, 0};
    std::fill(b.samples.begin(), b.samples.end(), 0.1);
    b.at(0, 0, 0) = -0.1;
    field.insert_block(b);
    const TriangleMesh mesh = marching_cubes(field);
    ASSERT_EQ(mesh.triangles.size(), 1u);
    EXPECT_EQ(mesh.vertices.size(), 3u);
    const MeshReport r = inspect(mesh);
    EXPECT_EQ(r.boundary_edges, 3u);
    EXPECT_FALSE(r.watertight());
}

TEST(MarchingCubes, SharedEdgesAcrossBlocksAreWelded)
{
    GridSpec spec;
    spec.voxel_size = 0.05;
    spec.truncation = 0.2;
    const Vec3 c(0.41, 0.39, 0.403);
    std::vector<CubeKey> keys;
    for (int z = 0; z < 2; ++z)
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 2; ++x)
                keys.push_back({x, y, z});
    const auto field = field_from(spec, keys, [&](const Vec3& p) { return (p - c).norm() - 0.237; });
    const TriangleMesh mesh = marching_cubes(field);
    const MeshReport r = inspect(mesh);
    EXPECT_TRUE(r.watertight());
    EXPECT_EQ(r.euler_characteristic, 2);
    // No two vertices share a position: welding by lattice edge is complete.
    std::vector<std::array<double, 3>> pos;
    for (const auto& v : mesh.vertices)
        pos.push_back({v.x(), v.y(), v.z()});
    std::sort(pos.begin(), pos.end());
    EXPECT_EQ(std::adjacent_find(pos.begin(), pos.end()), pos.end());
}

TEST(MarchingCubes, RandomFieldsStayManifoldAndCrackFree)
{
    // Arbitrary sign patterns on a block interior, positive on the boundary:
    // every generated case must still close up.
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        SparseTsdfField field(GridSpec{});
        CubeBlock b;
        b.key = {0, 0, 0};
        for (int k = 0; k < CubeBlock::n; ++k)
            for (int j = 0; j < CubeBlock::n; ++j)
                for (int i = 0; i < CubeBlock::n; ++i) {
                    const bool border = i == 0 || j == 0 || k == 0 || i == 8 || j == 8 || k == 8;
                    double v = border ? 0.1 : 0.1 * u(rng);
                    if (v == 0.0)
                        v = 0.05;
                    b.at(i, j, k) = v;
                }
        field.insert_block(b);
        const MeshReport r = inspect(marching_cubes(field));
        EXPECT_EQ(r.boundary_edges, 0u) << "trial " << trial;
        EXPECT_EQ(r.nonmanifold_edges, 0u) << "trial " << trial;
    }
}

TEST(MarchingCubes, DeterministicAcrossThreadCounts)
{
    const Skeleton s = synth::gen_ring(Vec3::Zero(), 1.0, 0.1, 64);
    const SkeletonGraph g = build_graph(s, 5, 2.5, 75);
    const SpatialIndex idx(s.points);
    const auto field = populate(s, g, idx, make_grid_spec(s, 0.025, 0.1), 5, SdfMode::Fast);
    const TriangleMesh one = marching_cubes(field, 1);
    for (unsigned t : {2u, 4u, 0u}) {
        const TriangleMesh other = marching_cubes(field, t);
        EXPECT_EQ(one.triangles, other.triangles);
        ASSERT_EQ(one.vertices.size(), other.vertices.size());
        for (std::size_t i = 0; i < one.vertices.size(); ++i)
            EXPECT_EQ(one.vertices[i], other.vertices[i]);
    }
}

TEST(ExtractMask, SphereVolume)
{
    const MaskVolume mask = extract_mask(sphere().field);
    const double l = sphere().spec.voxel_size;
    const double volume = static_cast<double>(mask.count()) * l * l * l;
    const double want = 4.0 / 3.0 * std::numbers::pi;
    EXPECT_GE(volume, 0.95 * want);
    EXPECT_LE(volume, 1.05 * want);
    EXPECT_EQ(mask.bits.size(), mask.voxel_count());
}

TEST(ExtractMask, BitsAgreeWithSampleAtAndSdf)
{
    const auto& c = sphere();
    const MaskVolume mask = extract_mask(c.field);
    const auto box = *c.field.lattice_extent();
    EXPECT_EQ(mask.origin, c.spec.position(box.lo));
    for (int k = 0; k < mask.dims[2]; k += 3)
        for (int j = 0; j < mask.dims[1]; j += 3)
            for (int i = 0; i < mask.dims[0]; i += 3) {
                const LatticePoint g{box.lo.x + i, box.lo.y + j, box.lo.z + k};
                const auto v = c.field.sample_at(g);
                const bool set = mask.bits[mask.index(i, j, k)] != 0;
                EXPECT_EQ(set, v.has_value() && *v < 0.0);
                if (set)
                    EXPECT_LT(c.spec.position(g).norm() - 1.0, c.spec.voxel_size);
            }
}

TEST(ExtractMask, DeepInteriorFromInsideCubes)
{
    const auto& c = sphere();
    ASSERT_FALSE(c.field.inside_keys().empty());
    const CubeKey key = c.field.sorted_inside_keys().front();
    const LatticePoint mid{8 * key.x + 4, 8 * key.y + 4, 8 * key.z + 4};
    const auto box = *c.field.lattice_extent();
    const MaskVolume mask = extract_mask(c.field);
    EXPECT_EQ(mask.bits[mask.index(mid.x - box.lo.x, mid.y - box.lo.y, mid.z - box.lo.z)], 1);
}

TEST(ExtractMask, EmptyFieldAndEmptyBox)
{
    const MaskVolume none = extract_mask(SparseTsdfField(GridSpec{}));
    EXPECT_EQ(none.voxel_count(), 0u);
    const MaskVolume zero = extract_mask(SparseTsdfField(GridSpec{}), LatticeBox{{0, 0, 0}, {3, 3, 3}});
    EXPECT_EQ(zero.voxel_count(), 64u);
    EXPECT_EQ(zero.count(), 0u);
}

TEST(WeldAndValidate, SphereAndEmpty)
{
    const TriangleMesh mesh = marching_cubes(sphere().field);
    const auto [welded, report] = weld_and_validate(mesh);
    EXPECT_EQ(report.boundary_edges, 0u);
    EXPECT_EQ(report.nonmanifold_edges, 0u);
    EXPECT_LE(welded.vertices.size(), mesh.vertices.size());

    const auto [empty, er] = weld_and_validate(TriangleMesh{});
    EXPECT_TRUE(empty.empty());
    EXPECT_EQ(er.edges, 0u);
    EXPECT_EQ(er.euler_characteristic, 0);
}

TEST(WeldAndValidate, MergesDuplicatesAndDropsCollapsed)
{
    TriangleMesh m;
    m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 0, 0), Vec3(0, 0, 1)};
    m.triangles = {{0, 1, 2}, {0, 2, 3}, {1, 3, 4}};
    const auto [w, r] = weld_and_validate(m);
    EXPECT_EQ(w.vertices.size(), 3u);
    EXPECT_EQ(w.triangles.size(), 2u);
    EXPECT_EQ(r.edges, 3u);
    EXPECT_EQ(r.boundary_edges, 0u);
}

TEST(WeldAndValidate, TruncatedAtWallReportsBoundary)
{
    GridSpec spec;
    spec.truncation = 0.5;
    const auto field = field_from(spec, {{0, 0, 0}}, [](const Vec3& p) { return p.z() - 0.11; });
    const auto [w, r] = weld_and_validate(marching_cubes(field));
    EXPECT_GT(r.boundary_edges, 0u);
    EXPECT_EQ(r.nonmanifold_edges, 0u);
    EXPECT_EQ(r.euler_characteristic, 1);
}
