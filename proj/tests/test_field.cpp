#include "tubular/field.hpp"
#include "tubular/geometry.hpp"
#include "tubular/synth.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <random>

using namespace tubular;

namespace {

Skeleton make(std::vector<Vec3> pts, double r = 1.0)
{
    Skeleton s;
    s.points = std::move(pts);
    s.radii.assign(s.points.size(), r);
    return s;
}

SkeletonGraph chain_graph(std::size_t n)
{
    SkeletonGraph g(n);
    for (std::size_t i = 0; i + 1 < n; ++i)
        g.add_edge(i, i + 1);
    return g;
}

bool same_field(const SparseTsdfField& a, const SparseTsdfField& b)
{
    if (a.sorted_block_keys() != b.sorted_block_keys() || a.sorted_inside_keys() != b.sorted_inside_keys())
        return false;
    for (const auto& [key, block] : a.blocks())
        if (block.samples != b.blocks().at(key).samples)
            return false;
    return true;
}

} // namespace

TEST(PointSdf, ReferenceExamples)
{
    const Skeleton single = make({Vec3::Zero()});
    const SpatialIndex i1(single.points);
    EXPECT_DOUBLE_EQ(point_sdf(Vec3(0, 0, 3), single, SkeletonGraph(1), i1, 5, SdfMode::Fast), 2.0);
    EXPECT_DOUBLE_EQ(point_sdf(Vec3(0, 0, 3), single, SkeletonGraph(1), i1, 5, SdfMode::Exact), 2.0);

    const Skeleton chain = make({Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(0, 0, 2)});
    const SpatialIndex i3(chain.points);
    const SkeletonGraph g = chain_graph(3);
    for (SdfMode mode : {SdfMode::Fast, SdfMode::Exact}) {
        EXPECT_NEAR(point_sdf(Vec3(2, 0, 1), chain, g, i3, 5, mode), 1.0, 1e-12);
        EXPECT_NEAR(point_sdf(Vec3(0, 0, -2), chain, g, i3, 5, mode), 1.0, 1e-12);
    }
}

TEST(PointSdf, StraightChainNormalsFollowTheAxis)
{
    const Skeleton chain = make({Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(0, 0, 2)});
    const SpatialIndex idx(chain.points);
    const SkeletonGraph g = chain_graph(3);
    const SkeletonSdf sdf(chain, g, idx, 5, SdfMode::Exact);
    EXPECT_LT((sdf.slice_normal(0, 1) - Vec3(0, 0, 1)).norm(), 1e-15);
    EXPECT_LT((sdf.slice_normal(1, 0) - Vec3(0, 0, -1)).norm(), 1e-15);
    EXPECT_LT((sdf.slice_normal(1, 2) - Vec3(0, 0, 1)).norm(), 1e-15);
    EXPECT_THROW(sdf.slice_normal(0, 2), ValidationError);
}

TEST(PointSdf, BentChainNormalBisectsTheJoint)
{
    const Skeleton s = make({Vec3(-1, 0, 0), Vec3(0, 0, 0), Vec3(1, 1, 0)}, 0.2);
    const SpatialIndex idx(s.points);
    const SkeletonGraph g = chain_graph(3);
    const SkeletonSdf sdf(s, g, idx, 5, SdfMode::Exact);
    // The edge towards 0 is flipped to agree with 1->2 before averaging.
    const Vec3 want = (Vec3(1, 0, 0) + Vec3(1, 1, 0).normalized()).normalized();
    EXPECT_LT((sdf.slice_normal(1, 2) - want).norm(), 1e-12);
    EXPECT_LT((sdf.slice_normal(1, 0) + want).norm(), 1e-12);
    EXPECT_LT((sdf.slice_normal(0, 1) - Vec3(1, 0, 0)).norm(), 1e-15);
}

TEST(PointSdf, UnionOfConstituents)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0), rad(0.05, 0.3);
    for (int t = 0; t < 30; ++t) {
        Skeleton s;
        for (int i = 0; i < 6; ++i) {
            s.points.emplace_back(u(rng), u(rng), u(rng));
            s.radii.push_back(rad(rng));
        }
        SkeletonGraph g(6);
        for (int e = 0; e < 8; ++e) {
            const auto a = static_cast<std::size_t>(std::abs(u(rng)) * 5.999);
            const auto b = static_cast<std::size_t>(std::abs(u(rng)) * 5.999);
            g.add_edge(a, b);
        }
        const SpatialIndex idx(s.points);
        const SkeletonSdf fast(s, g, idx, 6, SdfMode::Fast);
        const SkeletonSdf exact(s, g, idx, 6, SdfMode::Exact);
        for (int q = 0; q < 100; ++q) {
            const Vec3 v(1.5 * u(rng), 1.5 * u(rng), 1.5 * u(rng));
            const auto nearest = idx.knn(v, 1)[0].index;
            double want_fast = ball_sdf(s.points[nearest], s.radii[nearest], v);
            double want_exact = want_fast;
            for (const auto& [a, b] : g.edges()) {
                want_fast = std::min(want_fast, sdf_pair_fast(s.points[a], s.radii[a], s.points[b], s.radii[b], v));
                want_exact = std::min(want_exact, sdf_pair_exact({s.points[a], exact.slice_normal(a, b), s.radii[a]},
                                                                 {s.points[b], exact.slice_normal(b, a), s.radii[b]}, v));
            }
            EXPECT_EQ(fast(v), want_fast);
            EXPECT_EQ(exact(v), want_exact);
        }
    }
}

TEST(PointSdf, FastModeIsLipschitz)
{
    const Skeleton s = synth::gen_helix(0.5, 0.4, 2.0, 0.08, 120);
    const SkeletonGraph g = build_graph(s, 5, 2.5, 75);
    const SpatialIndex idx(s.points);
    const SkeletonSdf sdf(s, g, idx, 5, SdfMode::Fast);
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int seg = 0; seg < 50; ++seg) {
        const Vec3 a(u(rng), u(rng), 0.8 * u(rng) + 0.4), b(u(rng), u(rng), 0.8 * u(rng) + 0.4);
        Vec3 prev = a;
        double fprev = sdf(a);
        for (int i = 1; i < 100; ++i) {
            const Vec3 p = a + (b - a) * (i / 99.0);
            const double f = sdf(p);
            EXPECT_LE(std::abs(f - fprev), (p - prev).norm() + 1e-9);
            prev = p;
            fprev = f;
        }
    }
}

TEST(PointSdf, TubeMatchesCapsule)
{
    const Skeleton s = synth::gen_tube(Vec3(0, 0, 0), Vec3(0, 0, 1), 0.1, 100);
    const SkeletonGraph g = build_graph(s, 5, 2.5, 75);
    const SpatialIndex idx(s.points);
    const SkeletonSdf sdf(s, g, idx, 5, SdfMode::Fast);
    const auto cap = synth::capsule(Vec3(0, 0, 0), Vec3(0, 0, 1), 0.1);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-0.3, 1.3), w(-0.3, 0.3);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 v(w(rng), w(rng), u(rng));
        EXPECT_NEAR(sdf(v), synth::analytic_sdf(cap, v), 1e-9);
    }
}

TEST(Grid, MakeGridSpecSnapsOriginToCubeEdge)
{
    const GridSpec spec = make_grid_spec(make({Vec3(0.3, -0.2, 5.0)}, 0.1), 0.025, 0.1);
    const double e = spec.cube_edge();
    for (int a = 0; a < 3; ++a) {
        EXPECT_NEAR(spec.origin[a] / e, std::round(spec.origin[a] / e), 1e-9);
    }
    EXPECT_THROW(make_grid_spec(make({Vec3::Zero()}), 0.0, 0.1), ValidationError);
    EXPECT_THROW(make_grid_spec(make({Vec3::Zero()}), 0.1, -1.0), ValidationError);
}

TEST(CandidateCubes, ReferenceExample)
{
    const Skeleton s = make({Vec3::Zero()});
    const GridSpec spec = make_grid_spec(s, 0.25, 0.5);
    ASSERT_DOUBLE_EQ(spec.cube_edge(), 2.0);
    const auto keys = candidate_cubes(s, spec);
    EXPECT_EQ(keys.size(), 64u);
    // In world terms the cubes start at -4, -2, 0, 2: keys {-2..1} on an origin-0 lattice.
    for (const auto& k : keys)
        for (int c : {k.x, k.y, k.z}) {
            const double start = spec.origin.x() + c * spec.cube_edge();
            EXPECT_GE(start, -4.0);
            EXPECT_LE(start, 2.0);
        }
    std::vector<CubeKey> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(std::unique(sorted.begin(), sorted.end()), sorted.end());
}

TEST(CandidateCubes, CoverExpandedBox)
{
    const Skeleton s = make({Vec3(0, 0, 0), Vec3(3, 1, -2)}, 0.2);
    const GridSpec spec = make_grid_spec(s, 0.05, 0.1);
    const auto keys = candidate_cubes(s, spec);
    const double pad = 0.2 + 0.1 + spec.cube_edge();
    const Vec3 lo = Vec3(0, 0, -2).array() - pad, hi = Vec3(3, 1, 0).array() + pad;
    std::set<CubeKey> have(keys.begin(), keys.end());
    EXPECT_EQ(have.size(), keys.size());
    // Every cube intersecting the box is present, and every present cube intersects it.
    for (const auto& k : keys) {
        const Vec3 c0 = spec.origin + spec.cube_edge() * Vec3(k.x, k.y, k.z);
        const Vec3 c1 = c0.array() + spec.cube_edge();
        EXPECT_TRUE((c1.array() > lo.array()).all() && (c0.array() < hi.array()).all());
    }
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const Vec3 p = lo + (hi - lo).cwiseProduct(Vec3(u(rng), u(rng), u(rng)));
        const Vec3 q = (p - spec.origin) / spec.cube_edge();
        const CubeKey k{static_cast<int>(std::floor(q.x())), static_cast<int>(std::floor(q.y())),
                        static_cast<int>(std::floor(q.z()))};
        EXPECT_TRUE(have.count(k));
    }
}

TEST(Populate, SphereShellMatchesAnalyticDistance)
{
    const Skeleton s = make({Vec3::Zero()});
    const SkeletonGraph g(1);
    const SpatialIndex idx(s.points);
    const GridSpec spec = make_grid_spec(s, 0.05, 0.2);
    PopulateStats stats;
    const SparseTsdfField field = populate(s, g, idx, spec, 5, SdfMode::Fast, 0, &stats);
    EXPECT_GT(stats.surface, 0u);
    EXPECT_EQ(stats.surface, field.blocks().size());
    EXPECT_EQ(stats.inside, field.inside_keys().size());
    std::size_t checked = 0;
    for (const auto& [key, block] : field.blocks()) {
        EXPECT_EQ(block.cls, CubeClass::Surface);
        EXPECT_FALSE(field.inside_keys().count(key));
        for (int k = 0; k < CubeBlock::n; ++k)
            for (int j = 0; j < CubeBlock::n; ++j)
                for (int i = 0; i < CubeBlock::n; ++i) {
                    const double f = block.at(i, j, k);
                    EXPECT_LE(std::abs(f), spec.truncation);
                    if (std::abs(f) < spec.truncation) {
                        const Vec3 p = spec.position({8 * key.x + i, 8 * key.y + j, 8 * key.z + k});
                        EXPECT_LT(std::abs(p.norm() - 1.0 - f), 1e-6);
                        ++checked;
                    }
                }
    }
    EXPECT_GT(checked, 1000u);
    // The sphere interior is deep enough at l = 0.05 (cube edge 0.4) to hold interior cubes.
    EXPECT_GT(field.inside_keys().size(), 0u);
}

TEST(Populate, InsideAndFarCubes)
{
    const Skeleton s = synth::gen_tube(Vec3(0, 0, 0), Vec3(0, 0, 4), 1.0, 17);
    const SkeletonGraph g = build_graph(s, 5, 2.5, 75);
    const SpatialIndex idx(s.points);
    const GridSpec spec = make_grid_spec(s, 0.05, 0.1);
    const SparseTsdfField field = populate(s, g, idx, spec, 5, SdfMode::Fast);
    ASSERT_FALSE(field.inside_keys().empty());
    for (const auto& key : field.inside_keys()) {
        const LatticePoint mid{8 * key.x + 4, 8 * key.y + 4, 8 * key.z + 4};
        EXPECT_EQ(field.sample_at(mid), -spec.truncation);
        EXPECT_LT(point_sdf(spec.position(mid), s, g, idx, 5, SdfMode::Fast), -spec.truncation);
    }
    // A lattice point far outside the tube is not stored.
    const Vec3 far = Vec3(2.3, 2.3, 2.0) - spec.origin;
    const LatticePoint gp{static_cast<int>(far.x() / spec.voxel_size), static_cast<int>(far.y() / spec.voxel_size),
                          static_cast<int>(far.z() / spec.voxel_size)};
    EXPECT_FALSE(field.sample_at(gp).has_value());
}

TEST(SampleAt, SharedFacesAgreeAndAbsentIsEmpty)
{
    const Skeleton s = synth::gen_ring(Vec3::Zero(), 1.0, 0.15, 64);
    const SkeletonGraph g = build_graph(s, 5, 2.5, 75);
    const SpatialIndex idx(s.points);
    const GridSpec spec = make_grid_spec(s, 0.025, 0.1);
    const SparseTsdfField field = populate(s, g, idx, spec, 5, SdfMode::Exact);

    std::size_t shared = 0;
    for (const auto& [key, block] : field.blocks()) {
        const CubeKey right{key.x + 1, key.y, key.z};
        const auto it = field.blocks().find(right);
        if (it == field.blocks().end())
            continue;
        for (int k = 0; k < CubeBlock::n; ++k)
            for (int j = 0; j < CubeBlock::n; ++j) {
                EXPECT_EQ(block.at(8, j, k), it->second.at(0, j, k));
                const LatticePoint gp{8 * right.x, 8 * key.y + j, 8 * key.z + k};
                EXPECT_EQ(field.sample_at(gp), block.at(8, j, k));
                ++shared;
            }
    }
    EXPECT_GT(shared, 0u);
    EXPECT_FALSE(field.sample_at({100000, 0, 0}).has_value());
}

TEST(Populate, DeterministicAcrossThreadCounts)
{
    const Skeleton s = synth::gen_y_bifurcation(1.0, 1.0, 60.0, 0.1, 0.07, 0.05);
    const SkeletonGraph g = build_graph(s, 5, 2.5, 75);
    const SpatialIndex idx(s.points);
    const GridSpec spec = make_grid_spec(s, 0.025, 0.1);
    for (SdfMode mode : {SdfMode::Fast, SdfMode::Exact}) {
        const SparseTsdfField one = populate(s, g, idx, spec, 5, mode, 1);
        const SparseTsdfField four = populate(s, g, idx, spec, 5, mode, 4);
        const SparseTsdfField all = populate(s, g, idx, spec, 5, mode, 0);
        EXPECT_TRUE(same_field(one, four));
        EXPECT_TRUE(same_field(one, all));
    }
}

TEST(Field, InsertRejectsDuplicates)
{
    SparseTsdfField f(GridSpec{});
    CubeBlock b;
    b.key = {1, 2, 3};
    f.insert_block(b);
    EXPECT_THROW(f.insert_block(b), ValidationError);
    EXPECT_THROW(f.insert_inside({1, 2, 3}), ValidationError);
    f.insert_inside({0, 0, 0});
    EXPECT_THROW(f.insert_inside({0, 0, 0}), ValidationError);
    EXPECT_EQ(f.sample_at({4, 4, 4}), -GridSpec{}.truncation);
    // A boundary point shared with a stored block reads the block.
    EXPECT_EQ(f.sample_at({8, 16, 24}), 0.0);
}
