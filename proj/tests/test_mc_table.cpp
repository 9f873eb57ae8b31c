#include "tubular/mc_table.hpp"
#include "tubular/types.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <utility>

using namespace tubular;
using namespace tubular::mc;

namespace {

bool inside(int cs, int corner) { return (cs >> corner) & 1; }

Vec3 corner_pos(int c) { return Vec3(kCornerOffset[c][0], kCornerOffset[c][1], kCornerOffset[c][2]); }

Vec3 edge_mid(int e) { return 0.5 * (corner_pos(kEdgeCorners[e][0]) + corner_pos(kEdgeCorners[e][1])); }

// Points scaled by 2 so midpoints are integral.
using Key3 = std::array<int, 3>;
Key3 key(const Vec3& p) { return {int(2 * p.x()), int(2 * p.y()), int(2 * p.z())}; }

} // namespace

TEST(McTable, EveryCaseTriangulatedWithoutFaceDiagonals)
{
    EXPECT_EQ(unconstrained_case_count(), 0);
}

TEST(McTable, TrivialCases)
{
    EXPECT_EQ(table()[0].triangle_count, 0);
    EXPECT_EQ(table()[255].triangle_count, 0);
    for (int c = 0; c < 8; ++c) {
        EXPECT_EQ(table()[1 << c].triangle_count, 1);
        EXPECT_EQ(table()[255 ^ (1 << c)].triangle_count, 1);
    }
    // Corner 0 alone: the triangle spans edges 0, 3 and 8.
    const auto& t = table()[1].triangles[0];
    EXPECT_EQ((std::set<int>{t[0], t[1], t[2]}), (std::set<int>{0, 3, 8}));
}

TEST(McTable, TrianglesUseSignChangeEdgesAndCoverThem)
{
    for (int cs = 0; cs < 256; ++cs) {
        std::set<int> crossing, used;
        for (int e = 0; e < 12; ++e)
            if (inside(cs, kEdgeCorners[e][0]) != inside(cs, kEdgeCorners[e][1]))
                crossing.insert(e);
        const Case& c = table()[cs];
        for (int t = 0; t < c.triangle_count; ++t)
            for (int v : c.triangles[t]) {
                EXPECT_TRUE(crossing.count(v)) << "case " << cs;
                used.insert(v);
            }
        EXPECT_EQ(used, crossing) << "case " << cs;
    }
}

TEST(McTable, LocalPatchIsEdgeManifold)
{
    // Inside a cell every triangle edge is shared by two triangles with opposite
    // direction, or lies on a cube face (both endpoints on one face) and is used once.
    for (int cs = 0; cs < 256; ++cs) {
        std::map<std::pair<int, int>, int> directed;
        const Case& c = table()[cs];
        for (int t = 0; t < c.triangle_count; ++t) {
            const auto& tri = c.triangles[t];
            EXPECT_TRUE(tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2]);
            for (int i = 0; i < 3; ++i)
                ++directed[{tri[i], tri[(i + 1) % 3]}];
        }
        for (const auto& [e, n] : directed) {
            EXPECT_EQ(n, 1) << "case " << cs;
            if (directed.count({e.second, e.first}))
                continue;
            const Vec3 a = edge_mid(e.first), b = edge_mid(e.second);
            const bool same_face = ((a - b).array() == 0.0 && (a.array() == 0.0 || a.array() == 1.0)).any();
            EXPECT_TRUE(same_face) << "case " << cs << " edge " << int(e.first) << "-" << int(e.second);
        }
    }
}

TEST(McTable, NeighbouringCellsAgreeOnSharedFaces)
{
    // For each axis and each sign pattern on a face, collect the boundary
    // segments a cell produces on its high face and, reversed, on its low face.
    // Adjacent cells see the same face from opposite sides, so both sets must match.
    std::map<std::tuple<int, int, int>, std::set<std::pair<Key3, Key3>>> seen;
    for (int cs = 0; cs < 256; ++cs) {
        std::map<std::pair<int, int>, int> directed;
        const Case& c = table()[cs];
        for (int t = 0; t < c.triangle_count; ++t)
            for (int i = 0; i < 3; ++i)
                ++directed[{c.triangles[t][i], c.triangles[t][(i + 1) % 3]}];
        for (int axis = 0; axis < 3; ++axis)
            for (int side = 0; side < 2; ++side) {
                int signs = 0;
                for (int corner = 0; corner < 8; ++corner)
                    if (kCornerOffset[corner][axis] == side && inside(cs, corner)) {
                        Vec3 p = corner_pos(corner);
                        p[axis] = 0;
                        signs |= 1 << (int(p.x()) + 2 * int(p.y()) + 4 * int(p.z()));
                    }
                std::set<std::pair<Key3, Key3>> segs;
                for (const auto& [e, n] : directed) {
                    if (directed.count({e.second, e.first}))
                        continue;
                    Vec3 a = edge_mid(e.first), b = edge_mid(e.second);
                    if (a[axis] != side || b[axis] != side)
                        continue;
                    a[axis] = b[axis] = 0;
                    segs.insert(side == 1 ? std::pair{key(a), key(b)} : std::pair{key(b), key(a)});
                }
                const auto slot = std::tuple{axis, signs, side};
                if (!seen.count(slot))
                    seen[slot] = segs;
                else
                    EXPECT_EQ(seen[slot], segs) << "case " << cs << " axis " << axis;
            }
    }
    for (int axis = 0; axis < 3; ++axis)
        for (int signs = 0; signs < 256; ++signs) {
            const auto lo = seen.find({axis, signs, 0}), hi = seen.find({axis, signs, 1});
            if (lo != seen.end() && hi != seen.end())
                EXPECT_EQ(lo->second, hi->second) << "axis " << axis << " signs " << signs;
        }
}

TEST(McTable, TrianglesFaceTheOutside)
{
    for (int cs = 1; cs < 255; ++cs) {
        const Case& c = table()[cs];
        for (int t = 0; t < c.triangle_count; ++t) {
            const auto& tri = c.triangles[t];
            const Vec3 a = edge_mid(tri[0]), b = edge_mid(tri[1]), d = edge_mid(tri[2]);
            const Vec3 n = (b - a).cross(d - a);
            Vec3 outward = Vec3::Zero();
            for (int v : tri) {
                const int c0 = kEdgeCorners[v][0], c1 = kEdgeCorners[v][1];
                outward += inside(cs, c0) ? corner_pos(c1) - corner_pos(c0) : corner_pos(c0) - corner_pos(c1);
            }
            EXPECT_GT(n.dot(outward), 0.0) << "case " << cs << " triangle " << t;
        }
    }
}
