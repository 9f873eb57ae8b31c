#include "tubular/mc_table.hpp"

#include "tubular/types.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <vector>

namespace tubular::mc {

namespace {

struct Face {
    std::array<int, 4> corners; // cyclic
    Vec3 outward;
};

const std::array<Face, 6> kFaces{{
    {{0, 1, 2, 3}, Vec3(0, 0, -1)},
    {{4, 5, 6, 7}, Vec3(0, 0, 1)},
    {{0, 1, 5, 4}, Vec3(0, -1, 0)},
    {{3, 2, 6, 7}, Vec3(0, 1, 0)},
    {{0, 3, 7, 4}, Vec3(-1, 0, 0)},
    {{1, 2, 6, 5}, Vec3(1, 0, 0)},
}};

Vec3 corner_pos(int c)
{
    return Vec3(kCornerOffset[c][0], kCornerOffset[c][1], kCornerOffset[c][2]);
}

int edge_between(int a, int b)
{
    for (int e = 0; e < 12; ++e)
        if ((kEdgeCorners[e][0] == a && kEdgeCorners[e][1] == b)
            || (kEdgeCorners[e][0] == b && kEdgeCorners[e][1] == a))
            return e;
    return -1;
}

Vec3 edge_mid(int e)
{
    return 0.5 * (corner_pos(kEdgeCorners[e][0]) + corner_pos(kEdgeCorners[e][1]));
}

// Faces containing each edge (always two).
std::array<std::array<int, 2>, 12> edge_faces()
{
    std::array<std::array<int, 2>, 12> out{};
    std::array<int, 12> count{};
    for (int f = 0; f < 6; ++f)
        for (int m = 0; m < 4; ++m) {
            const int e = edge_between(kFaces[f].corners[m], kFaces[f].corners[(m + 1) % 4]);
            out[e][count[e]++] = f;
        }
    return out;
}

bool share_face(const std::array<std::array<int, 2>, 12>& ef, int a, int b)
{
    for (int fa : ef[a])
        for (int fb : ef[b])
            if (fa == fb)
                return true;
    return false;
}

struct Built {
    Case c;
    bool constrained = true;
};

Built build_case(int index, const std::array<std::array<int, 2>, 12>& ef)
{
    auto inside = [index](int corner) { return (index >> corner & 1) != 0; };

    std::array<int, 12> next;
    next.fill(-1);

    auto add_segment = [&](const Face& face, int ea, int eb, int inside_corner) {
        // Orient so the inside corner lies on the right when the face is seen
        // from outside the cell.
        const Vec3 p = edge_mid(ea);
        const Vec3 q = edge_mid(eb);
        const Vec3 left = face.outward.cross(q - p);
        if (left.dot(corner_pos(inside_corner) - p) > 0.0)
            std::swap(ea, eb);
        next[ea] = eb;
    };

    for (const Face& face : kFaces) {
        std::array<int, 4> crossing{};
        int n = 0;
        for (int m = 0; m < 4; ++m) {
            const int a = face.corners[m], b = face.corners[(m + 1) % 4];
            if (inside(a) != inside(b))
                crossing[n++] = m;
        }
        if (n == 2) {
            const int ea = edge_between(face.corners[crossing[0]], face.corners[(crossing[0] + 1) % 4]);
            const int eb = edge_between(face.corners[crossing[1]], face.corners[(crossing[1] + 1) % 4]);
            int in_corner = -1;
            for (int c : face.corners)
                if (inside(c))
                    in_corner = c;
            add_segment(face, ea, eb, in_corner);
        } else if (n == 4) {
            for (int m = 0; m < 4; ++m) {
                const int c = face.corners[m];
                if (!inside(c))
                    continue;
                const int prev = face.corners[(m + 3) % 4];
                const int nxt = face.corners[(m + 1) % 4];
                add_segment(face, edge_between(prev, c), edge_between(c, nxt), c);
            }
        }
    }

    Built out;
    std::array<bool, 12> used{};
    for (int start = 0; start < 12; ++start) {
        if (next[start] < 0 || used[start])
            continue;
        std::vector<int> loop;
        for (int e = start; !used[e]; e = next[e]) {
            used[e] = true;
            loop.push_back(e);
        }

        // Ear clipping that avoids diagonals lying in a cell face; such a
        // diagonal could coincide with one emitted by the neighbouring cell.
        while (loop.size() > 3) {
            const std::size_t m = loop.size();
            std::size_t ear = m;
            for (std::size_t i = 0; i < m; ++i) {
                if (!share_face(ef, loop[(i + m - 1) % m], loop[(i + 1) % m])) {
                    ear = i;
                    break;
                }
            }
            if (ear == m) {
                out.constrained = false;
                ear = 0;
            }
            auto& tri = out.c.triangles[out.c.triangle_count++];
            tri = {static_cast<std::uint8_t>(loop[(ear + m - 1) % m]),
                   static_cast<std::uint8_t>(loop[ear]),
                   static_cast<std::uint8_t>(loop[(ear + 1) % m])};
            loop.erase(loop.begin() + static_cast<std::ptrdiff_t>(ear));
        }
        if (loop.size() == 3) {
            out.c.triangles[out.c.triangle_count++] = {static_cast<std::uint8_t>(loop[0]),
                                                       static_cast<std::uint8_t>(loop[1]),
                                                       static_cast<std::uint8_t>(loop[2])};
        }
    }
    return out;
}

struct Tables {
    std::array<Case, 256> cases;
    int unconstrained = 0;

    Tables()
    {
        const auto ef = edge_faces();
        for (int i = 0; i < 256; ++i) {
            const Built b = build_case(i, ef);
            cases[i] = b.c;
            unconstrained += b.constrained ? 0 : 1;
        }
    }
};

const Tables& tables()
{
    static const Tables t;
    return t;
}

} // namespace

const std::array<Case, 256>& table() { return tables().cases; }

int unconstrained_case_count() { return tables().unconstrained; }

} // namespace tubular::mc
