#pragma once

// Marching cubes case table.
//
// Corner c of a cell sits at offset (c & 1 ^ c >> 1 & 1, c >> 1 & 1, c >> 2 & 1),
// i.e. the usual ordering 0:(0,0,0) 1:(1,0,0) 2:(1,1,0) 3:(0,1,0) and 4..7 the
// same one level up. Bit c of a case index is set when corner c is inside
// (negative). Triangle vertices are cell edge ids 0..11.
//
// The table is generated from per-face rules: each cell face pairs its
// sign-change edges on its own, and an ambiguous face always separates its two
// inside corners. Triangles are wound counter-clockwise seen from the positive side.

#include <array>
#include <cstdint>

namespace tubular::mc {

struct Case {
    std::uint8_t triangle_count = 0;
    std::array<std::array<std::uint8_t, 3>, 12> triangles{};
};

inline constexpr std::array<std::array<int, 3>, 8> kCornerOffset{{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

inline constexpr std::array<std::array<int, 2>, 12> kEdgeCorners{{
    {0, 1}, {1, 2}, {2, 3}, {3, 0},
    {4, 5}, {5, 6}, {6, 7}, {7, 4},
    {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

const std::array<Case, 256>& table();

/// Number of cases whose polygons could not be triangulated without a
/// diagonal lying in a cell face. Zero for the generated table.
int unconstrained_case_count();

} // namespace tubular::mc
