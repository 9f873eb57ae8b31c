#include "tubular/mesher.hpp"

#include "tubular/mc_table.hpp"
#include "tubular/parallel.hpp"

#include <algorithm>
#include <compare>
#include <map>
#include <tuple>

namespace tubular {

namespace {

/// Lattice edge from point (x, y, z) one step along `axis`.
struct EdgeKey {
    int x = 0, y = 0, z = 0, axis = 0;
    auto operator<=>(const EdgeKey&) const = default;
};

struct KeyedVertex {
    EdgeKey key;
    Vec3 position;
};

struct BlockSoup {
    std::vector<KeyedVertex> vertices; // sorted by key, unique
    std::vector<std::array<EdgeKey, 3>> triangles;
};

constexpr int kDim = GridSpec::cube_dim;

BlockSoup emit_block(const CubeBlock& block, const GridSpec& spec)
{
    const auto& table = mc::table();
    const LatticePoint o{block.key.x * kDim, block.key.y * kDim, block.key.z * kDim};
    BlockSoup soup;

    for (int k = 0; k < kDim; ++k)
        for (int j = 0; j < kDim; ++j)
            for (int i = 0; i < kDim; ++i) {
                std::array<double, 8> f;
                int index = 0;
                for (int c = 0; c < 8; ++c) {
                    const auto& off = mc::kCornerOffset[c];
                    f[c] = block.at(i + off[0], j + off[1], k + off[2]);
                    if (f[c] < 0.0)
                        index |= 1 << c;
                }
                const mc::Case& cell = table[index];
                if (cell.triangle_count == 0)
                    continue;

                std::array<EdgeKey, 12> keys;
                std::array<bool, 12> made{};
                auto vertex = [&](int e) -> const EdgeKey& {
                    if (made[e])
                        return keys[e];
                    made[e] = true;
                    int c1 = mc::kEdgeCorners[e][0];
                    int c2 = mc::kEdgeCorners[e][1];
                    const auto* a = &mc::kCornerOffset[c1];
                    const auto* b = &mc::kCornerOffset[c2];
                    if (std::tie((*b)[0], (*b)[1], (*b)[2]) < std::tie((*a)[0], (*a)[1], (*a)[2])) {
                        std::swap(c1, c2);
                        std::swap(a, b);
                    }
                    int axis = 0;
                    while ((*a)[axis] == (*b)[axis])
                        ++axis;
                    const LatticePoint g1{o.x + i + (*a)[0], o.y + j + (*a)[1], o.z + k + (*a)[2]};
                    const LatticePoint g2{o.x + i + (*b)[0], o.y + j + (*b)[1], o.z + k + (*b)[2]};
                    const double d1 = std::abs(f[c1]);
                    const double d2 = std::abs(f[c2]);
                    const Vec3 p = (d2 * spec.position(g1) + d1 * spec.position(g2)) / (d1 + d2);
                    keys[e] = {g1.x, g1.y, g1.z, axis};
                    soup.vertices.push_back({keys[e], p});
                    return keys[e];
                };

                for (int t = 0; t < cell.triangle_count; ++t) {
                    const auto& tri = cell.triangles[t];
                    soup.triangles.push_back({vertex(tri[0]), vertex(tri[1]), vertex(tri[2])});
                }
            }

    auto by_key = [](const KeyedVertex& a, const KeyedVertex& b) { return a.key < b.key; };
    std::stable_sort(soup.vertices.begin(), soup.vertices.end(), by_key);
    soup.vertices.erase(std::unique(soup.vertices.begin(), soup.vertices.end(),
                                    [](const KeyedVertex& a, const KeyedVertex& b) { return a.key == b.key; }),
                        soup.vertices.end());
    return soup;
}

struct EdgeUse {
    std::uint32_t a, b;
    auto operator<=>(const EdgeUse&) const = default;
};

} // namespace

std::size_t MaskVolume::count() const noexcept
{
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

TriangleMesh marching_cubes(const SparseTsdfField& field, unsigned threads)
{
    const std::vector<CubeKey> keys = field.sorted_block_keys();
    std::vector<BlockSoup> soups(keys.size());
    parallel_for(keys.size(), threads, [&](std::size_t i, unsigned) {
        soups[i] = emit_block(field.blocks().at(keys[i]), field.spec());
    });

    std::vector<KeyedVertex> all;
    for (const auto& s : soups)
        all.insert(all.end(), s.vertices.begin(), s.vertices.end());
    std::stable_sort(all.begin(), all.end(),
                     [](const KeyedVertex& a, const KeyedVertex& b) { return a.key < b.key; });
    all.erase(std::unique(all.begin(), all.end(),
                          [](const KeyedVertex& a, const KeyedVertex& b) { return a.key == b.key; }),
              all.end());

    TriangleMesh mesh;
    mesh.vertices.reserve(all.size());
    for (const auto& v : all)
        mesh.vertices.push_back(v.position);

    auto lookup = [&](const EdgeKey& key) {
        const auto it = std::lower_bound(all.begin(), all.end(), key,
                                         [](const KeyedVertex& v, const EdgeKey& k) { return v.key < k; });
        return static_cast<std::uint32_t>(it - all.begin());
    };
    for (const auto& s : soups)
        for (const auto& tri : s.triangles)
            mesh.triangles.push_back({lookup(tri[0]), lookup(tri[1]), lookup(tri[2])});
    return mesh;
}

MaskVolume extract_mask(const SparseTsdfField& field, const LatticeBox& box)
{
    MaskVolume mask;
    mask.dims = {std::max(0, box.hi.x - box.lo.x + 1), std::max(0, box.hi.y - box.lo.y + 1),
                 std::max(0, box.hi.z - box.lo.z + 1)};
    mask.origin = field.spec().position(box.lo);
    mask.spacing = field.spec().voxel_size;
    mask.bits.assign(mask.voxel_count(), 0);
    if (mask.bits.empty())
        return mask;

    // Paint the clipped closed region of cube `key`. Interior cubes go first so
    // that stored samples take precedence, as in sample_at.
    auto paint = [&](const CubeKey& key, auto&& value) {
        const LatticePoint o{key.x * kDim, key.y * kDim, key.z * kDim};
        const int x0 = std::max(o.x, box.lo.x), x1 = std::min(o.x + kDim, box.hi.x);
        const int y0 = std::max(o.y, box.lo.y), y1 = std::min(o.y + kDim, box.hi.y);
        const int z0 = std::max(o.z, box.lo.z), z1 = std::min(o.z + kDim, box.hi.z);
        for (int z = z0; z <= z1; ++z)
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    mask.bits[mask.index(x - box.lo.x, y - box.lo.y, z - box.lo.z)] =
                        value(x - o.x, y - o.y, z - o.z);
    };

    for (const CubeKey& key : field.sorted_inside_keys())
        paint(key, [](int, int, int) { return std::uint8_t{1}; });
    for (const CubeKey& key : field.sorted_block_keys()) {
        const CubeBlock& block = field.blocks().at(key);
        paint(key, [&](int i, int j, int k) { return std::uint8_t{block.at(i, j, k) < 0.0}; });
    }
    return mask;
}

MaskVolume extract_mask(const SparseTsdfField& field)
{
    if (const auto box = field.lattice_extent())
        return extract_mask(field, *box);
    MaskVolume mask;
    mask.origin = field.spec().origin;
    mask.spacing = field.spec().voxel_size;
    return mask;
}

MeshReport inspect(const TriangleMesh& mesh)
{
    MeshReport report;
    report.triangles = mesh.triangles.size();

    std::vector<bool> used(mesh.vertices.size(), false);
    std::vector<EdgeUse> uses;
    uses.reserve(mesh.triangles.size() * 3);
    for (const auto& t : mesh.triangles)
        for (int c = 0; c < 3; ++c) {
            used.at(t[c]) = true;
            const std::uint32_t a = t[c], b = t[(c + 1) % 3];
            uses.push_back({std::min(a, b), std::max(a, b)});
        }
    std::sort(uses.begin(), uses.end());

    for (std::size_t i = 0; i < uses.size();) {
        std::size_t j = i;
        while (j < uses.size() && uses[j] == uses[i])
            ++j;
        ++report.edges;
        const std::size_t n = j - i;
        if (n == 1)
            ++report.boundary_edges;
        else if (n > 2)
            ++report.nonmanifold_edges;
        i = j;
    }
    report.vertices = static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
    report.euler_characteristic = static_cast<long>(report.vertices) - static_cast<long>(report.edges)
                                  + static_cast<long>(report.triangles);
    return report;
}

std::pair<TriangleMesh, MeshReport> weld_and_validate(const TriangleMesh& mesh)
{
    auto less = [](const Vec3& a, const Vec3& b) {
        return std::tie(a.x(), a.y(), a.z()) < std::tie(b.x(), b.y(), b.z());
    };
    std::map<Vec3, std::uint32_t, decltype(less)> ids(less);
    std::vector<std::uint32_t> remap(mesh.vertices.size());

    // Canonical vertex = first occurrence in the input order.
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const auto it = ids.emplace(mesh.vertices[i], static_cast<std::uint32_t>(i));
        remap[i] = it.first->second;
    }

    TriangleMesh out;
    std::vector<std::uint32_t> new_index(mesh.vertices.size(), UINT32_MAX);
    for (const auto& t : mesh.triangles) {
        std::array<std::uint32_t, 3> r{remap.at(t[0]), remap.at(t[1]), remap.at(t[2])};
        if (r[0] == r[1] || r[1] == r[2] || r[0] == r[2])
            continue;
        for (auto& v : r) {
            if (new_index[v] == UINT32_MAX) {
                new_index[v] = static_cast<std::uint32_t>(out.vertices.size());
                out.vertices.push_back(mesh.vertices[v]);
            }
            v = new_index[v];
        }
        out.triangles.push_back(r);
    }
    MeshReport report = inspect(out);
    return {std::move(out), report};
}

} // namespace tubular
