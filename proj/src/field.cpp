#include "tubular/field.hpp"

#include "tubular/geometry.hpp"
#include "tubular/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace tubular {

namespace {

int floor_div(int a, int b)
{
    const int q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

LatticePoint cube_origin(const CubeKey& c)
{
    constexpr int d = GridSpec::cube_dim;
    return {c.x * d, c.y * d, c.z * d};
}

} // namespace

void validate(const GridSpec& spec)
{
    if (!spec.origin.allFinite())
        throw ValidationError("grid: non-finite origin");
    if (!(spec.voxel_size > 0.0) || !std::isfinite(spec.voxel_size))
        throw ValidationError("grid: voxel size must be positive");
    if (!(spec.truncation > 0.0) || !std::isfinite(spec.truncation))
        throw ValidationError("grid: truncation distance must be positive");
}

namespace {

Aabb expanded_box(const Skeleton& s, const GridSpec& spec)
{
    Aabb box = bounding_box(s);
    const double max_r = *std::max_element(s.radii.begin(), s.radii.end());
    const double pad = max_r + spec.truncation + spec.cube_edge();
    box.lo.array() -= pad;
    box.hi.array() += pad;
    return box;
}

} // namespace

GridSpec make_grid_spec(const Skeleton& s, double voxel_size, double truncation)
{
    validate(s);
    GridSpec spec;
    spec.voxel_size = voxel_size;
    spec.truncation = truncation;
    validate(spec);
    const Aabb box = expanded_box(s, spec);
    const double e = spec.cube_edge();
    for (int a = 0; a < 3; ++a)
        spec.origin[a] = e * std::floor(box.lo[a] / e);
    return spec;
}

void SparseTsdfField::insert_block(CubeBlock block)
{
    if (inside_.count(block.key) || blocks_.count(block.key))
        throw ValidationError("insert_block: cube already present");
    const CubeKey key = block.key;
    blocks_.emplace(key, std::move(block));
}

void SparseTsdfField::insert_inside(const CubeKey& key)
{
    if (inside_.count(key) || blocks_.count(key))
        throw ValidationError("insert_inside: cube already present");
    inside_.insert(key);
}

std::vector<CubeKey> SparseTsdfField::sorted_block_keys() const
{
    std::vector<CubeKey> keys;
    keys.reserve(blocks_.size());
    for (const auto& [key, block] : blocks_)
        keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    return keys;
}

std::vector<CubeKey> SparseTsdfField::sorted_inside_keys() const
{
    std::vector<CubeKey> keys(inside_.begin(), inside_.end());
    std::sort(keys.begin(), keys.end());
    return keys;
}

std::optional<double> SparseTsdfField::sample_at(const LatticePoint& g) const
{
    constexpr int d = GridSpec::cube_dim;
    // A sample on a cube face/edge/corner belongs to up to 8 cubes.
    std::array<int, 2> cx{}, cy{}, cz{};
    int nx = 0, ny = 0, nz = 0;
    auto owners = [](int v, std::array<int, 2>& out, int& count) {
        out[0] = floor_div(v, d);
        count = 1;
        if (v - out[0] * d == 0)
            out[count++] = out[0] - 1;
    };
    owners(g.x, cx, nx);
    owners(g.y, cy, ny);
    owners(g.z, cz, nz);

    bool inside = false;
    for (int a = 0; a < nx; ++a)
        for (int b = 0; b < ny; ++b)
            for (int c = 0; c < nz; ++c) {
                const CubeKey key{cx[a], cy[b], cz[c]};
                if (auto it = blocks_.find(key); it != blocks_.end()) {
                    const LatticePoint o = cube_origin(key);
                    return it->second.at(g.x - o.x, g.y - o.y, g.z - o.z);
                }
                if (!inside && inside_.count(key))
                    inside = true;
            }
    if (inside)
        return -spec_.truncation;
    return std::nullopt;
}

std::optional<LatticeBox> SparseTsdfField::lattice_extent() const
{
    if (empty())
        return std::nullopt;
    constexpr int d = GridSpec::cube_dim;
    LatticeBox box{{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
                    std::numeric_limits<int>::max()},
                   {std::numeric_limits<int>::min(), std::numeric_limits<int>::min(),
                    std::numeric_limits<int>::min()}};
    auto grow = [&](const CubeKey& k) {
        const LatticePoint o = cube_origin(k);
        box.lo = {std::min(box.lo.x, o.x), std::min(box.lo.y, o.y), std::min(box.lo.z, o.z)};
        box.hi = {std::max(box.hi.x, o.x + d), std::max(box.hi.y, o.y + d), std::max(box.hi.z, o.z + d)};
    };
    for (const auto& [key, block] : blocks_)
        grow(key);
    for (const auto& key : inside_)
        grow(key);
    return box;
}

SkeletonSdf::SkeletonSdf(const Skeleton& s, const SkeletonGraph& g, const SpatialIndex& index,
                         std::size_t k, SdfMode mode)
    : skeleton_(s), graph_(g), index_(index), k_(k), mode_(mode)
{
    validate(s);
    if (g.vertex_count() != s.size())
        throw ValidationError("SkeletonSdf: graph and skeleton sizes differ");
    if (index.size() != s.size())
        throw ValidationError("SkeletonSdf: index and skeleton sizes differ");
    if (k == 0)
        throw ValidationError("SkeletonSdf: k must be at least 1");

    normal_offset_.resize(s.size() + 1, 0);
    for (std::size_t v = 0; v < s.size(); ++v)
        normal_offset_[v + 1] = normal_offset_[v] + g.degree(v);
    normals_.resize(normal_offset_.back());

    for (std::size_t a = 0; a < s.size(); ++a) {
        const auto nbrs = g.neighbors(a);
        for (std::size_t j = 0; j < nbrs.size(); ++j) {
            const Vec3 ref = (s.points[nbrs[j]] - s.points[a]).normalized();
            Vec3 sum = Vec3::Zero();
            for (auto c : nbrs) {
                Vec3 u = (s.points[c] - s.points[a]).normalized();
                if (u.dot(ref) < 0.0)
                    u = -u;
                sum += u;
            }
            const double len = sum.norm();
            normals_[normal_offset_[a] + j] = len > 1e-9 ? Vec3(sum / len) : ref;
        }
    }
}

const Vec3& SkeletonSdf::slice_normal(std::size_t a, std::size_t b) const
{
    const auto nbrs = graph_.neighbors(a);
    const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), b);
    if (it == nbrs.end() || *it != b)
        throw ValidationError("slice_normal: no such edge");
    return normals_[normal_offset_[a] + static_cast<std::size_t>(it - nbrs.begin())];
}

double SkeletonSdf::operator()(const Vec3& v) const
{
    thread_local std::vector<Neighbor> nearest;
    index_.knn(v, k_, nearest);

    const auto& pts = skeleton_.points;
    const auto& radii = skeleton_.radii;
    const std::size_t c0 = nearest.front().index;
    double best = ball_sdf(pts[c0], radii[c0], v);

    auto in_nearest = [&](std::size_t idx) {
        return std::any_of(nearest.begin(), nearest.end(),
                           [idx](const Neighbor& n) { return n.index == idx; });
    };

    for (const auto& n : nearest) {
        const std::size_t i = n.index;
        const auto nbrs = graph_.neighbors(i);
        for (std::size_t j = 0; j < nbrs.size(); ++j) {
            const std::size_t other = nbrs[j];
            if (other < i && in_nearest(other))
                continue; // evaluated from the other endpoint
            const std::size_t a = std::min(i, other);
            const std::size_t b = std::max(i, other);
            double f;
            if (mode_ == SdfMode::Fast) {
                f = sdf_pair_fast(pts[a], radii[a], pts[b], radii[b], v);
            } else {
                const Slice sa{pts[a], slice_normal(a, b), radii[a]};
                const Slice sb{pts[b], slice_normal(b, a), radii[b]};
                f = sdf_pair_exact(sa, sb, v);
            }
            best = std::min(best, f);
        }
    }
    return best;
}

double point_sdf(const Vec3& v, const Skeleton& s, const SkeletonGraph& g, const SpatialIndex& index,
                 std::size_t k, SdfMode mode)
{
    return SkeletonSdf(s, g, index, k, mode)(v);
}

std::vector<CubeKey> candidate_cubes(const Skeleton& s, const GridSpec& spec)
{
    validate(s);
    validate(spec);
    const Aabb box = expanded_box(s, spec);
    const double e = spec.cube_edge();
    std::array<int, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
        lo[a] = static_cast<int>(std::floor((box.lo[a] - spec.origin[a]) / e));
        hi[a] = static_cast<int>(std::ceil((box.hi[a] - spec.origin[a]) / e)) - 1;
    }
    std::vector<CubeKey> keys;
    keys.reserve(static_cast<std::size_t>(hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1) * (hi[2] - lo[2] + 1));
    for (int z = lo[2]; z <= hi[2]; ++z)
        for (int y = lo[1]; y <= hi[1]; ++y)
            for (int x = lo[0]; x <= hi[0]; ++x)
                keys.push_back({x, y, z});
    return keys;
}

SparseTsdfField populate(const Skeleton& s, const SkeletonGraph& g, const SpatialIndex& index,
                         const GridSpec& spec, std::size_t k, SdfMode mode, unsigned threads,
                         PopulateStats* stats)
{
    validate(spec);
    const SkeletonSdf sdf(s, g, index, k, mode);
    const std::vector<CubeKey> keys = candidate_cubes(s, spec);

    constexpr int d = GridSpec::cube_dim;
    constexpr int n = GridSpec::block_samples;
    const double dt = spec.truncation;
    const double screen = dt + 0.5 * std::sqrt(3.0) * spec.cube_edge();

    struct Outcome {
        CubeClass cls = CubeClass::Outside;
        bool evaluated = false;
        std::optional<CubeBlock> block;
    };
    std::vector<Outcome> outcomes(keys.size());

    parallel_for(keys.size(), threads, [&](std::size_t idx, unsigned) {
        const CubeKey key = keys[idx];
        const LatticePoint o = cube_origin(key);
        Outcome& out = outcomes[idx];

        double min_abs = std::numeric_limits<double>::infinity();
        bool any_neg = false, any_pos = false, all_deep = true;
        for (int corner = 0; corner < 8; ++corner) {
            const LatticePoint gp{o.x + (corner & 1) * d, o.y + ((corner >> 1) & 1) * d,
                                  o.z + ((corner >> 2) & 1) * d};
            const double f = sdf(spec.position(gp));
            min_abs = std::min(min_abs, std::abs(f));
            (f < 0.0 ? any_neg : any_pos) = true;
            all_deep = all_deep && f <= -dt;
        }

        if (!(min_abs <= screen || (any_neg && any_pos))) {
            out.cls = all_deep ? CubeClass::Inside : CubeClass::Outside;
            return;
        }

        out.evaluated = true;
        CubeBlock block;
        block.key = key;
        bool near = false;
        any_neg = any_pos = false;
        for (int kz = 0; kz < n; ++kz)
            for (int jy = 0; jy < n; ++jy)
                for (int ix = 0; ix < n; ++ix) {
                    const double f = sdf(spec.position({o.x + ix, o.y + jy, o.z + kz}));
                    near = near || std::abs(f) < dt;
                    (f < 0.0 ? any_neg : any_pos) = true;
                    block.at(ix, jy, kz) = std::clamp(f, -dt, dt);
                }
        if (near || (any_neg && any_pos)) {
            block.cls = CubeClass::Surface;
            out.cls = CubeClass::Surface;
            out.block.emplace(std::move(block));
        } else {
            out.cls = any_neg ? CubeClass::Inside : CubeClass::Outside;
        }
    });

    SparseTsdfField field(spec);
    PopulateStats local;
    local.candidates = keys.size();
    for (std::size_t i = 0; i < keys.size(); ++i) {
        auto& out = outcomes[i];
        local.evaluated += out.evaluated ? 1 : 0;
        if (out.cls == CubeClass::Surface) {
            field.insert_block(std::move(*out.block));
            ++local.surface;
        } else if (out.cls == CubeClass::Inside) {
            field.insert_inside(keys[i]);
            ++local.inside;
        }
    }
    if (stats)
        *stats = local;
    return field;
}

} // namespace tubular
