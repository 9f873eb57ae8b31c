#pragma once

// Truncated signed distance field of a skeleton, stored sparsely as 8x8x8
// voxel cubes in a hash map keyed by integer cube coordinates.

#include "tubular/skeleton.hpp"
#include "tubular/spatial_index.hpp"
#include "tubular/types.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tubular {

enum class SdfMode { Exact, Fast };

/// Integer coordinates of a lattice sample.
struct LatticePoint {
    int x = 0, y = 0, z = 0;
    auto operator<=>(const LatticePoint&) const = default;
};

/// Integer coordinates of a cube. Cube c covers lattice samples [8c, 8c + 8]
/// on every axis; neighbouring cubes share their boundary samples.
struct CubeKey {
    int x = 0, y = 0, z = 0;
    auto operator<=>(const CubeKey&) const = default;
};

struct CubeKeyHash {
    std::size_t operator()(const CubeKey& k) const noexcept
    {
        std::uint64_t h = static_cast<std::uint32_t>(k.x);
        h = h * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint32_t>(k.y);
        h = h * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint32_t>(k.z);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

/// Inclusive lattice box.
struct LatticeBox {
    LatticePoint lo;
    LatticePoint hi;
};

struct GridSpec {
    static constexpr int cube_dim = 8;
    /// Samples per cube axis, boundary included.
    static constexpr int block_samples = cube_dim + 1;

    Vec3 origin = Vec3::Zero();
    double voxel_size = 0.025;
    double truncation = 0.1;

    double cube_edge() const { return voxel_size * cube_dim; }

    Vec3 position(const LatticePoint& g) const
    {
        return origin + voxel_size * Vec3(g.x, g.y, g.z);
    }
};

void validate(const GridSpec& spec);

/// Grid for a skeleton: the origin is the expanded bounding-box minimum
/// floored to a multiple of the cube edge.
GridSpec make_grid_spec(const Skeleton& s, double voxel_size, double truncation);

enum class CubeClass { Surface, Inside, Outside };

struct CubeBlock {
    static constexpr int n = GridSpec::block_samples;

    CubeKey key;
    CubeClass cls = CubeClass::Surface;
    std::vector<double> samples = std::vector<double>(n * n * n); ///< x fastest, clamped

    double at(int i, int j, int k) const { return samples[(k * n + j) * n + i]; }
    double& at(int i, int j, int k) { return samples[(k * n + j) * n + i]; }
};

class SparseTsdfField {
public:
    using BlockMap = std::unordered_map<CubeKey, CubeBlock, CubeKeyHash>;
    using KeySet = std::unordered_set<CubeKey, CubeKeyHash>;

    SparseTsdfField() = default;
    explicit SparseTsdfField(GridSpec spec) : spec_(spec) {}

    const GridSpec& spec() const noexcept { return spec_; }
    const BlockMap& blocks() const noexcept { return blocks_; }
    const KeySet& inside_keys() const noexcept { return inside_; }
    bool empty() const noexcept { return blocks_.empty() && inside_.empty(); }

    /// Throws ValidationError if the key is already present in either set.
    void insert_block(CubeBlock block);
    void insert_inside(const CubeKey& key);
    bool erase_block(const CubeKey& key) { return blocks_.erase(key) > 0; }

    /// Stored block keys in lexicographic (x, y, z) order.
    std::vector<CubeKey> sorted_block_keys() const;
    std::vector<CubeKey> sorted_inside_keys() const;

    /// The sample at lattice point g from any block covering it; -truncation
    /// if g lies in an interior cube (boundary included); empty otherwise.
    std::optional<double> sample_at(const LatticePoint& g) const;

    /// Smallest lattice box covering every stored and interior cube.
    std::optional<LatticeBox> lattice_extent() const;

private:
    GridSpec spec_;
    BlockMap blocks_;
    KeySet inside_;
};

/// Untruncated signed distance to the skeleton's tubular shape: the minimum
/// over the per-edge SDFs of every edge incident to the k nearest skeletal
/// points, and the ball SDF of the nearest point.
///
/// For Exact mode each edge endpoint becomes a slice whose normal is the
/// normalised sum of its incident edge directions (each flipped to agree with
/// the edge being evaluated).
class SkeletonSdf {
public:
    SkeletonSdf(const Skeleton& s, const SkeletonGraph& g, const SpatialIndex& index, std::size_t k,
                SdfMode mode);

    double operator()(const Vec3& v) const;

    /// Slice normal at vertex a for the edge (a, b).
    const Vec3& slice_normal(std::size_t a, std::size_t b) const;

    SdfMode mode() const noexcept { return mode_; }

private:
    const Skeleton& skeleton_;
    const SkeletonGraph& graph_;
    const SpatialIndex& index_;
    std::size_t k_;
    SdfMode mode_;
    std::vector<std::size_t> normal_offset_;
    std::vector<Vec3> normals_;
};

double point_sdf(const Vec3& v, const Skeleton& s, const SkeletonGraph& g, const SpatialIndex& index,
                 std::size_t k, SdfMode mode);

/// Every cube overlapping the skeleton's bounding box expanded by
/// (max radius + truncation + cube edge), once each, x fastest.
std::vector<CubeKey> candidate_cubes(const Skeleton& s, const GridSpec& spec);

struct PopulateStats {
    std::size_t candidates = 0;
    std::size_t evaluated = 0; ///< cubes that passed the corner screen
    std::size_t surface = 0;
    std::size_t inside = 0;
};

/// Screens each candidate cube by its 8 corner SDFs, evaluates the full block
/// of those that may hold surface, and keeps surface blocks (clamped to
/// [-truncation, truncation]) and interior cube keys. Cubes are evaluated on
/// `threads` workers (0 = all); the result does not depend on the count.
SparseTsdfField populate(const Skeleton& s, const SkeletonGraph& g, const SpatialIndex& index,
                         const GridSpec& spec, std::size_t k, SdfMode mode, unsigned threads = 0,
                         PopulateStats* stats = nullptr);

} // namespace tubular
