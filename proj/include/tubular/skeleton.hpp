#pragma once

#include "tubular/spatial_index.hpp"
#include "tubular/types.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tubular {

/// Unordered skeletal points with per-point tube radius.
struct Skeleton {
    std::vector<Vec3> points;
    std::vector<double> radii;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
};

/// Throws ValidationError unless the skeleton is non-empty, has matching
/// point/radius counts, finite coordinates and positive radii.
void validate(const Skeleton& s);

struct Aabb {
    Vec3 lo;
    Vec3 hi;

    double diagonal() const { return (hi - lo).norm(); }
};

/// Bounding box of the skeletal points (radii not included).
Aabb bounding_box(const Skeleton& s);

/// Undirected simple graph over skeleton indices. Adjacency lists are kept
/// sorted; self loops and duplicate edges are ignored on insertion.
class SkeletonGraph {
public:
    SkeletonGraph() = default;
    explicit SkeletonGraph(std::size_t vertex_count) : adjacency_(vertex_count) {}

    void add_edge(std::size_t a, std::size_t b);

    std::size_t vertex_count() const noexcept { return adjacency_.size(); }
    std::size_t edge_count() const noexcept;
    std::size_t degree(std::size_t v) const { return adjacency_.at(v).size(); }
    bool has_edge(std::size_t a, std::size_t b) const;

    std::span<const std::size_t> neighbors(std::size_t v) const { return adjacency_.at(v); }

    /// Every edge once, as (low, high), in lexicographic order.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

private:
    std::vector<std::vector<std::size_t>> adjacency_;
};

/// Greedy radius clustering in seeded-shuffle order: each unclaimed point
/// claims every unclaimed point within strength * its radius, and the cluster
/// is replaced by the mean position and mean radius of its members.
Skeleton radius_cluster(const Skeleton& s, double strength, std::uint64_t seed = 0);

/// Adaptive graph construction. For every point, the k nearest points (the
/// point itself included) are scanned in ascending distance; the scan stops at
/// the first candidate farther than multiplier * (nearest distance), and a
/// candidate is accepted only if its direction differs from every previously
/// accepted direction at that point by more than angle_threshold_deg.
/// Accepted pairs become undirected edges.
///
/// Coincident points make the nearest distance zero; they must be merged
/// (radius_cluster) first and raise ValidationError here.
SkeletonGraph build_graph(const Skeleton& s, std::size_t k, double multiplier,
                          double angle_threshold_deg);

SkeletonGraph build_graph(const Skeleton& s, const SpatialIndex& index, std::size_t k,
                          double multiplier, double angle_threshold_deg);

} // namespace tubular
