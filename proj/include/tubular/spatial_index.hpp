#pragma once

#include "tubular/types.hpp"

#include <cstdint>
#include <vector>

namespace tubular {

struct Neighbor {
    std::size_t index;
    double distance;
};

/// Static k-d tree over a point set.
///
/// Results are ordered by (distance, index), so ties resolve identically to an
/// exhaustive scan. Const queries are safe to run concurrently.
class SpatialIndex {
public:
    SpatialIndex() = default;
    explicit SpatialIndex(std::vector<Vec3> points);

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    const std::vector<Vec3>& points() const noexcept { return points_; }

    /// The min(k, size()) nearest points, ascending. Throws ValidationError on
    /// an empty index or k == 0.
    std::vector<Neighbor> knn(const Vec3& q, std::size_t k) const;

    /// Same as above, reusing `out`'s storage.
    void knn(const Vec3& q, std::size_t k, std::vector<Neighbor>& out) const;

    /// All points with distance <= radius, ascending.
    std::vector<Neighbor> radius_search(const Vec3& q, double radius) const;

private:
    struct Node {
        // Leaf when split_dim < 0: items [begin, end) of order_.
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t split_dim = -1;
        double split_value = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end);

    std::vector<Vec3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

} // namespace tubular
