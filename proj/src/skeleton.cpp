#include "tubular/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace tubular {

namespace {

// Unbiased draw in [0, bound]; avoids std::uniform_int_distribution.
std::uint64_t uniform_below_or_equal(std::mt19937_64& rng, std::uint64_t bound)
{
    const std::uint64_t range = bound + 1;
    if (range == 0)
        return rng();
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % range;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % range;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed)
{
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i)
        perm[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below_or_equal(rng, i - 1));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

double angle_deg(const Vec3& a, const Vec3& b)
{
    const double c = a.dot(b) / (a.norm() * b.norm());
    return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

} // namespace

void validate(const Skeleton& s)
{
    if (s.points.empty())
        throw ValidationError("skeleton is empty");
    if (s.points.size() != s.radii.size())
        throw ValidationError("skeleton: point and radius counts differ");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.points[i].allFinite())
            throw ValidationError("skeleton: non-finite coordinate at point " + std::to_string(i));
        if (!(s.radii[i] > 0.0) || !std::isfinite(s.radii[i]))
            throw ValidationError("skeleton: radius must be positive at point " + std::to_string(i));
    }
}

Aabb bounding_box(const Skeleton& s)
{
    if (s.points.empty())
        throw ValidationError("bounding_box: empty skeleton");
    Aabb box{s.points.front(), s.points.front()};
    for (const auto& p : s.points) {
        box.lo = box.lo.cwiseMin(p);
        box.hi = box.hi.cwiseMax(p);
    }
    return box;
}

void SkeletonGraph::add_edge(std::size_t a, std::size_t b)
{
    if (a >= adjacency_.size() || b >= adjacency_.size())
        throw ValidationError("add_edge: vertex index out of range");
    if (a == b)
        return;
    auto insert = [](std::vector<std::size_t>& list, std::size_t v) {
        auto it = std::lower_bound(list.begin(), list.end(), v);
        if (it == list.end() || *it != v)
            list.insert(it, v);
    };
    insert(adjacency_[a], b);
    insert(adjacency_[b], a);
}

std::size_t SkeletonGraph::edge_count() const noexcept
{
    std::size_t twice = 0;
    for (const auto& list : adjacency_)
        twice += list.size();
    return twice / 2;
}

bool SkeletonGraph::has_edge(std::size_t a, std::size_t b) const
{
    const auto& list = adjacency_.at(a);
    return std::binary_search(list.begin(), list.end(), b);
}

std::vector<std::pair<std::size_t, std::size_t>> SkeletonGraph::edges() const
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t a = 0; a < adjacency_.size(); ++a)
        for (auto b : adjacency_[a])
            if (a < b)
                out.emplace_back(a, b);
    return out;
}

Skeleton radius_cluster(const Skeleton& s, double strength, std::uint64_t seed)
{
    validate(s);
    if (!(strength > 0.0))
        throw ValidationError("radius_cluster: strength must be positive");

    const auto perm = seeded_permutation(s.size(), seed);
    std::vector<Vec3> points(s.size());
    std::vector<double> radii(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        points[i] = s.points[perm[i]];
        radii[i] = s.radii[perm[i]];
    }
    const SpatialIndex index(points);

    std::vector<bool> claimed(s.size(), false);
    Skeleton out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (claimed[i])
            continue;
        Vec3 sum = Vec3::Zero();
        double radius_sum = 0.0;
        std::size_t n = 0;
        for (const auto& hit : index.radius_search(points[i], strength * radii[i])) {
            if (claimed[hit.index])
                continue;
            claimed[hit.index] = true;
            sum += points[hit.index];
            radius_sum += radii[hit.index];
            ++n;
        }
        out.points.push_back(sum / static_cast<double>(n));
        out.radii.push_back(radius_sum / static_cast<double>(n));
    }
    return out;
}

SkeletonGraph build_graph(const Skeleton& s, std::size_t k, double multiplier,
                          double angle_threshold_deg)
{
    validate(s);
    return build_graph(s, SpatialIndex(s.points), k, multiplier, angle_threshold_deg);
}

SkeletonGraph build_graph(const Skeleton& s, const SpatialIndex& index, std::size_t k,
                          double multiplier, double angle_threshold_deg)
{
    validate(s);
    if (s.size() < 2)
        throw ValidationError("build_graph: need at least two skeletal points");
    if (k < 2)
        throw ValidationError("build_graph: k must be at least 2");
    if (!(multiplier >= 1.0))
        throw ValidationError("build_graph: distance multiplier must be >= 1");
    if (!(angle_threshold_deg > 0.0 && angle_threshold_deg < 180.0))
        throw ValidationError("build_graph: angle threshold must lie in (0, 180) degrees");
    if (index.size() != s.size())
        throw ValidationError("build_graph: index does not match skeleton");

    const double eps = 1e-9 * std::max(bounding_box(s).diagonal(), 1e-300);
    SkeletonGraph graph(s.size());
    std::vector<Neighbor> found;
    std::vector<Neighbor> candidates;
    std::vector<Vec3> directions;

    for (std::size_t v = 0; v < s.size(); ++v) {
        index.knn(s.points[v], k, found);
        candidates.clear();
        for (const auto& n : found)
            if (n.index != v)
                candidates.push_back(n);
        if (candidates.empty())
            continue;

        const double d_min = candidates.front().distance;
        if (d_min < eps)
            throw ValidationError("build_graph: coincident skeletal points at index " + std::to_string(v)
                                  + "; merge them with radius_cluster first");

        // Distances equal up to rounding are scanned in index order, so
        // symmetric configurations do not depend on floating-point noise.
        const double tie = 1e-9 * d_min;
        for (std::size_t first = 0; first < candidates.size();) {
            std::size_t last = first + 1;
            while (last < candidates.size()
                   && candidates[last].distance - candidates[first].distance <= tie)
                ++last;
            std::sort(candidates.begin() + first, candidates.begin() + last,
                      [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
            first = last;
        }

        directions.clear();
        for (const auto& c : candidates) {
            if (c.distance > multiplier * d_min)
                break;
            const Vec3 dir = s.points[c.index] - s.points[v];
            const bool new_direction = std::none_of(directions.begin(), directions.end(),
                [&](const Vec3& d) { return angle_deg(dir, d) <= angle_threshold_deg; });
            if (new_direction) {
                graph.add_edge(v, c.index);
                directions.push_back(dir);
            }
        }
    }
    return graph;
}

} // namespace tubular
