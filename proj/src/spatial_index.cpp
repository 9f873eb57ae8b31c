#include "tubular/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tubular {

namespace {

constexpr std::uint32_t kLeafSize = 8;

struct Candidate {
    double d2;
    std::uint32_t index;
};

bool closer(const Candidate& a, const Candidate& b)
{
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
}

} // namespace

SpatialIndex::SpatialIndex(std::vector<Vec3> points) : points_(std::move(points))
{
    if (points_.size() >= std::numeric_limits<std::uint32_t>::max())
        throw ValidationError("SpatialIndex: too many points");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points_.empty()) {
        nodes_.reserve(2 * points_.size() / kLeafSize + 1);
        build(0, static_cast<std::uint32_t>(points_.size()));
    }
}

std::uint32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end)
{
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize)
        return id;

    Vec3 lo = points_[order_[begin]];
    Vec3 hi = lo;
    for (auto i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int dim = 0;
    (hi - lo).maxCoeff(&dim);
    if (hi[dim] == lo[dim])
        return id; // all points coincide

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double pa = points_[a][dim], pb = points_[b][dim];
                         return pa < pb || (pa == pb && a < b);
                     });

    const double split = points_[order_[mid]][dim];
    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    Node& node = nodes_[id];
    node.split_dim = dim;
    node.split_value = split;
    node.left = left;
    node.right = right;
    return id;
}

void SpatialIndex::knn(const Vec3& q, std::size_t k, std::vector<Neighbor>& out) const
{
    if (points_.empty())
        throw ValidationError("knn: empty index");
    if (k == 0)
        throw ValidationError("knn: k must be at least 1");
    k = std::min(k, points_.size());

    // Sorted best-so-far list; k is small in practice.
    thread_local std::vector<Candidate> best;
    best.clear();
    best.reserve(k + 1);

    auto offer = [&](std::uint32_t idx) {
        const Candidate c{(points_[idx] - q).squaredNorm(), idx};
        if (best.size() == k && !closer(c, best.back()))
            return;
        auto pos = std::upper_bound(best.begin(), best.end(), c, closer);
        best.insert(pos, c);
        if (best.size() > k)
            best.pop_back();
    };

    // Explicit stack of (node, lower bound on squared distance).
    struct Pending {
        std::uint32_t node;
        double min_d2;
    };
    Pending stack[64];
    int top = 0;
    stack[top++] = {0, 0.0};
    while (top > 0) {
        const Pending p = stack[--top];
        if (best.size() == k && p.min_d2 > best.back().d2)
            continue;
        const Node& node = nodes_[p.node];
        if (node.split_dim < 0) {
            for (auto i = node.begin; i < node.end; ++i)
                offer(order_[i]);
            continue;
        }
        const double diff = q[node.split_dim] - node.split_value;
        const std::uint32_t near = diff < 0.0 ? node.left : node.right;
        const std::uint32_t far = diff < 0.0 ? node.right : node.left;
        stack[top++] = {far, std::max(p.min_d2, diff * diff)};
        stack[top++] = {near, p.min_d2};
    }

    out.clear();
    out.reserve(best.size());
    for (const auto& c : best)
        out.push_back({c.index, std::sqrt(c.d2)});
}

std::vector<Neighbor> SpatialIndex::knn(const Vec3& q, std::size_t k) const
{
    std::vector<Neighbor> out;
    knn(q, k, out);
    return out;
}

std::vector<Neighbor> SpatialIndex::radius_search(const Vec3& q, double radius) const
{
    std::vector<Candidate> hits;
    if (points_.empty() || !(radius >= 0.0))
        return {};
    const double r2 = radius * radius;

    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (node.split_dim < 0) {
            for (auto i = node.begin; i < node.end; ++i) {
                const auto idx = order_[i];
                const double d2 = (points_[idx] - q).squaredNorm();
                if (d2 <= r2)
                    hits.push_back({d2, idx});
            }
            continue;
        }
        const double diff = q[node.split_dim] - node.split_value;
        if (diff < 0.0 || diff * diff <= r2)
            stack[top++] = node.left;
        if (diff >= 0.0 || diff * diff <= r2)
            stack[top++] = node.right;
    }
    std::sort(hits.begin(), hits.end(), closer);
    std::vector<Neighbor> out;
    out.reserve(hits.size());
    for (const auto& c : hits)
        out.push_back({c.index, std::sqrt(c.d2)});
    return out;
}

} // namespace tubular
