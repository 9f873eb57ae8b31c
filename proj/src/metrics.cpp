#include "tubular/metrics.hpp"

#include "tubular/parallel.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace tubular {

double dice(const MaskVolume& a, const MaskVolume& b)
{
    // Grids read back from text headers carry 9 significant digits.
    const double tol = 1e-6 * std::max(a.spacing, b.spacing);
    if (a.dims != b.dims || (a.origin - b.origin).cwiseAbs().maxCoeff() > tol
        || std::abs(a.spacing - b.spacing) > tol)
        throw ValidationError("dice: masks are on different grids; resample one onto the other");
    if (a.bits.size() != a.voxel_count() || b.bits.size() != b.voxel_count())
        throw ValidationError("dice: mask payload does not match its dimensions");

    std::size_t na = 0, nb = 0, both = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        const bool x = a.bits[i] != 0, y = b.bits[i] != 0;
        na += x;
        nb += y;
        both += x && y;
    }
    if (na + nb == 0)
        return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c)
{
    // Closest point by Voronoi region of the triangle (Ericson, RTCD 5.1.5).
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0)
        return ap.norm();

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3)
        return bp.norm();

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return (p - (a + v * ab)).norm();
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6)
        return cp.norm();

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return (p - (a + w * ac)).norm();
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + w * (c - b))).norm();
    }

    const double denom = va + vb + vc;
    if (!(std::abs(denom) > 0.0)) {
        // Zero-area triangle: fall back to its edges.
        auto seg = [&](const Vec3& u, const Vec3& w) {
            const Vec3 d = w - u;
            const double len2 = d.squaredNorm();
            const double t = len2 > 0.0 ? std::clamp((p - u).dot(d) / len2, 0.0, 1.0) : 0.0;
            return (p - (u + t * d)).norm();
        };
        return std::min({seg(a, b), seg(b, c), seg(c, a)});
    }
    const double v = vb / denom, w = vc / denom;
    return (p - (a + v * ab + w * ac)).norm();
}

struct TriangleDistance::Impl {
    struct Node {
        Vec3 lo, hi;
        std::uint32_t begin = 0, end = 0;
        std::int32_t left = -1, right = -1;
    };

    std::vector<Vec3> a, b, c;
    std::vector<std::uint32_t> order;
    std::vector<Node> nodes;

    static constexpr std::uint32_t kLeaf = 4;

    std::int32_t build(std::uint32_t begin, std::uint32_t end, const std::vector<Vec3>& centroid)
    {
        Node node;
        node.begin = begin;
        node.end = end;
        node.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
        node.hi = -node.lo;
        Vec3 clo = node.lo, chi = node.hi;
        for (std::uint32_t i = begin; i < end; ++i) {
            const std::uint32_t t = order[i];
            node.lo = node.lo.cwiseMin(a[t]).cwiseMin(b[t]).cwiseMin(c[t]);
            node.hi = node.hi.cwiseMax(a[t]).cwiseMax(b[t]).cwiseMax(c[t]);
            clo = clo.cwiseMin(centroid[t]);
            chi = chi.cwiseMax(centroid[t]);
        }
        const auto id = static_cast<std::int32_t>(nodes.size());
        nodes.push_back(node);
        if (end - begin <= kLeaf)
            return id;

        int axis = 0;
        (chi - clo).maxCoeff(&axis);
        const std::uint32_t mid = begin + (end - begin) / 2;
        std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                         [&](std::uint32_t x, std::uint32_t y) {
                             return centroid[x][axis] < centroid[y][axis]
                                    || (centroid[x][axis] == centroid[y][axis] && x < y);
                         });
        const std::int32_t l = build(begin, mid, centroid);
        const std::int32_t r = build(mid, end, centroid);
        nodes[id].left = l;
        nodes[id].right = r;
        return id;
    }

    static double box_d2(const Node& n, const Vec3& p)
    {
        const Vec3 d = (n.lo - p).cwiseMax(p - n.hi).cwiseMax(0.0);
        return d.squaredNorm();
    }

    double query(const Vec3& p) const
    {
        double best = std::numeric_limits<double>::infinity();
        std::vector<std::int32_t> stack{0};
        while (!stack.empty()) {
            const Node& n = nodes[stack.back()];
            stack.pop_back();
            if (box_d2(n, p) >= best * best)
                continue;
            if (n.left < 0) {
                for (std::uint32_t i = n.begin; i < n.end; ++i) {
                    const std::uint32_t t = order[i];
                    best = std::min(best, point_triangle_distance(p, a[t], b[t], c[t]));
                }
                continue;
            }
            const double dl = box_d2(nodes[n.left], p), dr = box_d2(nodes[n.right], p);
            // Visit the nearer child first.
            if (dl <= dr) {
                stack.push_back(n.right);
                stack.push_back(n.left);
            } else {
                stack.push_back(n.left);
                stack.push_back(n.right);
            }
        }
        return best;
    }
};

TriangleDistance::TriangleDistance(const TriangleMesh& mesh) : impl_(std::make_unique<Impl>())
{
    if (mesh.triangles.empty())
        throw ValidationError("mesh has no triangles");
    const std::size_t n = mesh.triangles.size();
    impl_->a.reserve(n);
    impl_->b.reserve(n);
    impl_->c.reserve(n);
    std::vector<Vec3> centroid;
    centroid.reserve(n);
    for (const auto& t : mesh.triangles) {
        impl_->a.push_back(mesh.vertices.at(t[0]));
        impl_->b.push_back(mesh.vertices.at(t[1]));
        impl_->c.push_back(mesh.vertices.at(t[2]));
        centroid.push_back((impl_->a.back() + impl_->b.back() + impl_->c.back()) / 3.0);
    }
    impl_->order.resize(n);
    std::iota(impl_->order.begin(), impl_->order.end(), 0u);
    impl_->build(0, static_cast<std::uint32_t>(n), centroid);
}

TriangleDistance::~TriangleDistance() = default;
TriangleDistance::TriangleDistance(TriangleDistance&&) noexcept = default;
TriangleDistance& TriangleDistance::operator=(TriangleDistance&&) noexcept = default;

double TriangleDistance::operator()(const Vec3& p) const { return impl_->query(p); }

namespace {

template <class F>
double mean_of(std::size_t n, unsigned threads, F&& value)
{
    std::vector<double> v(n);
    parallel_for(n, threads, [&](std::size_t i, unsigned) { v[i] = value(i); });
    // Sequential sum keeps the result independent of the thread count.
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
}

} // namespace

double radius_difference(const Skeleton& s, const TriangleMesh& mesh, unsigned threads)
{
    validate(s);
    const TriangleDistance dist(mesh);
    return mean_of(s.size(), threads,
                   [&](std::size_t i) { return std::abs(dist(s.points[i]) - s.radii[i]); });
}

double interpolate(const SparseTsdfField& field, const Vec3& p)
{
    const GridSpec& spec = field.spec();
    const Vec3 u = (p - spec.origin) / spec.voxel_size;
    const Vec3 base = u.array().floor();
    const Vec3 t = u - base;
    const LatticePoint g0{static_cast<int>(base.x()), static_cast<int>(base.y()), static_cast<int>(base.z())};

    double value = 0.0;
    for (int c = 0; c < 8; ++c) {
        const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
        const double w = (dx ? t.x() : 1.0 - t.x()) * (dy ? t.y() : 1.0 - t.y()) * (dz ? t.z() : 1.0 - t.z());
        const double f = field.sample_at({g0.x + dx, g0.y + dy, g0.z + dz}).value_or(spec.truncation);
        value += w * f;
    }
    return value;
}

double center_agreement(const Skeleton& s, const SparseTsdfField& field, unsigned threads)
{
    validate(s);
    const GridSpec& spec = field.spec();
    const double limit = static_cast<double>(std::numeric_limits<int>::max() / 2);
    return mean_of(s.size(), threads, [&](std::size_t i) {
        const Vec3 u = (s.points[i] - spec.origin) / spec.voxel_size;
        if (u.cwiseAbs().maxCoeff() > limit)
            return 0.0;
        return interpolate(field, s.points[i]) < 0.0 ? 1.0 : 0.0;
    });
}

double winding_number(const TriangleMesh& mesh, const Vec3& p)
{
    double total = 0.0;
    for (const auto& t : mesh.triangles) {
        const Vec3 a = mesh.vertices.at(t[0]) - p;
        const Vec3 b = mesh.vertices.at(t[1]) - p;
        const Vec3 c = mesh.vertices.at(t[2]) - p;
        const double la = a.norm(), lb = b.norm(), lc = c.norm();
        const double num = a.dot(b.cross(c));
        const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
        total += 2.0 * std::atan2(num, den);
    }
    return total / (4.0 * std::numbers::pi);
}

double center_agreement(const Skeleton& s, const TriangleMesh& mesh, unsigned threads)
{
    validate(s);
    return mean_of(s.size(), threads,
                   [&](std::size_t i) { return winding_number(mesh, s.points[i]) > 0.5 ? 1.0 : 0.0; });
}

} // namespace tubular
