#include "tubular/synth.hpp"

#include "tubular/geometry.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace tubular::synth {

namespace {

void require(bool ok, const char* what)
{
    if (!ok)
        throw ValidationError(what);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

void push(Skeleton& s, const Vec3& p, double r)
{
    s.points.push_back(p);
    s.radii.push_back(r);
}

// Uniform in [0, 1) from the raw engine output, identical on every platform.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

Skeleton gen_tube(const Vec3& start, const Vec3& end, double r, int n)
{
    require(n >= 2, "gen_tube: need at least 2 points");
    require(positive(r), "gen_tube: radius must be positive");
    require(start.allFinite() && end.allFinite(), "gen_tube: non-finite endpoint");
    require((end - start).norm() > 0.0, "gen_tube: start and end coincide");
    Skeleton s;
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        push(s, i == n - 1 ? end : Vec3(start + t * (end - start)), r);
    }
    return s;
}

Skeleton gen_y_bifurcation(double trunk_len, double branch_len, double angle_deg, double r_trunk,
                           double r_branch, double spacing)
{
    require(positive(trunk_len) && positive(branch_len), "gen_y_bifurcation: lengths must be positive");
    require(positive(r_trunk) && positive(r_branch), "gen_y_bifurcation: radii must be positive");
    require(positive(spacing), "gen_y_bifurcation: spacing must be positive");
    require(std::isfinite(angle_deg) && angle_deg > 0.0 && angle_deg <= 180.0,
            "gen_y_bifurcation: angle must be in (0, 180]");

    Skeleton s;
    const int trunk_steps = std::max(1, static_cast<int>(std::lround(trunk_len / spacing)));
    for (int i = 0; i <= trunk_steps; ++i) {
        const double z = -trunk_len + trunk_len * i / trunk_steps;
        push(s, Vec3(0, 0, i == trunk_steps ? 0.0 : z), r_trunk);
    }

    const double half = 0.5 * angle_deg * std::numbers::pi / 180.0;
    const int branch_steps = std::max(1, static_cast<int>(std::lround(branch_len / spacing)));
    for (double side : {1.0, -1.0}) {
        const Vec3 dir(side * std::sin(half), 0.0, std::cos(half));
        for (int i = 1; i <= branch_steps; ++i)
            push(s, dir * (branch_len * i / branch_steps), r_branch);
    }
    return s;
}

Skeleton gen_ring(const Vec3& center, double radius_major, double r_tube, int n)
{
    require(n >= 8, "gen_ring: need at least 8 points");
    require(positive(r_tube) && std::isfinite(radius_major) && radius_major > r_tube,
            "gen_ring: need radius_major > r_tube > 0");
    require(center.allFinite(), "gen_ring: non-finite center");
    Skeleton s;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * i / n;
        push(s, center + radius_major * Vec3(std::cos(t), std::sin(t), 0.0), r_tube);
    }
    return s;
}

Skeleton gen_helix(double radius, double pitch, double turns, double r_tube, int n)
{
    require(n >= 2, "gen_helix: need at least 2 points");
    require(positive(radius) && positive(pitch) && positive(turns) && positive(r_tube),
            "gen_helix: parameters must be positive");
    Skeleton s;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * turns * i / (n - 1);
        push(s, Vec3(radius * std::cos(t), radius * std::sin(t), pitch * t / (2.0 * std::numbers::pi)), r_tube);
    }
    return s;
}

Skeleton gen_tree(int n_points, int depth, std::uint64_t seed, double r_root)
{
    require(depth >= 0 && depth <= 16, "gen_tree: depth must be in [0, 16]");
    require(positive(r_root), "gen_tree: radius must be positive");
    const std::size_t segments = (std::size_t{2} << depth) - 1;
    require(n_points >= static_cast<long long>(segments) + 1, "gen_tree: too few points for the depth");

    struct Segment {
        Vec3 start, end;
        double radius;
    };
    std::vector<Segment> segs;
    segs.reserve(segments);
    segs.push_back({Vec3::Zero(), Vec3(0, 0, 1), r_root});

    std::mt19937_64 rng(seed);
    // Breadth-first: children of segment i are 2i+1 and 2i+2.
    for (std::size_t i = 0; segs.size() < segments; ++i) {
        const Segment parent = segs[i];
        const Vec3 dir = (parent.end - parent.start).normalized();
        const double len = 0.7 * (parent.end - parent.start).norm();
        const Mat3 frame = rotation_from_z(dir);
        const double azimuth = 2.0 * std::numbers::pi * unit(rng);
        for (int c = 0; c < 2; ++c) {
            const double tilt = (30.0 + 15.0 * unit(rng)) * std::numbers::pi / 180.0;
            const double phi = azimuth + c * std::numbers::pi;
            const Vec3 local(std::sin(tilt) * std::cos(phi), std::sin(tilt) * std::sin(phi), std::cos(tilt));
            segs.push_back({parent.end, parent.end + len * (frame * local), 0.7 * parent.radius});
        }
    }

    // Root keeps its start point; every segment contributes points after its start.
    const std::size_t budget = static_cast<std::size_t>(n_points) - 1;
    double total = 0.0;
    for (const auto& sg : segs)
        total += (sg.end - sg.start).norm();
    std::vector<std::size_t> count(segs.size(), 1);
    std::vector<std::pair<double, std::size_t>> remainder;
    std::size_t assigned = segs.size();
    const std::size_t spare = budget - segs.size();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const double share = spare * (segs[i].end - segs[i].start).norm() / total;
        const auto whole = static_cast<std::size_t>(std::floor(share));
        count[i] += whole;
        assigned += whole;
        remainder.emplace_back(share - whole, i);
    }
    std::stable_sort(remainder.begin(), remainder.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::size_t j = 0; assigned < budget; ++j, ++assigned)
        ++count[remainder[j].second];

    Skeleton s;
    push(s, segs[0].start, segs[0].radius);
    for (std::size_t i = 0; i < segs.size(); ++i)
        for (std::size_t j = 1; j <= count[i]; ++j) {
            const double t = static_cast<double>(j) / count[i];
            push(s, j == count[i] ? segs[i].end : Vec3(segs[i].start + t * (segs[i].end - segs[i].start)),
                 segs[i].radius);
        }
    return s;
}

UndersampledPair gen_undersampled_pair(double length, double gap, double r, double dense_spacing,
                                       double sparse_spacing)
{
    require(positive(length) && positive(gap) && positive(r), "gen_undersampled_pair: sizes must be positive");
    require(positive(dense_spacing) && positive(sparse_spacing), "gen_undersampled_pair: spacing must be positive");
    require(gap > 2.0 * r, "gen_undersampled_pair: tubes overlap");

    auto line = [&](double x, double spacing) {
        const int n = std::max(2, static_cast<int>(std::lround(length / spacing)) + 1);
        return gen_tube(Vec3(x, 0, 0), Vec3(x, 0, length), r, n);
    };
    auto join = [](Skeleton a, const Skeleton& b) {
        a.points.insert(a.points.end(), b.points.begin(), b.points.end());
        a.radii.insert(a.radii.end(), b.radii.begin(), b.radii.end());
        return a;
    };
    const Skeleton first = line(0.0, dense_spacing);
    return {join(first, line(gap, sparse_spacing)), join(first, line(gap, dense_spacing))};
}

AnalyticShape capsule(const Vec3& a, const Vec3& b, double r)
{
    require(positive(r), "capsule: radius must be positive");
    return {ShapeKind::Capsule, a, b, r, 0.0};
}

AnalyticShape cylinder(const Vec3& a, const Vec3& b, double r)
{
    require(positive(r), "cylinder: radius must be positive");
    require((b - a).norm() > 0.0, "cylinder: axis endpoints coincide");
    return {ShapeKind::Cylinder, a, b, r, 0.0};
}

AnalyticShape sphere(const Vec3& center, double r)
{
    require(positive(r), "sphere: radius must be positive");
    return {ShapeKind::Sphere, center, center, r, 0.0};
}

AnalyticShape torus(const Vec3& center, double major_radius, double r)
{
    require(positive(r) && std::isfinite(major_radius) && major_radius > r, "torus: need major radius > r > 0");
    return {ShapeKind::Torus, center, center, r, major_radius};
}

double analytic_sdf(const AnalyticShape& shape, const Vec3& v)
{
    switch (shape.kind) {
    case ShapeKind::Sphere:
        return (v - shape.a).norm() - shape.radius;
    case ShapeKind::Capsule:
        return point_segment_distance(v, shape.a, shape.b) - shape.radius;
    case ShapeKind::Cylinder: {
        const Vec3 axis = shape.b - shape.a;
        const double len = axis.norm();
        const Vec3 u = axis / len;
        const double t = (v - shape.a).dot(u);
        const double radial = (v - shape.a - t * u).norm() - shape.radius;
        const double along = std::abs(t - 0.5 * len) - 0.5 * len;
        return std::min(std::max(radial, along), 0.0)
               + std::hypot(std::max(radial, 0.0), std::max(along, 0.0));
    }
    case ShapeKind::Torus: {
        const Vec3 d = v - shape.a;
        const double q = std::hypot(d.x(), d.y()) - shape.major_radius;
        return std::hypot(q, d.z()) - shape.radius;
    }
    }
    return 0.0;
}

} // namespace tubular::synth
