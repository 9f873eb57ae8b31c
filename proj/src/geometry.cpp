#include "tubular/geometry.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <optional>

namespace tubular {

namespace {

Mat3 skew(const Vec3& k)
{
    Mat3 m;
    m << 0.0, -k.z(), k.y(),
         k.z(), 0.0, -k.x(),
        -k.y(), k.x(), 0.0;
    return m;
}

std::optional<Vec3> try_plane_normal(const Vec3& a, const Vec3& b, const Vec3& v)
{
    const Vec3 pa = a - v;
    const Vec3 pb = b - v;
    const Vec3 n = pa.cross(pb);
    const double len = n.norm();
    // Sine of the angle at v; scale-free.
    if (!(len > 1e-12 * pa.norm() * pb.norm()))
        return std::nullopt;
    return Vec3(n / len);
}

std::optional<std::pair<Vec3, Vec3>> try_intersections(const Slice& s, const Vec3& plane_normal)
{
    const Mat3 rot = rotation_from_z(s.normal);
    // Plane normal in the slice frame; the slice lies in the local z = 0 plane.
    const Vec3 nl = rot.transpose() * plane_normal;
    const double len = std::hypot(nl.x(), nl.y());
    if (!(len > 1e-12))
        return std::nullopt;
    const Vec3 local(-nl.y() * s.radius / len, nl.x() * s.radius / len, 0.0);
    const Vec3 world = rot * local;
    return std::make_pair(Vec3(s.center + world), Vec3(s.center - world));
}

bool in_triangle(const Vec3& v, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& n)
{
    const double area = (b - a).cross(c - a).dot(n);
    if (!(std::abs(area) > 1e-14 * (b - a).norm() * (c - a).norm()))
        return false;
    const double wa = (b - v).cross(c - v).dot(n) / area;
    const double wb = (c - v).cross(a - v).dot(n) / area;
    const double wc = 1.0 - wa - wb;
    constexpr double tol = -1e-12;
    return wa >= tol && wb >= tol && wc >= tol;
}

} // namespace

void validate(const Slice& s)
{
    if (!s.center.allFinite() || !s.normal.allFinite())
        throw ValidationError("slice: non-finite center or normal");
    if (std::abs(s.normal.norm() - 1.0) > 1e-9)
        throw ValidationError("slice: normal is not unit length");
    if (!(s.radius > 0.0))
        throw ValidationError("slice: radius must be positive");
}

Mat3 rotation_from_z(const Vec3& n)
{
    const double len = n.norm();
    if (!std::isfinite(len) || std::abs(len - 1.0) > 1e-6)
        throw ValidationError("rotation_from_z: input is not a unit vector");
    const Vec3 m = n / len;

    // z x m = (-m_y, m_x, 0); |z x m| = sin(theta), z . m = cos(theta).
    const Vec3 axis(-m.y(), m.x(), 0.0);
    const double sin2 = axis.squaredNorm();
    const double cos_t = m.z();
    if (sin2 < 1e-300) {
        if (cos_t > 0.0)
            return Mat3::Identity();
        return Vec3(1.0, -1.0, -1.0).asDiagonal();
    }
    const double sin_t = std::sqrt(sin2);
    // 1 - cos computed without cancellation near theta = 0.
    const double one_minus_cos = cos_t > 0.0 ? sin2 / (1.0 + cos_t) : 1.0 - cos_t;
    const Mat3 k = skew(axis / sin_t);
    return Mat3::Identity() + sin_t * k + one_minus_cos * (k * k);
}

std::pair<Vec3, Vec3> slice_plane_intersections(const Slice& s, const Vec3& plane_normal)
{
    auto hits = try_intersections(s, plane_normal);
    if (!hits)
        throw DegeneratePlane("slice_plane_intersections: plane is parallel to the slice");
    return *hits;
}

Vec3 plane_normal_of(const Vec3& a, const Vec3& b, const Vec3& v)
{
    auto n = try_plane_normal(a, b, v);
    if (!n)
        throw CollinearPoints("plane_normal_of: points are collinear");
    return *n;
}

bool point_in_quad(const Vec3& v, const std::array<Vec3, 4>& quad, const Vec3& plane_normal)
{
    return in_triangle(v, quad[0], quad[1], quad[2], plane_normal)
        || in_triangle(v, quad[0], quad[2], quad[3], plane_normal);
}

Vec3 pick_near_intersection(const Vec3& a, const Vec3& b, const Vec3& v,
                            const Vec3& i1, const Vec3& i2, const Vec3& plane_normal)
{
    const Vec3 axis = b - a;
    auto side = [&](const Vec3& x) { return axis.cross(x - a).dot(plane_normal); };
    const double sv = side(v);
    if (sv == 0.0)
        return i1;
    const double dir = sv > 0.0 ? 1.0 : -1.0;
    return dir * side(i1) >= dir * side(i2) ? i1 : i2;
}

double point_segment_distance(const Vec3& v, const Vec3& p, const Vec3& q)
{
    const Vec3 d = q - p;
    const double len2 = d.squaredNorm();
    double t = 0.0;
    if (len2 > 0.0)
        t = std::clamp((v - p).dot(d) / len2, 0.0, 1.0);
    return (v - (p + t * d)).norm();
}

double sdf_pair_exact(const Slice& a, const Slice& b, const Vec3& v)
{
    const auto np = try_plane_normal(a.center, b.center, v);
    if (!np)
        return sdf_pair_fast(a.center, a.radius, b.center, b.radius, v);
    const auto hits_a = try_intersections(a, *np);
    const auto hits_b = try_intersections(b, *np);
    if (!hits_a || !hits_b)
        return sdf_pair_fast(a.center, a.radius, b.center, b.radius, v);

    const Vec3 ia = pick_near_intersection(a.center, b.center, v, hits_a->first, hits_a->second, *np);
    const Vec3 ib = pick_near_intersection(a.center, b.center, v, hits_b->first, hits_b->second, *np);
    const double d = point_segment_distance(v, ia, ib);
    return point_in_quad(v, {a.center, b.center, ib, ia}, *np) ? -d : d;
}

double sdf_pair_fast(const Vec3& ca, double ra, const Vec3& cb, double rb, const Vec3& v)
{
    const Vec3 d = cb - ca;
    const double len2 = d.squaredNorm();
    if (!(len2 > 0.0))
        throw DegenerateEdge("sdf_pair_fast: coincident endpoints");
    const double t = std::clamp((v - ca).dot(d) / len2, 0.0, 1.0);
    const Vec3 cv = ca + t * d;
    // r_v = (r_b |c_v - c_a| + r_a |c_b - c_v|) / |c_b - c_a|
    const double rv = rb * t + ra * (1.0 - t);
    return (v - cv).norm() - rv;
}

} // namespace tubular
