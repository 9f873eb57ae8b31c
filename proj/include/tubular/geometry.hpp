#pragma once

// Closed-form kernels for the signed distance to a tube interpolated between
// two circular cross-sections ("slices").

#include "tubular/types.hpp"

#include <array>
#include <utility>

namespace tubular {

/// Oriented disk: a tube cross-section.
struct Slice {
    Vec3 center;
    Vec3 normal; ///< unit length
    double radius;
};

/// Throws ValidationError unless |normal| = 1 (within 1e-9) and radius > 0.
void validate(const Slice& s);

/// Rotation taking the z axis onto the unit vector `n` (Rodrigues' formula).
/// n = -z maps to diag(1,-1,-1). Throws ValidationError if |n| deviates from 1
/// by more than 1e-6.
Mat3 rotation_from_z(const Vec3& n);

/// The two points where the slice circle meets the plane through `s.center`
/// with normal `plane_normal`. Solved in the slice's local frame, where the
/// second point is the negation of the first.
/// Throws DegeneratePlane when the plane is parallel to the slice.
std::pair<Vec3, Vec3> slice_plane_intersections(const Slice& s, const Vec3& plane_normal);

/// Unit normal of the plane through a, b and v, in the operand order
/// (a - v) x (b - v). Throws CollinearPoints if the three points are collinear.
Vec3 plane_normal_of(const Vec3& a, const Vec3& b, const Vec3& v);

/// True iff v lies in the planar quadrilateral q[0] q[1] q[2] q[3], tested as
/// the union of triangles (q0,q1,q2) and (q0,q2,q3). Boundary counts as inside;
/// zero-area triangles contain nothing.
bool point_in_quad(const Vec3& v, const std::array<Vec3, 4>& quad, const Vec3& plane_normal);

/// Of the two slice/plane intersections, the one on the same side of line
/// ab as v. Returns i1 when v lies on the line.
Vec3 pick_near_intersection(const Vec3& a, const Vec3& b, const Vec3& v,
                            const Vec3& i1, const Vec3& i2, const Vec3& plane_normal);

/// Euclidean distance from v to the closed segment [p, q].
double point_segment_distance(const Vec3& v, const Vec3& p, const Vec3& q);

/// Signed distance from v to the surface linearly interpolated between two
/// slices, measured inside the plane through both centers and v. Negative
/// when v falls inside the quadrilateral c_a c_b i_b i_a. Falls back to
/// sdf_pair_fast when that plane or either intersection is undefined.
double sdf_pair_exact(const Slice& a, const Slice& b, const Vec3& v);

/// Radial approximation: project v onto the segment (clamped), interpolate the
/// radius at the projection and return |v - c_v| - r_v.
/// Throws DegenerateEdge when the endpoints coincide.
double sdf_pair_fast(const Vec3& ca, double ra, const Vec3& cb, double rb, const Vec3& v);

inline double ball_sdf(const Vec3& c, double r, const Vec3& v) { return (v - c).norm() - r; }

} // namespace tubular
