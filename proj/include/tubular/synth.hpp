#pragma once

// Synthetic skeletons and closed-form SDFs used as test oracles.

#include "tubular/skeleton.hpp"
#include "tubular/types.hpp"

#include <cstdint>

namespace tubular::synth {

/// n equally spaced points from start to end with constant radius r.
Skeleton gen_tube(const Vec3& start, const Vec3& end, double r, int n);

/// Trunk along +z ending at the origin, then two branches in the xz plane
/// separated by angle_deg, symmetric about +z. Points are ordered trunk
/// (junction last), first branch, second branch.
Skeleton gen_y_bifurcation(double trunk_len, double branch_len, double angle_deg, double r_trunk,
                           double r_branch, double spacing);

/// n points on a circle in the plane z = center.z.
Skeleton gen_ring(const Vec3& center, double radius_major, double r_tube, int n);

/// n points on a helix around the z axis starting at (radius, 0, 0).
Skeleton gen_helix(double radius, double pitch, double turns, double r_tube, int n);

/// Recursive bifurcating tree rooted at the origin and growing along +z.
/// Each level halves into two children with 0.7x length and radius; exactly
/// n_points points are spread along the segments in proportion to length.
Skeleton gen_tree(int n_points, int depth, std::uint64_t seed, double r_root);

struct UndersampledPair {
    Skeleton input;     ///< what the reconstruction sees
    Skeleton reference; ///< densely sampled version of the same shape
};

/// Two parallel tubes along z, `gap` apart. The first is sampled every
/// dense_spacing; the second, in `input`, only every sparse_spacing, so its
/// nearest neighbours are points of the first tube.
UndersampledPair gen_undersampled_pair(double length, double gap, double r, double dense_spacing,
                                       double sparse_spacing);

enum class ShapeKind { Capsule, Cylinder, Sphere, Torus };

struct AnalyticShape {
    ShapeKind kind = ShapeKind::Sphere;
    Vec3 a = Vec3::Zero(); ///< centre, or first axis endpoint
    Vec3 b = Vec3::Zero(); ///< second axis endpoint
    double radius = 1.0;   ///< tube or sphere radius
    double major_radius = 0.0;
};

AnalyticShape capsule(const Vec3& a, const Vec3& b, double r);
/// Flat-capped cylinder.
AnalyticShape cylinder(const Vec3& a, const Vec3& b, double r);
AnalyticShape sphere(const Vec3& center, double r);
/// Torus around the z axis through `center`.
AnalyticShape torus(const Vec3& center, double major_radius, double r);

double analytic_sdf(const AnalyticShape& shape, const Vec3& v);

} // namespace tubular::synth
