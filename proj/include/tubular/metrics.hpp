#pragma once

#include "tubular/field.hpp"
#include "tubular/mesher.hpp"
#include "tubular/skeleton.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tubular {

struct StageTiming {
    std::string name;
    double seconds = 0.0;
};

struct MetricsReport {
    std::optional<double> dice;
    std::optional<double> radius_difference;
    std::optional<double> center_agreement;
    std::vector<StageTiming> stages;
};

/// 2|A and B| / (|A| + |B|); 1 when both are empty. The grids must match
/// exactly (dims, origin, spacing), otherwise ValidationError.
double dice(const MaskVolume& a, const MaskVolume& b);

/// Exact unsigned distance from points to a triangle set, accelerated with a
/// bounding-volume hierarchy.
class TriangleDistance {
public:
    explicit TriangleDistance(const TriangleMesh& mesh);
    ~TriangleDistance();
    TriangleDistance(TriangleDistance&&) noexcept;
    TriangleDistance& operator=(TriangleDistance&&) noexcept;

    double operator()(const Vec3& p) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Distance from point p to triangle (a, b, c).
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Mean over skeletal points of |distance to the mesh - radius|.
/// An empty mesh raises ValidationError.
double radius_difference(const Skeleton& s, const TriangleMesh& mesh, unsigned threads = 0);

/// Trilinear interpolation of the stored field at p. Interior cubes read as
/// -truncation and absent samples as +truncation.
double interpolate(const SparseTsdfField& field, const Vec3& p);

/// Fraction of skeletal points where the interpolated field is negative.
double center_agreement(const Skeleton& s, const SparseTsdfField& field, unsigned threads = 0);

/// Generalized winding number of a closed, outward oriented mesh at p
/// (1 inside, 0 outside).
double winding_number(const TriangleMesh& mesh, const Vec3& p);

/// Fraction of skeletal points with winding number above one half; used when
/// only a mesh is available.
double center_agreement(const Skeleton& s, const TriangleMesh& mesh, unsigned threads = 0);

} // namespace tubular
