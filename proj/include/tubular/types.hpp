#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace tubular {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Raised when an argument violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by geometric kernels when the configuration has no unique answer
/// (collinear points, a plane parallel to a slice, a zero-length edge).
class DegenerateGeometry : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class CollinearPoints : public DegenerateGeometry {
public:
    using DegenerateGeometry::DegenerateGeometry;
};

class DegeneratePlane : public DegenerateGeometry {
public:
    using DegenerateGeometry::DegenerateGeometry;
};

class DegenerateEdge : public DegenerateGeometry {
public:
    using DegenerateGeometry::DegenerateGeometry;
};

/// Malformed input text. Carries the 1-based line number of the offending line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace tubular
