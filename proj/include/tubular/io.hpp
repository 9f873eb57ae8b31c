#pragma once

// Skeleton, mesh and mask file formats.
//
//   xyzr  one "x y z r" line per point, '#' comments
//   swc   "id type x y z radius parent" (neuron morphology)
//   obj   "v x y z" and 1-based "f i j k" lines
//   ply   binary little endian, float32 vertices, uchar/int32 face lists
//   mhd   MetaImage header plus a raw MET_UCHAR payload, x fastest

#include "tubular/mesher.hpp"
#include "tubular/skeleton.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace tubular::io {

Skeleton read_skeleton_xyzr(std::istream& in);
/// Numbers are written with 9 significant digits.
void write_skeleton_xyzr(std::ostream& out, const Skeleton& s);

struct SwcData {
    Skeleton skeleton;
    /// Parent links as (child index, parent index), in file order.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
};

SwcData read_swc(std::istream& in);
Skeleton read_skeleton_swc(std::istream& in);

void write_obj(std::ostream& out, const TriangleMesh& mesh);
void write_ply(std::ostream& out, const TriangleMesh& mesh);
TriangleMesh read_obj(std::istream& in);
TriangleMesh read_ply(std::istream& in);

/// `raw_name` is what the header's ElementDataFile names.
void write_mhd_header(std::ostream& out, const MaskVolume& mask, const std::string& raw_name);
void write_raw(std::ostream& out, const MaskVolume& mask);

// File-level helpers. Formats are chosen by extension; unsupported
// extensions and unreadable files raise std::runtime_error.

Skeleton read_skeleton(const std::filesystem::path& path);
void write_skeleton(const std::filesystem::path& path, const Skeleton& s);
SwcData read_swc(const std::filesystem::path& path);

TriangleMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const TriangleMesh& mesh);

/// Writes `path` (.mhd) and its payload next to it with extension .raw.
void write_mask(const std::filesystem::path& path, const MaskVolume& mask);
MaskVolume read_mask(const std::filesystem::path& path);

} // namespace tubular::io
