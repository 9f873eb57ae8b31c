#include "tubular/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace tubular::io {

namespace {

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool blank_or_comment(std::string_view line)
{
    for (char c : line) {
        if (c == '#')
            return true;
        if (!std::isspace(static_cast<unsigned char>(c)))
            return false;
    }
    return true;
}

double parse_double(std::string_view tok, std::size_t line)
{
    if (!tok.empty() && tok.front() == '+')
        tok.remove_prefix(1);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || end != tok.data() + tok.size() || !std::isfinite(v))
        throw ParseError(line, "not a finite number: '" + std::string(tok) + "'");
    return v;
}

long long parse_int(std::string_view tok, std::size_t line)
{
    long long v = 0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || end != tok.data() + tok.size())
        throw ParseError(line, "not an integer: '" + std::string(tok) + "'");
    return v;
}

std::string fmt9(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

template <class T>
void put_le(std::ostream& out, T value)
{
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(std::istream& in)
{
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), bytes.size()))
        throw std::runtime_error("ply: truncated binary payload");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
}

std::string lower_ext(const std::filesystem::path& p)
{
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e;
}

std::ifstream open_in(const std::filesystem::path& p, bool binary = false)
{
    std::ifstream in(p, binary ? std::ios::binary : std::ios::in);
    if (!in)
        throw std::runtime_error("cannot open '" + p.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& p, bool binary = false)
{
    std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
    if (!out)
        throw std::runtime_error("cannot open '" + p.string() + "' for writing");
    return out;
}

void finish(std::ostream& out, const std::filesystem::path& p)
{
    out.flush();
    if (!out)
        throw std::runtime_error("failed writing '" + p.string() + "'");
}

} // namespace

Skeleton read_skeleton_xyzr(std::istream& in)
{
    Skeleton s;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (blank_or_comment(line))
            continue;
        const auto tok = split(line);
        if (tok.size() != 4)
            throw ParseError(n, "expected 4 numbers (x y z r), found " + std::to_string(tok.size()));
        const Vec3 p(parse_double(tok[0], n), parse_double(tok[1], n), parse_double(tok[2], n));
        const double r = parse_double(tok[3], n);
        if (!(r > 0.0))
            throw ParseError(n, "radius must be positive");
        s.points.push_back(p);
        s.radii.push_back(r);
    }
    if (s.empty())
        throw ParseError(n, "no skeletal points");
    return s;
}

void write_skeleton_xyzr(std::ostream& out, const Skeleton& s)
{
    for (std::size_t i = 0; i < s.size(); ++i)
        out << fmt9(s.points[i].x()) << ' ' << fmt9(s.points[i].y()) << ' ' << fmt9(s.points[i].z()) << ' '
            << fmt9(s.radii[i]) << '\n';
}

SwcData read_swc(std::istream& in)
{
    SwcData data;
    std::map<long long, std::size_t> index_of;
    struct Link {
        std::size_t child;
        long long parent;
        std::size_t line;
    };
    std::vector<Link> links;

    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (blank_or_comment(line))
            continue;
        const auto tok = split(line);
        if (tok.size() != 7)
            throw ParseError(n, "expected 7 columns (id type x y z radius parent), found "
                                    + std::to_string(tok.size()));
        const long long id = parse_int(tok[0], n);
        parse_int(tok[1], n);
        const Vec3 p(parse_double(tok[2], n), parse_double(tok[3], n), parse_double(tok[4], n));
        const double r = parse_double(tok[5], n);
        const long long parent = parse_int(tok[6], n);
        if (!(r > 0.0))
            throw ParseError(n, "radius must be positive");
        if (!index_of.emplace(id, data.skeleton.size()).second)
            throw ParseError(n, "duplicate id " + std::to_string(id));
        if (parent >= 0)
            links.push_back({data.skeleton.size(), parent, n});
        data.skeleton.points.push_back(p);
        data.skeleton.radii.push_back(r);
    }
    if (data.skeleton.empty())
        throw ParseError(n, "no skeletal points");
    for (const Link& l : links) {
        const auto it = index_of.find(l.parent);
        if (it == index_of.end())
            throw ParseError(l.line, "unknown parent id " + std::to_string(l.parent));
        data.edges.emplace_back(l.child, it->second);
    }
    return data;
}

Skeleton read_skeleton_swc(std::istream& in) { return read_swc(in).skeleton; }

void write_obj(std::ostream& out, const TriangleMesh& mesh)
{
    for (const Vec3& v : mesh.vertices)
        out << "v " << fmt9(v.x()) << ' ' << fmt9(v.y()) << ' ' << fmt9(v.z()) << '\n';
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_ply(std::ostream& out, const TriangleMesh& mesh)
{
    out << "ply\n"
        << "format binary_little_endian 1.0\n"
        << "element vertex " << mesh.vertices.size() << '\n'
        << "property float x\nproperty float y\nproperty float z\n"
        << "element face " << mesh.triangles.size() << '\n'
        << "property list uchar int vertex_indices\n"
        << "end_header\n";
    for (const Vec3& v : mesh.vertices)
        for (int c = 0; c < 3; ++c)
            put_le(out, static_cast<float>(v[c]));
    for (const auto& t : mesh.triangles) {
        put_le(out, std::uint8_t{3});
        for (int c = 0; c < 3; ++c)
            put_le(out, static_cast<std::int32_t>(t[c]));
    }
}

TriangleMesh read_obj(std::istream& in)
{
    TriangleMesh mesh;
    std::string line;
    std::size_t n = 0;
    auto vertex_ref = [&](std::string_view tok) -> std::uint32_t {
        const long long raw = parse_int(tok.substr(0, tok.find('/')), n);
        const long long count = static_cast<long long>(mesh.vertices.size());
        const long long idx = raw > 0 ? raw - 1 : count + raw;
        if (raw == 0 || idx < 0 || idx >= count)
            throw ParseError(n, "face index out of range");
        return static_cast<std::uint32_t>(idx);
    };
    while (std::getline(in, line)) {
        ++n;
        if (blank_or_comment(line))
            continue;
        const auto tok = split(line);
        if (tok[0] == "v") {
            if (tok.size() < 4)
                throw ParseError(n, "vertex needs 3 coordinates");
            mesh.vertices.emplace_back(parse_double(tok[1], n), parse_double(tok[2], n), parse_double(tok[3], n));
        } else if (tok[0] == "f") {
            if (tok.size() < 4)
                throw ParseError(n, "face needs at least 3 vertices");
            const std::uint32_t first = vertex_ref(tok[1]);
            for (std::size_t i = 2; i + 1 < tok.size(); ++i)
                mesh.triangles.push_back({first, vertex_ref(tok[i]), vertex_ref(tok[i + 1])});
        }
    }
    return mesh;
}

TriangleMesh read_ply(std::istream& in)
{
    std::string line;
    std::getline(in, line);
    if (line != "ply")
        throw std::runtime_error("ply: missing magic");

    std::size_t n_vertices = 0, n_faces = 0;
    std::vector<std::string> vertex_types;
    std::string count_type, index_type;
    std::string current;
    bool little = false;
    while (std::getline(in, line)) {
        const auto tok = split(line);
        if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info")
            continue;
        if (tok[0] == "end_header")
            break;
        if (tok[0] == "format") {
            little = tok.size() >= 2 && tok[1] == "binary_little_endian";
        } else if (tok[0] == "element" && tok.size() == 3) {
            current = tok[1];
            const auto count = static_cast<std::size_t>(std::stoull(std::string(tok[2])));
            if (current == "vertex")
                n_vertices = count;
            else if (current == "face")
                n_faces = count;
            else if (count != 0)
                throw std::runtime_error("ply: unsupported element '" + current + "'");
        } else if (tok[0] == "property") {
            if (current == "vertex" && tok.size() == 3)
                vertex_types.emplace_back(tok[1]);
            else if (current == "face" && tok.size() == 5 && tok[1] == "list") {
                count_type = tok[2];
                index_type = tok[3];
            } else
                throw std::runtime_error("ply: unsupported property line '" + line + "'");
        }
    }
    if (!little)
        throw std::runtime_error("ply: only binary_little_endian is supported");
    if (vertex_types.size() < 3)
        throw std::runtime_error("ply: vertex needs x, y, z");

    auto read_scalar = [&](const std::string& type) -> double {
        if (type == "float" || type == "float32")
            return get_le<float>(in);
        if (type == "double" || type == "float64")
            return get_le<double>(in);
        if (type == "uchar" || type == "uint8")
            return get_le<std::uint8_t>(in);
        if (type == "int" || type == "int32")
            return get_le<std::int32_t>(in);
        if (type == "uint" || type == "uint32")
            return get_le<std::uint32_t>(in);
        throw std::runtime_error("ply: unsupported type '" + type + "'");
    };

    TriangleMesh mesh;
    mesh.vertices.reserve(n_vertices);
    for (std::size_t i = 0; i < n_vertices; ++i) {
        Vec3 v;
        for (std::size_t p = 0; p < vertex_types.size(); ++p) {
            const double x = read_scalar(vertex_types[p]);
            if (p < 3)
                v[static_cast<int>(p)] = x;
        }
        mesh.vertices.push_back(v);
    }
    for (std::size_t i = 0; i < n_faces; ++i) {
        const auto count = static_cast<std::size_t>(read_scalar(count_type));
        std::vector<std::uint32_t> idx(count);
        for (auto& x : idx) {
            const double raw = read_scalar(index_type);
            if (raw < 0 || raw >= static_cast<double>(n_vertices))
                throw std::runtime_error("ply: face index out of range");
            x = static_cast<std::uint32_t>(raw);
        }
        for (std::size_t j = 1; j + 1 < count; ++j)
            mesh.triangles.push_back({idx[0], idx[j], idx[j + 1]});
    }
    return mesh;
}

void write_mhd_header(std::ostream& out, const MaskVolume& mask, const std::string& raw_name)
{
    const Vec3& o = mask.origin;
    const std::string l = fmt9(mask.spacing);
    out << "ObjectType = Image\n"
        << "NDims = 3\n"
        << "BinaryData = True\n"
        << "BinaryDataByteOrderMSB = False\n"
        << "CompressedData = False\n"
        << "TransformMatrix = 1 0 0 0 1 0 0 0 1\n"
        << "Offset = " << fmt9(o.x()) << ' ' << fmt9(o.y()) << ' ' << fmt9(o.z()) << '\n'
        << "CenterOfRotation = 0 0 0\n"
        << "ElementSpacing = " << l << ' ' << l << ' ' << l << '\n'
        << "DimSize = " << mask.dims[0] << ' ' << mask.dims[1] << ' ' << mask.dims[2] << '\n'
        << "ElementType = MET_UCHAR\n"
        << "ElementDataFile = " << raw_name << '\n';
}

void write_raw(std::ostream& out, const MaskVolume& mask)
{
    out.write(reinterpret_cast<const char*>(mask.bits.data()), static_cast<std::streamsize>(mask.bits.size()));
}

Skeleton read_skeleton(const std::filesystem::path& path)
{
    const std::string ext = lower_ext(path);
    if (ext == ".swc")
        return read_swc(path).skeleton;
    if (ext == ".xyzr" || ext == ".txt") {
        auto in = open_in(path);
        return read_skeleton_xyzr(in);
    }
    throw std::runtime_error("unsupported skeleton extension '" + ext + "' (expected .xyzr, .txt or .swc)");
}

void write_skeleton(const std::filesystem::path& path, const Skeleton& s)
{
    auto out = open_out(path);
    write_skeleton_xyzr(out, s);
    finish(out, path);
}

SwcData read_swc(const std::filesystem::path& path)
{
    auto in = open_in(path);
    return read_swc(in);
}

TriangleMesh read_mesh(const std::filesystem::path& path)
{
    const std::string ext = lower_ext(path);
    if (ext == ".obj") {
        auto in = open_in(path);
        return read_obj(in);
    }
    if (ext == ".ply") {
        auto in = open_in(path, true);
        return read_ply(in);
    }
    throw std::runtime_error("unsupported mesh extension '" + ext + "' (expected .obj or .ply)");
}

void write_mesh(const std::filesystem::path& path, const TriangleMesh& mesh)
{
    const std::string ext = lower_ext(path);
    if (ext == ".obj") {
        auto out = open_out(path);
        write_obj(out, mesh);
        finish(out, path);
    } else if (ext == ".ply") {
        auto out = open_out(path, true);
        write_ply(out, mesh);
        finish(out, path);
    } else {
        throw std::runtime_error("unsupported mesh extension '" + ext + "' (expected .obj or .ply)");
    }
}

void write_mask(const std::filesystem::path& path, const MaskVolume& mask)
{
    if (lower_ext(path) != ".mhd")
        throw std::runtime_error("mask path must end in .mhd");
    std::filesystem::path raw = path;
    raw.replace_extension(".raw");
    {
        auto out = open_out(path);
        write_mhd_header(out, mask, raw.filename().string());
        finish(out, path);
    }
    auto out = open_out(raw, true);
    write_raw(out, mask);
    finish(out, raw);
}

MaskVolume read_mask(const std::filesystem::path& path)
{
    auto in = open_in(path);
    std::map<std::string, std::string> fields;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (blank_or_comment(line))
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(n, "expected 'Key = Value'");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        fields[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    auto need = [&](const std::string& key) -> const std::string& {
        const auto it = fields.find(key);
        if (it == fields.end())
            throw std::runtime_error("mhd: missing " + key);
        return it->second;
    };
    auto numbers = [&](const std::string& key) {
        std::vector<double> v;
        for (auto tok : split(need(key)))
            v.push_back(parse_double(tok, 0));
        return v;
    };

    if (need("NDims") != "3")
        throw std::runtime_error("mhd: only 3D images are supported");
    if (need("ElementType") != "MET_UCHAR")
        throw std::runtime_error("mhd: only MET_UCHAR is supported");
    if (fields.count("CompressedData") && fields["CompressedData"] != "False")
        throw std::runtime_error("mhd: compressed payloads are not supported");

    MaskVolume mask;
    const auto dims = numbers("DimSize");
    const auto spacing = numbers("ElementSpacing");
    const auto offset = fields.count("Offset") ? numbers("Offset") : std::vector<double>{0, 0, 0};
    if (dims.size() != 3 || spacing.size() != 3 || offset.size() != 3)
        throw std::runtime_error("mhd: DimSize, ElementSpacing and Offset need 3 values");
    if (spacing[0] != spacing[1] || spacing[1] != spacing[2])
        throw std::runtime_error("mhd: anisotropic spacing is not supported");
    for (int c = 0; c < 3; ++c) {
        if (dims[c] < 0 || dims[c] != std::floor(dims[c]))
            throw std::runtime_error("mhd: invalid DimSize");
        mask.dims[c] = static_cast<int>(dims[c]);
    }
    mask.spacing = spacing[0];
    mask.origin = Vec3(offset[0], offset[1], offset[2]);

    std::filesystem::path raw = need("ElementDataFile");
    if (raw.is_relative())
        raw = path.parent_path() / raw;
    auto rin = open_in(raw, true);
    mask.bits.resize(mask.voxel_count());
    if (!rin.read(reinterpret_cast<char*>(mask.bits.data()), static_cast<std::streamsize>(mask.bits.size())))
        throw std::runtime_error("mhd: raw payload shorter than DimSize");
    for (auto& b : mask.bits)
        b = b != 0 ? 1 : 0;
    return mask;
}

} // namespace tubular::io
