// tubular: reconstruct tubular meshes and masks from skeletal points.

#include "tubular/io.hpp"
#include "tubular/metrics.hpp"
#include "tubular/pipeline.hpp"
#include "tubular/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

using namespace tubular;
using nlohmann::json;

namespace {

struct ConfigFlags {
    std::string config_path;
    PipelineConfig cfg;
    std::string mode = "fast";
    CLI::Option* opts[10] = {};

    void add(CLI::App& app)
    {
        opts[0] = app.add_option("--strength", cfg.strength, "clustering strength")->capture_default_str();
        opts[1] = app.add_option("--knn", cfg.knn, "nearest neighbours per point")->capture_default_str();
        opts[2] = app.add_option("--multiplier", cfg.multiplier, "neighbour distance multiplier")
                      ->capture_default_str();
        opts[3] = app.add_option("--angle", cfg.angle_deg, "edge angle threshold (degrees)")->capture_default_str();
        opts[4] = app.add_option("--voxel", cfg.voxel_size, "voxel size")->capture_default_str();
        opts[5] = app.add_option("--truncation", cfg.truncation, "truncation distance")->capture_default_str();
        opts[6] = app.add_option("--mode", mode, "exact or fast")->capture_default_str();
        opts[7] = app.add_flag("--normalize", cfg.normalize, "voxel and truncation relative to the bbox diagonal");
        opts[8] = app.add_option("--seed", cfg.seed, "clustering seed")->capture_default_str();
        opts[9] = app.add_option("--threads", cfg.threads, "worker threads (0 = all)")->capture_default_str();
        app.add_option("--config", config_path, "JSON config; flags override its values");
    }

    PipelineConfig resolve() const
    {
        PipelineConfig out;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in)
                throw StageError("config", "cannot open '" + config_path + "'");
            try {
                out = config_from_json(json::parse(in));
            } catch (const json::parse_error& e) {
                throw StageError("config", e.what());
            } catch (const ValidationError& e) {
                throw StageError("config", e.what());
            }
        }
        auto given = [&](int i) { return opts[i] && opts[i]->count() > 0; };
        if (given(0))
            out.strength = cfg.strength;
        if (given(1))
            out.knn = cfg.knn;
        if (given(2))
            out.multiplier = cfg.multiplier;
        if (given(3))
            out.angle_deg = cfg.angle_deg;
        if (given(4))
            out.voxel_size = cfg.voxel_size;
        if (given(5))
            out.truncation = cfg.truncation;
        if (given(6)) {
            try {
                out.mode = parse_mode(mode);
            } catch (const ValidationError& e) {
                throw StageError("config", e.what());
            }
        }
        if (given(7))
            out.normalize = cfg.normalize;
        if (given(8))
            out.seed = cfg.seed;
        if (given(9))
            out.threads = cfg.threads;
        try {
            validate(out);
        } catch (const ValidationError& e) {
            throw StageError("config", e.what());
        }
        return out;
    }
};

void write_json(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out)
        throw std::runtime_error("failed writing '" + path + "'");
}

void print_stages(const std::vector<StageTiming>& stages)
{
    for (const auto& s : stages)
        std::cerr << "  " << s.name << ": " << s.seconds << " s\n";
}

struct ReconstructArgs {
    std::string input, mesh, mask, report;
    bool trust_swc_edges = false;
    ConfigFlags flags;
};

int cmd_reconstruct(const ReconstructArgs& a)
{
    const PipelineConfig cfg = a.flags.resolve();
    std::vector<StageTiming> stages;
    StageClock clock(stages);

    std::optional<io::SwcData> swc;
    const Skeleton input = clock.run("read", [&] {
        if (a.trust_swc_edges) {
            swc = io::read_swc(std::filesystem::path(a.input));
            return swc->skeleton;
        }
        return io::read_skeleton(a.input);
    });

    Reconstruction r = reconstruct(input, cfg, !a.mask.empty(), swc ? &swc->edges : nullptr);
    stages.insert(stages.end(), r.stages.begin(), r.stages.end());

    MetricsReport m;
    clock.run("metrics", [&] {
        m.center_agreement = center_agreement(input, r.field, cfg.threads);
        if (!r.mesh.empty())
            m.radius_difference = radius_difference(input, r.mesh, cfg.threads);
    });

    clock.run("write", [&] {
        io::write_mesh(a.mesh, r.mesh);
        if (r.mask)
            io::write_mask(a.mask, *r.mask);
    });

    const json report = make_report(cfg, stages, counts_json(input, r), metrics_json(m, r.scale));
    if (!a.report.empty())
        clock.run("report", [&] { write_json(a.report, report); });

    print_stages(stages);
    std::cerr << "  triangles: " << r.mesh.triangles.size() << ", boundary edges: " << r.mesh_report.boundary_edges
              << ", center agreement: " << *m.center_agreement << '\n';
    return 0;
}

struct EvaluateArgs {
    std::string skeleton, mesh, mask, gt_mask, report;
    unsigned threads = 0;
};

int cmd_evaluate(const EvaluateArgs& a)
{
    std::vector<StageTiming> stages;
    StageClock clock(stages);
    if (!a.gt_mask.empty() && a.mask.empty())
        throw StageError("evaluate", "--gt-mask needs the reconstructed mask (--mask) on the same lattice");

    const Skeleton s = clock.run("read", [&] { return io::read_skeleton(a.skeleton); });
    const TriangleMesh mesh = clock.run("read", [&] { return io::read_mesh(a.mesh); });

    MetricsReport m;
    clock.run("metrics", [&] {
        m.center_agreement = center_agreement(s, mesh, a.threads);
        m.radius_difference = radius_difference(s, mesh, a.threads);
    });
    if (!a.gt_mask.empty()) {
        const MaskVolume rec = clock.run("read", [&] { return io::read_mask(a.mask); });
        const MaskVolume gt = clock.run("read", [&] { return io::read_mask(a.gt_mask); });
        m.dice = clock.run("dice", [&] { return dice(rec, gt); });
    }

    json j = metrics_json(m, 1.0);
    json st = json::array();
    for (const auto& t : stages)
        st.push_back({{"name", t.name}, {"seconds", t.seconds}});
    j["stages"] = st;
    if (!a.report.empty())
        write_json(a.report, j);
    std::cout << j.dump(2) << '\n';
    return 0;
}

struct SynthArgs {
    std::string shape, output;
    double r = 0.1, r_branch = 0.07, length = 1.0, branch = 1.0, angle = 60.0, spacing = 0.0;
    double major = 1.0, pitch = 0.5, turns = 2.0, radius = 0.5;
    int n = 0, depth = 4;
    std::uint64_t seed = 0;
};

const char* const kShapes = "tube, helix, ybif, ring, tree";

int cmd_synth(const SynthArgs& a)
{
    auto by_spacing = [&](double len) {
        const double step = a.spacing > 0.0 ? a.spacing : 0.5 * a.r;
        return std::max(2, static_cast<int>(std::lround(len / step)) + 1);
    };
    Skeleton s;
    try {
        if (a.shape == "tube") {
            s = synth::gen_tube(Vec3::Zero(), Vec3(0, 0, a.length), a.r, a.n > 0 ? a.n : by_spacing(a.length));
        } else if (a.shape == "helix") {
            const double len = a.turns * std::hypot(2.0 * std::numbers::pi * a.radius, a.pitch);
            s = synth::gen_helix(a.radius, a.pitch, a.turns, a.r, a.n > 0 ? a.n : by_spacing(len));
        } else if (a.shape == "ybif") {
            const double spacing = a.spacing > 0.0 ? a.spacing : 0.5 * std::min(a.r, a.r_branch);
            s = synth::gen_y_bifurcation(a.length, a.branch, a.angle, a.r, a.r_branch, spacing);
        } else if (a.shape == "ring") {
            s = synth::gen_ring(Vec3::Zero(), a.major, a.r, a.n > 0 ? a.n : 64);
        } else if (a.shape == "tree") {
            s = synth::gen_tree(a.n > 0 ? a.n : 2000, a.depth, a.seed, a.r);
        } else {
            throw StageError("synth", "unknown shape '" + a.shape + "'; available shapes: " + kShapes);
        }
    } catch (const ValidationError& e) {
        throw StageError("synth", e.what());
    }

    if (a.output.empty() || a.output == "-") {
        io::write_skeleton_xyzr(std::cout, s);
    } else {
        try {
            io::write_skeleton(a.output, s);
        } catch (const std::exception& e) {
            throw StageError("write", e.what());
        }
    }
    return 0;
}

int cmd_info(const std::string& path)
{
    const std::filesystem::path p(path);
    std::string ext = p.extension().string();
    for (auto& c : ext)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    json j;
    try {
        if (ext == ".obj" || ext == ".ply") {
            const TriangleMesh mesh = io::read_mesh(p);
            const MeshReport rep = inspect(mesh);
            j = {{"kind", "mesh"},
                 {"vertices", mesh.vertices.size()},
                 {"triangles", mesh.triangles.size()},
                 {"edges", rep.edges},
                 {"boundary_edges", rep.boundary_edges},
                 {"nonmanifold_edges", rep.nonmanifold_edges},
                 {"euler_characteristic", rep.euler_characteristic},
                 {"watertight", rep.watertight()}};
        } else if (ext == ".mhd") {
            const MaskVolume mask = io::read_mask(p);
            j = {{"kind", "mask"},
                 {"dims", mask.dims},
                 {"origin", {mask.origin.x(), mask.origin.y(), mask.origin.z()}},
                 {"spacing", mask.spacing},
                 {"voxels_set", mask.count()}};
        } else {
            const Skeleton s = io::read_skeleton(p);
            const Aabb box = bounding_box(s);
            const auto [rmin, rmax] = std::minmax_element(s.radii.begin(), s.radii.end());
            j = {{"kind", "skeleton"},
                 {"points", s.size()},
                 {"bbox_min", {box.lo.x(), box.lo.y(), box.lo.z()}},
                 {"bbox_max", {box.hi.x(), box.hi.y(), box.hi.z()}},
                 {"bbox_diagonal", box.diagonal()},
                 {"radius_min", *rmin},
                 {"radius_max", *rmax}};
        }
    } catch (const std::exception& e) {
        throw StageError("read", e.what());
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Reconstruct tubular meshes and masks from skeletal points with radii"};
    app.require_subcommand(1);

    ReconstructArgs rec;
    auto* reconstruct_cmd = app.add_subcommand("reconstruct", "skeleton -> mesh (+ mask, report)");
    reconstruct_cmd->add_option("input", rec.input, "skeleton file (.xyzr, .txt, .swc)")->required();
    reconstruct_cmd->add_option("-o,--output", rec.mesh, "mesh file (.obj, .ply)")->required();
    reconstruct_cmd->add_option("--mask", rec.mask, "mask file (.mhd)");
    reconstruct_cmd->add_option("--report", rec.report, "report file (.json)");
    reconstruct_cmd->add_flag("--trust-swc-edges", rec.trust_swc_edges,
                              "use SWC parent links instead of clustering and graph construction");
    rec.flags.add(*reconstruct_cmd);

    EvaluateArgs ev;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "metrics of a reconstruction against its skeleton");
    evaluate_cmd->add_option("--skeleton", ev.skeleton, "skeleton file")->required();
    evaluate_cmd->add_option("--mesh", ev.mesh, "reconstructed mesh (.obj, .ply)")->required();
    evaluate_cmd->add_option("--mask", ev.mask, "reconstructed mask (.mhd)");
    evaluate_cmd->add_option("--gt-mask", ev.gt_mask, "ground-truth mask on the same lattice (.mhd)");
    evaluate_cmd->add_option("--report", ev.report, "report file (.json)");
    evaluate_cmd->add_option("--threads", ev.threads, "worker threads (0 = all)");

    SynthArgs sy;
    auto* synth_cmd = app.add_subcommand("synth", std::string("write a synthetic skeleton (") + kShapes + ")");
    synth_cmd->add_option("shape", sy.shape, kShapes)->required();
    synth_cmd->add_option("-o,--output", sy.output, "xyzr file (default stdout)");
    synth_cmd->add_option("--r", sy.r, "tube radius (trunk radius for ybif, root radius for tree)");
    synth_cmd->add_option("--n", sy.n, "number of points");
    synth_cmd->add_option("--length", sy.length, "tube or trunk length");
    synth_cmd->add_option("--branch", sy.branch, "ybif branch length");
    synth_cmd->add_option("--r-branch", sy.r_branch, "ybif branch radius");
    synth_cmd->add_option("--angle", sy.angle, "ybif angle between branches (degrees)");
    synth_cmd->add_option("--spacing", sy.spacing, "point spacing (default half the radius)");
    synth_cmd->add_option("--major", sy.major, "ring radius");
    synth_cmd->add_option("--radius", sy.radius, "helix radius");
    synth_cmd->add_option("--pitch", sy.pitch, "helix rise per turn");
    synth_cmd->add_option("--turns", sy.turns, "helix turns");
    synth_cmd->add_option("--depth", sy.depth, "tree depth");
    synth_cmd->add_option("--seed", sy.seed, "tree seed");

    std::string info_path;
    auto* info_cmd = app.add_subcommand("info", "summarize a skeleton, mesh or mask file");
    info_cmd->add_option("file", info_path)->required();

    CLI11_PARSE(app, argc, argv);

    const char* stage = "cli";
    try {
        if (*reconstruct_cmd) {
            stage = "reconstruct";
            return cmd_reconstruct(rec);
        }
        if (*evaluate_cmd) {
            stage = "evaluate";
            return cmd_evaluate(ev);
        }
        if (*synth_cmd) {
            stage = "synth";
            return cmd_synth(sy);
        }
        if (*info_cmd) {
            stage = "info";
            return cmd_info(info_path);
        }
    } catch (const StageError& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error [" << stage << "]: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
