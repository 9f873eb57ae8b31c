#include "tubular/pipeline.hpp"

#include "tubular/parallel.hpp"
#include "tubular/spatial_index.hpp"

#include <algorithm>
#include <cmath>

namespace tubular {

void validate(const PipelineConfig& cfg)
{
    auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
    if (!positive(cfg.strength))
        throw ValidationError("config: strength must be positive");
    if (cfg.knn < 2)
        throw ValidationError("config: knn must be at least 2");
    if (!(std::isfinite(cfg.multiplier) && cfg.multiplier >= 1.0))
        throw ValidationError("config: multiplier must be >= 1");
    if (!(cfg.angle_deg > 0.0 && cfg.angle_deg < 180.0))
        throw ValidationError("config: angle must lie in (0, 180) degrees");
    if (!positive(cfg.voxel_size))
        throw ValidationError("config: voxel size must be positive");
    if (!positive(cfg.truncation))
        throw ValidationError("config: truncation must be positive");
}

const char* to_string(SdfMode mode) { return mode == SdfMode::Exact ? "exact" : "fast"; }

SdfMode parse_mode(const std::string& name)
{
    if (name == "exact")
        return SdfMode::Exact;
    if (name == "fast")
        return SdfMode::Fast;
    throw ValidationError("mode must be 'exact' or 'fast', got '" + name + "'");
}

nlohmann::json to_json(const PipelineConfig& cfg)
{
    return {
        {"strength", cfg.strength},     {"knn", cfg.knn},
        {"multiplier", cfg.multiplier}, {"angle", cfg.angle_deg},
        {"voxel", cfg.voxel_size},      {"truncation", cfg.truncation},
        {"mode", to_string(cfg.mode)},  {"normalize", cfg.normalize},
        {"seed", cfg.seed},             {"threads", cfg.threads},
    };
}

PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig cfg)
{
    if (!j.is_object())
        throw ValidationError("config: expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "strength")
                cfg.strength = value.get<double>();
            else if (key == "knn")
                cfg.knn = value.get<int>();
            else if (key == "multiplier")
                cfg.multiplier = value.get<double>();
            else if (key == "angle")
                cfg.angle_deg = value.get<double>();
            else if (key == "voxel")
                cfg.voxel_size = value.get<double>();
            else if (key == "truncation")
                cfg.truncation = value.get<double>();
            else if (key == "mode")
                cfg.mode = parse_mode(value.get<std::string>());
            else if (key == "normalize")
                cfg.normalize = value.get<bool>();
            else if (key == "seed")
                cfg.seed = value.get<std::uint64_t>();
            else if (key == "threads")
                cfg.threads = value.get<unsigned>();
            else
                throw ValidationError("config: unknown key '" + key + "'");
        } catch (const nlohmann::json::exception&) {
            throw ValidationError("config: wrong type for '" + key + "'");
        }
    }
    return cfg;
}

void StageClock::record(const std::string& name, std::chrono::steady_clock::time_point start)
{
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    sink_.push_back({name, std::round(dt.count() * 1000.0) / 1000.0});
}

Reconstruction reconstruct(const Skeleton& input, const PipelineConfig& cfg, bool with_mask,
                           const std::vector<std::pair<std::size_t, std::size_t>>* edges)
{
    Reconstruction r;
    StageClock clock(r.stages);
    try {
        validate(cfg);
        validate(input);
    } catch (const ValidationError& e) {
        throw StageError("validate", e.what());
    }

    if (cfg.normalize) {
        const double diag = bounding_box(input).diagonal();
        const double max_r = *std::max_element(input.radii.begin(), input.radii.end());
        r.scale = diag > 0.0 ? diag : 2.0 * max_r;
    }
    const auto k = static_cast<std::size_t>(cfg.knn);

    r.skeleton = clock.run("cluster", [&] {
        return edges ? input : radius_cluster(input, cfg.strength, cfg.seed);
    });
    const SpatialIndex index(r.skeleton.points);
    r.graph = clock.run("graph", [&] {
        if (edges) {
            SkeletonGraph g(input.size());
            for (const auto& [a, b] : *edges)
                g.add_edge(a, b);
            return g;
        }
        if (r.skeleton.size() < 2)
            return SkeletonGraph(r.skeleton.size());
        return build_graph(r.skeleton, index, k, cfg.multiplier, cfg.angle_deg);
    });
    r.field = clock.run("populate", [&] {
        r.grid = make_grid_spec(r.skeleton, cfg.voxel_size * r.scale, cfg.truncation * r.scale);
        return populate(r.skeleton, r.graph, index, r.grid, k, cfg.mode, cfg.threads, &r.populate);
    });
    r.mesh = clock.run("mesh", [&] { return marching_cubes(r.field, cfg.threads); });
    r.mesh_report = inspect(r.mesh);
    if (with_mask)
        r.mask = clock.run("mask", [&] { return extract_mask(r.field); });
    return r;
}

nlohmann::json counts_json(const Skeleton& input, const Reconstruction& r)
{
    return {
        {"points_input", input.size()},
        {"points_clustered", r.skeleton.size()},
        {"edges", r.graph.edge_count()},
        {"cubes_candidate", r.populate.candidates},
        {"cubes_evaluated", r.populate.evaluated},
        {"cubes_stored", r.populate.surface},
        {"cubes_inside", r.populate.inside},
        {"vertices", r.mesh.vertices.size()},
        {"triangles", r.mesh.triangles.size()},
        {"boundary_edges", r.mesh_report.boundary_edges},
        {"nonmanifold_edges", r.mesh_report.nonmanifold_edges},
        {"euler_characteristic", r.mesh_report.euler_characteristic},
    };
}

nlohmann::json metrics_json(const MetricsReport& m, double scale)
{
    nlohmann::json j = nlohmann::json::object();
    if (m.dice)
        j["dice"] = *m.dice;
    if (m.radius_difference) {
        j["radius_difference"] = *m.radius_difference;
        j["radius_difference_normalized"] = *m.radius_difference / scale;
    }
    if (m.center_agreement)
        j["center_agreement"] = *m.center_agreement;
    j["units"] = {{"radius_difference", "input coordinates"},
                  {"radius_difference_normalized", "input coordinates / normalization scale"},
                  {"normalization_scale", scale}};
    return j;
}

nlohmann::json make_report(const PipelineConfig& cfg, const std::vector<StageTiming>& stages,
                           const nlohmann::json& counts, const nlohmann::json& metrics)
{
    nlohmann::json st = nlohmann::json::array();
    for (const auto& s : stages)
        st.push_back({{"name", s.name}, {"seconds", s.seconds}});
    nlohmann::json config = to_json(cfg);
    config["threads"] = resolve_threads(cfg.threads);
    return {{"config", config}, {"stages", st}, {"counts", counts}, {"metrics", metrics}};
}

} // namespace tubular
