#pragma once

// End-to-end reconstruction: cluster -> graph -> populate -> marching cubes
// (-> mask), with per-stage timings.

#include "tubular/field.hpp"
#include "tubular/mesher.hpp"
#include "tubular/metrics.hpp"
#include "tubular/skeleton.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tubular {

struct PipelineConfig {
    double strength = 0.75;
    int knn = 5;
    double multiplier = 2.5;
    double angle_deg = 75.0;
    double voxel_size = 0.025;
    double truncation = 0.1;
    SdfMode mode = SdfMode::Fast;
    /// Interpret voxel_size and truncation as fractions of the skeleton's
    /// bounding-box diagonal.
    bool normalize = false;
    std::uint64_t seed = 0;
    unsigned threads = 0; ///< 0 = all hardware threads
};

void validate(const PipelineConfig& cfg);

nlohmann::json to_json(const PipelineConfig& cfg);

/// Overlays the keys present in `j` onto `base`. Unknown keys and wrong value
/// types raise ValidationError.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});

const char* to_string(SdfMode mode);
SdfMode parse_mode(const std::string& name);

/// An error tagged with the pipeline stage that raised it.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Appends named stage timings with millisecond resolution.
class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

    /// Runs fn, records its wall time under `name` and rethrows failures as
    /// StageError(name, ...).
    template <class Fn>
    decltype(auto) run(const std::string& name, Fn&& fn)
    {
        const auto start = std::chrono::steady_clock::now();
        struct Record {
            StageClock& clock;
            const std::string& name;
            std::chrono::steady_clock::time_point start;
            ~Record() { clock.record(name, start); }
        } record{*this, name, start};
        try {
            return fn();
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(name, e.what());
        }
    }

private:
    void record(const std::string& name, std::chrono::steady_clock::time_point start);

    std::vector<StageTiming>& sink_;
};

struct Reconstruction {
    Skeleton skeleton; ///< after clustering
    SkeletonGraph graph;
    GridSpec grid;
    PopulateStats populate;
    SparseTsdfField field;
    TriangleMesh mesh;
    MeshReport mesh_report;
    std::optional<MaskVolume> mask;
    std::vector<StageTiming> stages;
    /// Length that voxel_size and truncation were multiplied by (1 unless normalized).
    double scale = 1.0;
};

/// Runs the pipeline on `input`. If `edges` is given, clustering and graph
/// construction are skipped and those (index) pairs form the graph.
Reconstruction reconstruct(const Skeleton& input, const PipelineConfig& cfg, bool with_mask,
                           const std::vector<std::pair<std::size_t, std::size_t>>* edges = nullptr);

/// Counts block of the report: points before/after clustering, graph edges,
/// cube statistics and mesh topology.
nlohmann::json counts_json(const Skeleton& input, const Reconstruction& r);

nlohmann::json metrics_json(const MetricsReport& m, double scale);

/// { config, stages: [{name, seconds}], counts, metrics }
nlohmann::json make_report(const PipelineConfig& cfg, const std::vector<StageTiming>& stages,
                           const nlohmann::json& counts, const nlohmann::json& metrics);

} // namespace tubular
