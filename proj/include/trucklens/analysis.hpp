#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trucklens/config.hpp"
#include "trucklens/events.hpp"
#include "trucklens/ingest.hpp"
#include "trucklens/kinematics.hpp"

namespace trucklens::analysis {

struct Analysis {
  AnalysisConfig config;
  std::vector<kinematics::KinematicFrame> frames;
  events::EventStack stack;
};

/// Chain plus event detection for one source.
Analysis analyze(std::span<const ingest::PositionSample> samples, const AnalysisConfig& config);
/// Event detection on frames that already went through the chain.
Analysis from_frames(std::vector<kinematics::KinematicFrame> frames, const AnalysisConfig& config);

using Params = std::map<std::string, std::string, std::less<>>;

enum class Resource { frames, events, kpi, heatmap, trajectory };

Resource parse_resource(std::string_view name);

/// Query window from `from`/`to` (seconds after the first frame, half-open),
/// clamped to the recording. Missing bounds default to the full recording.
kpi::Window query_window(const Analysis& analysis, const Params& params);

/// Serialized view of one resource. Recognized parameters:
///   frames:     from, to, stride
///   events:     types (comma separated)
///   kpi:        from, to
///   heatmap:    metric, sector, from, to
///   trajectory: from, to
/// Unknown parameters are rejected.
std::string render(const Analysis& analysis, Resource resource, const Params& params = {});

struct Artifact {
  std::string file_name;
  Resource resource;
  Params params;
};

/// Files written by `trucklens analyze` and the query each one equals.
std::vector<Artifact> default_artifacts();

}  // namespace trucklens::analysis
