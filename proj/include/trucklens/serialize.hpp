#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trucklens/area.hpp"
#include "trucklens/events.hpp"
#include "trucklens/kinematics.hpp"
#include "trucklens/kpi.hpp"
#include "trucklens/synthlab.hpp"

// JSON forms shared by the CLI artifacts and the HTTP API. Every function is
// deterministic so identical inputs give identical bytes.
namespace trucklens::serialize {

/// One frame as a single-line object (no trailing newline).
std::string frame_json(const kinematics::KinematicFrame& frame);

/// Every `stride`-th frame, one object per line.
std::string frames_jsonl(std::span<const kinematics::KinematicFrame> frames, std::size_t stride = 1);

std::string event_json(const events::MotionEvent& event);
/// One event per line; `types` restricts the output when given.
std::string events_jsonl(const events::EventStack& stack, std::optional<std::vector<events::EventType>> types = {});
events::EventStack parse_events_jsonl(std::string_view text);

std::string kpi_json(const kpi::KpiReport& report);
std::string heatmap_json(const area::HeatmapLayer& layer);
/// One polyline per line: {"points":[[t,x,y],...]}.
std::string trajectory_jsonl(std::span<const area::Polyline> polylines);

std::string quality_json(const synthlab::DetectionQuality& quality);

}  // namespace trucklens::serialize
