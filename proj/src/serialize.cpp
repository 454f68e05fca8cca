#include "trucklens/serialize.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "trucklens/error.hpp"

namespace trucklens::serialize {
namespace {

using nlohmann::ordered_json;

ordered_json frame_obj(const kinematics::KinematicFrame& f) {
  ordered_json j = {{"t", f.t},   {"x", f.x},         {"y", f.y},         {"z", f.z},
                    {"vx", f.vx}, {"vy", f.vy},       {"speed", f.speed}, {"accel", f.accel}};
  if (f.fork_v) j["fork_v"] = *f.fork_v;
  j["in_gap"] = f.in_gap;
  return j;
}

ordered_json window_arr(const kpi::Window& w) { return ordered_json::array({w.start_t, w.end_t}); }

double num(const ordered_json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw ParseError(line, std::string("missing number '") + key + "'");
  return it->get<double>();
}

}  // namespace

std::string frame_json(const kinematics::KinematicFrame& frame) { return frame_obj(frame).dump(); }

std::string frames_jsonl(std::span<const kinematics::KinematicFrame> frames, std::size_t stride) {
  if (stride == 0) throw Error(ErrorCode::invalid_argument, "stride must be >= 1");
  std::string out;
  for (std::size_t i = 0; i < frames.size(); i += stride) {
    out += frame_json(frames[i]);
    out += '\n';
  }
  return out;
}

std::string event_json(const events::MotionEvent& e) {
  ordered_json j = {{"type", events::to_string(e.type)}, {"start_t", e.start_t},     {"end_t", e.end_t},
                    {"start_idx", e.start_idx},          {"end_idx", e.end_idx}};
  if (e.type == events::EventType::fork_motion) j["direction"] = events::to_string(e.direction);
  j["mean_speed"] = e.mean_speed;
  j["peak_accel"] = e.peak_accel;
  j["distance"] = e.distance;
  return j.dump();
}

std::string events_jsonl(const events::EventStack& stack, std::optional<std::vector<events::EventType>> types) {
  std::string out;
  for (const auto& e : stack.all()) {
    if (types && std::find(types->begin(), types->end(), e.type) == types->end()) continue;
    out += event_json(e);
    out += '\n';
  }
  return out;
}

events::EventStack parse_events_jsonl(std::string_view text) {
  std::vector<events::MotionEvent> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const ordered_json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    events::MotionEvent e;
    if (!j.contains("type") || !j["type"].is_string()) throw ParseError(line_no, "missing 'type'");
    e.type = events::parse_event_type(j["type"].get<std::string>());
    if (auto it = j.find("direction"); it != j.end()) {
      const auto d = it->get<std::string>();
      e.direction = d == "lift" ? events::ForkDirection::lift
                    : d == "lower" ? events::ForkDirection::lower
                                   : events::ForkDirection::none;
    }
    e.start_t = num(j, "start_t", line_no);
    e.end_t = num(j, "end_t", line_no);
    e.start_idx = static_cast<std::size_t>(num(j, "start_idx", line_no));
    e.end_idx = static_cast<std::size_t>(num(j, "end_idx", line_no));
    e.mean_speed = num(j, "mean_speed", line_no);
    e.peak_accel = num(j, "peak_accel", line_no);
    e.distance = num(j, "distance", line_no);
    out.push_back(e);
  }
  return events::EventStack(std::move(out));
}

std::string kpi_json(const kpi::KpiReport& r) {
  ordered_json j = {{"total_driving_time", r.total_driving_time},
                    {"total_standstill_time", r.total_standstill_time},
                    {"equipment_utilization", r.equipment_utilization},
                    {"average_driving_velocity", r.average_driving_velocity},
                    {"simultaneous_loading_and_driving", r.simultaneous_loading_and_driving},
                    {"total_driving_distance", r.total_driving_distance},
                    {"window", window_arr(r.window)},
                    {"activity_ratio", r.activity_ratio},
                    {"no_driving", r.no_driving}};
  return j.dump();
}

std::string heatmap_json(const area::HeatmapLayer& l) {
  ordered_json j = {{"metric", area::to_string(l.metric)},
                    {"grid",
                     {{"origin_x", l.grid.origin_x},
                      {"origin_y", l.grid.origin_y},
                      {"sector_size", l.grid.sector_size},
                      {"cols", l.grid.cols},
                      {"rows", l.grid.rows}}},
                    {"window", window_arr(l.window)},
                    {"values", l.values},
                    {"out_of_grid_frames", l.out_of_grid_frames},
                    {"out_of_grid_dwell", l.out_of_grid_dwell}};
  return j.dump();
}

std::string trajectory_jsonl(std::span<const area::Polyline> polylines) {
  std::string out;
  for (const auto& line : polylines) {
    ordered_json pts = ordered_json::array();
    for (const auto& p : line) pts.push_back({p.t, p.x, p.y});
    out += ordered_json{{"points", pts}}.dump();
    out += '\n';
  }
  return out;
}

std::string quality_json(const synthlab::DetectionQuality& q) {
  ordered_json types = ordered_json::object();
  for (const auto& [type, tq] : q.per_type) {
    ordered_json o = {{"reference", tq.reference}, {"detected", tq.detected}, {"matched", tq.matched},
                      {"missed", tq.missed},       {"spurious", tq.spurious}};
    o["recall"] = tq.recall_defined ? ordered_json(tq.recall) : ordered_json(nullptr);
    o["precision"] = tq.precision_defined ? ordered_json(tq.precision) : ordered_json(nullptr);
    o["start_deltas"] = tq.start_deltas;
    o["end_deltas"] = tq.end_deltas;
    types[std::string(events::to_string(type))] = std::move(o);
  }
  ordered_json j = {{"per_type", types}, {"median_abs_boundary_delta", q.median_abs_boundary_delta()}};
  return j.dump(2);
}

}  // namespace trucklens::serialize
