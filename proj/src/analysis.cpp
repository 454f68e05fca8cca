#include "trucklens/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "trucklens/area.hpp"
#include "trucklens/error.hpp"
#include "trucklens/kpi.hpp"
#include "trucklens/serialize.hpp"

namespace trucklens::analysis {
namespace {

double param_double(const Params& p, std::string_view key, double fallback) {
  auto it = p.find(key);
  if (it == p.end() || it->second.empty()) return fallback;
  const std::string& s = it->second;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw Error(ErrorCode::invalid_argument, "parameter '" + std::string(key) + "' is not a number: '" + s + "'");
  return v;
}

void allow_only(const Params& p, std::initializer_list<std::string_view> keys) {
  for (const auto& [k, v] : p) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw Error(ErrorCode::invalid_argument, "unknown query parameter '" + k + "'");
  }
}

std::vector<events::EventType> parse_types(std::string_view list) {
  std::vector<events::EventType> out;
  while (!list.empty()) {
    auto comma = list.find(',');
    auto item = list.substr(0, comma);
    if (!item.empty()) out.push_back(events::parse_event_type(item));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

Analysis analyze(std::span<const ingest::PositionSample> samples, const AnalysisConfig& config) {
  return from_frames(kinematics::process_chain(samples, config.chain), config);
}

Analysis from_frames(std::vector<kinematics::KinematicFrame> frames, const AnalysisConfig& config) {
  Analysis a;
  a.config = config;
  a.frames = std::move(frames);
  if (!a.frames.empty()) a.stack = events::detect_events(a.frames, config.limits);
  return a;
}

Resource parse_resource(std::string_view name) {
  if (name == "frames") return Resource::frames;
  if (name == "events") return Resource::events;
  if (name == "kpi") return Resource::kpi;
  if (name == "heatmap") return Resource::heatmap;
  if (name == "trajectory") return Resource::trajectory;
  throw Error(ErrorCode::not_found, "unknown resource '" + std::string(name) + "'");
}

kpi::Window query_window(const Analysis& a, const Params& params) {
  if (a.frames.empty()) throw Error(ErrorCode::state, "session has no frames yet");
  const kpi::Window full = kpi::full_window(a.frames);
  const double t0 = full.start_t;
  kpi::Window w;
  w.start_t = std::max(full.start_t, t0 + param_double(params, "from", 0.0));
  w.end_t = std::min(full.end_t, t0 + param_double(params, "to", full.length()));
  if (!(w.end_t > w.start_t)) throw Error(ErrorCode::invalid_argument, "query window is empty");
  return w;
}

std::string render(const Analysis& a, Resource resource, const Params& params) {
  switch (resource) {
    case Resource::frames: {
      allow_only(params, {"from", "to", "stride"});
      const auto w = query_window(a, params);
      const double stride = param_double(params, "stride", 1.0);
      if (stride < 1.0 || stride != std::floor(stride))
        throw Error(ErrorCode::invalid_argument, "stride must be a positive integer");
      auto first = std::find_if(a.frames.begin(), a.frames.end(), [&](auto& f) { return f.t >= w.start_t; });
      auto last = std::find_if(first, a.frames.end(), [&](auto& f) { return f.t >= w.end_t; });
      return serialize::frames_jsonl({first, last}, static_cast<std::size_t>(stride));
    }
    case Resource::events: {
      allow_only(params, {"types"});
      std::optional<std::vector<events::EventType>> types;
      if (auto it = params.find("types"); it != params.end()) types = parse_types(it->second);
      return serialize::events_jsonl(a.stack, types);
    }
    case Resource::kpi: {
      allow_only(params, {"from", "to"});
      return serialize::kpi_json(kpi::compute_kpis(a.stack, a.frames, query_window(a, params)));
    }
    case Resource::heatmap: {
      allow_only(params, {"metric", "sector", "from", "to"});
      auto metric = area::Metric::dwell_time;
      if (auto it = params.find("metric"); it != params.end()) metric = area::parse_metric(it->second);
      const double sector = param_double(params, "sector", a.config.sector_size);
      const auto grid = area::grid_for(a.frames, sector);
      return serialize::heatmap_json(area::build_heatmap(a.frames, grid, metric, query_window(a, params)));
    }
    case Resource::trajectory: {
      allow_only(params, {"from", "to"});
      return serialize::trajectory_jsonl(area::extract_trajectory(a.frames, query_window(a, params)));
    }
  }
  throw Error(ErrorCode::invalid_argument, "bad resource");
}

std::vector<Artifact> default_artifacts() {
  return {
      {"frames.jsonl", Resource::frames, {}},
      {"events.jsonl", Resource::events, {}},
      {"kpi.json", Resource::kpi, {}},
      {"heatmap_dwell_time.json", Resource::heatmap, {{"metric", "dwell_time"}}},
      {"heatmap_max_speed.json", Resource::heatmap, {{"metric", "max_speed"}}},
      {"heatmap_max_accel.json", Resource::heatmap, {{"metric", "max_accel"}}},
      {"trajectory.jsonl", Resource::trajectory, {}},
  };
}

}  // namespace trucklens::analysis
