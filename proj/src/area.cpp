#include "trucklens/area.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trucklens/error.hpp"
#include "trucklens/events.hpp"

namespace trucklens::area {

void validate(const GridSpec& grid) {
  if (!(grid.sector_size > 0.0)) throw Error(ErrorCode::invalid_argument, "sector_size must be positive");
  if (grid.cols < 1 || grid.rows < 1) throw Error(ErrorCode::invalid_argument, "grid needs at least one row and column");
}

GridSpec grid_for(std::span<const kinematics::KinematicFrame> frames, double sector_size) {
  if (frames.empty()) throw Error(ErrorCode::invalid_argument, "no frames");
  if (!(sector_size > 0.0)) throw Error(ErrorCode::invalid_argument, "sector_size must be positive");
  auto [xmin, xmax] = std::minmax_element(frames.begin(), frames.end(), [](auto& a, auto& b) { return a.x < b.x; });
  auto [ymin, ymax] = std::minmax_element(frames.begin(), frames.end(), [](auto& a, auto& b) { return a.y < b.y; });
  GridSpec g;
  g.sector_size = sector_size;
  g.origin_x = std::floor(xmin->x / sector_size) * sector_size;
  g.origin_y = std::floor(ymin->y / sector_size) * sector_size;
  g.cols = static_cast<std::size_t>(std::floor((xmax->x - g.origin_x) / sector_size)) + 1;
  g.rows = static_cast<std::size_t>(std::floor((ymax->y - g.origin_y) / sector_size)) + 1;
  return g;
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::dwell_time: return "dwell_time";
    case Metric::max_speed: return "max_speed";
    case Metric::max_accel: return "max_accel";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  if (name == "dwell_time") return Metric::dwell_time;
  if (name == "max_speed") return Metric::max_speed;
  if (name == "max_accel") return Metric::max_accel;
  throw Error(ErrorCode::invalid_argument, "unknown heatmap metric '" + std::string(name) + "'");
}

HeatmapLayer build_heatmap(std::span<const kinematics::KinematicFrame> frames, const GridSpec& grid, Metric metric,
                           const kpi::Window& window) {
  validate(grid);
  if (!(window.length() > 0.0)) throw Error(ErrorCode::invalid_argument, "heatmap window is empty");
  const double dt = events::frame_dt(frames);
  HeatmapLayer layer;
  layer.metric = metric;
  layer.grid = grid;
  layer.window = window;
  layer.values.assign(grid.rows * grid.cols, 0.0);

  std::size_t in_window = 0;
  for (const auto& f : frames) {
    if (f.t < window.start_t || f.t >= window.end_t) continue;
    ++in_window;
    const double cx = std::floor((f.x - grid.origin_x) / grid.sector_size);
    const double cy = std::floor((f.y - grid.origin_y) / grid.sector_size);
    if (cx < 0.0 || cy < 0.0 || cx >= static_cast<double>(grid.cols) || cy >= static_cast<double>(grid.rows)) {
      ++layer.out_of_grid_frames;
      layer.out_of_grid_dwell += dt;
      continue;
    }
    double& cell = layer.values[static_cast<std::size_t>(cy) * grid.cols + static_cast<std::size_t>(cx)];
    switch (metric) {
      case Metric::dwell_time: cell += dt; break;
      case Metric::max_speed: cell = std::max(cell, f.speed); break;
      case Metric::max_accel: cell = std::max(cell, std::abs(f.accel)); break;
    }
  }
  if (in_window == 0) throw Error(ErrorCode::invalid_argument, "no frames inside the heatmap window");
  return layer;
}

std::vector<Polyline> extract_trajectory(std::span<const kinematics::KinematicFrame> frames, const kpi::Window& window) {
  std::vector<Polyline> out;
  bool open = false;
  for (const auto& f : frames) {
    const bool inside = f.t >= window.start_t && f.t < window.end_t;
    if (!inside || f.in_gap) {
      open = false;
      continue;
    }
    if (!open) {
      out.emplace_back();
      open = true;
    }
    out.back().push_back({f.t, f.x, f.y});
  }
  return out;
}

}  // namespace trucklens::area
