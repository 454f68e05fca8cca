#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "trucklens/kinematics.hpp"
#include "trucklens/kpi.hpp"

namespace trucklens::area {

inline constexpr double kDefaultSectorSize = 500.0;

/// Regular 2-D grid. Cells are half-open: a point on an edge belongs to the
/// cell with the larger index.
struct GridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double sector_size = kDefaultSectorSize;
  std::size_t cols = 1;
  std::size_t rows = 1;

  bool operator==(const GridSpec&) const = default;
};

void validate(const GridSpec& grid);

/// Smallest sector-aligned grid covering all frame positions.
GridSpec grid_for(std::span<const kinematics::KinematicFrame> frames, double sector_size = kDefaultSectorSize);

enum class Metric { dwell_time, max_speed, max_accel };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

struct HeatmapLayer {
  Metric metric = Metric::dwell_time;
  GridSpec grid;
  std::vector<double> values;  // rows x cols, row-major
  kpi::Window window;
  std::size_t out_of_grid_frames = 0;
  double out_of_grid_dwell = 0.0;

  double at(std::size_t row, std::size_t col) const { return values[row * grid.cols + col]; }
};

HeatmapLayer build_heatmap(std::span<const kinematics::KinematicFrame> frames, const GridSpec& grid, Metric metric,
                           const kpi::Window& window);

struct TrajectoryPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;

  bool operator==(const TrajectoryPoint&) const = default;
};

using Polyline = std::vector<TrajectoryPoint>;

/// In-window positions in time order; ingest gaps split the polyline.
std::vector<Polyline> extract_trajectory(std::span<const kinematics::KinematicFrame> frames, const kpi::Window& window);

}  // namespace trucklens::area
