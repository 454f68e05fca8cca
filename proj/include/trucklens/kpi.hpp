#pragma once

#include <span>

#include "trucklens/events.hpp"

namespace trucklens::kpi {

/// Half-open time window [start_t, end_t) in seconds.
struct Window {
  double start_t = 0.0;
  double end_t = 0.0;

  double length() const { return end_t - start_t; }
  bool operator==(const Window&) const = default;
};

/// Window covering every frame.
Window full_window(std::span<const kinematics::KinematicFrame> frames);

/// Transport KPIs for one window. Times in s, velocity in mm/s, distance in mm.
struct KpiReport {
  double total_driving_time = 0.0;
  double total_standstill_time = 0.0;
  /// Standstill time divided by window length.
  double equipment_utilization = 0.0;
  double average_driving_velocity = 0.0;
  double simultaneous_loading_and_driving = 0.0;
  double total_driving_distance = 0.0;
  Window window;

  /// 1 - equipment_utilization.
  double activity_ratio = 0.0;
  /// Set when no driving, braking or acceleration frame falls in the window;
  /// average_driving_velocity is then reported as 0.
  bool no_driving = true;

  bool operator==(const KpiReport&) const = default;
};

/// Events straddling the window are clipped to it.
KpiReport compute_kpis(const events::EventStack& stack, std::span<const kinematics::KinematicFrame> frames,
                       const Window& window);

}  // namespace trucklens::kpi
