#include "trucklens/kpi.hpp"

#include <algorithm>

#include "trucklens/error.hpp"

namespace trucklens::kpi {
namespace {

using events::EventType;

bool is_travel(EventType t) {
  return t == EventType::driving || t == EventType::harsh_braking || t == EventType::strong_acceleration;
}

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

}  // namespace

Window full_window(std::span<const kinematics::KinematicFrame> frames) {
  if (frames.empty()) throw Error(ErrorCode::invalid_argument, "no frames");
  return {frames.front().t, frames.back().t + events::frame_dt(frames)};
}

KpiReport compute_kpis(const events::EventStack& stack, std::span<const kinematics::KinematicFrame> frames,
                       const Window& window) {
  if (!(window.length() > 0.0)) throw Error(ErrorCode::invalid_argument, "KPI window is empty");
  if (frames.empty()) throw Error(ErrorCode::invalid_argument, "no frames");
  const auto full = full_window(frames);
  const double tol = 1e-9 * std::max(1.0, std::abs(full.end_t));
  if (window.start_t < full.start_t - tol || window.end_t > full.end_t + tol) {
    throw Error(ErrorCode::invalid_argument, "KPI window lies outside the frame range");
  }
  const double dt = events::frame_dt(frames);

  KpiReport r;
  r.window = window;
  double speed_sum = 0.0;
  std::size_t speed_count = 0;
  std::vector<const events::MotionEvent*> travel, fork;
  for (const auto& e : stack.all()) {
    const double clipped = overlap(e.start_t, e.end_t, window.start_t, window.end_t);
    if (e.type == EventType::driving) r.total_driving_time += clipped;
    if (e.type == EventType::standstill) r.total_standstill_time += clipped;
    if (e.type == EventType::fork_motion) fork.push_back(&e);
    if (!is_travel(e.type)) continue;
    travel.push_back(&e);
    for (std::size_t k = e.start_idx; k < e.end_idx && k < frames.size(); ++k) {
      const double t = frames[k].t;
      if (t < window.start_t || t >= window.end_t) continue;
      speed_sum += frames[k].speed;
      ++speed_count;
    }
  }
  for (const auto* f : fork) {
    for (const auto* d : travel) {
      const double a0 = std::max(f->start_t, window.start_t);
      const double a1 = std::min(f->end_t, window.end_t);
      r.simultaneous_loading_and_driving += overlap(a0, a1, d->start_t, d->end_t);
    }
  }
  r.equipment_utilization = std::clamp(r.total_standstill_time / window.length(), 0.0, 1.0);
  r.activity_ratio = 1.0 - r.equipment_utilization;
  r.no_driving = speed_count == 0;
  r.average_driving_velocity = speed_count ? speed_sum / static_cast<double>(speed_count) : 0.0;
  r.total_driving_distance = speed_sum * dt;
  return r;
}

}  // namespace trucklens::kpi
