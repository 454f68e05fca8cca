#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "trucklens/kinematics.hpp"

namespace trucklens::events {

enum class EventType { standstill, maneuvering, driving, harsh_braking, strong_acceleration, fork_motion };
enum class ForkDirection { none, lift, lower };

inline constexpr std::array<EventType, 5> kExclusiveTypes{EventType::standstill, EventType::maneuvering,
                                                          EventType::driving, EventType::harsh_braking,
                                                          EventType::strong_acceleration};
inline constexpr std::array<EventType, 6> kAllTypes{EventType::standstill,      EventType::maneuvering,
                                                    EventType::driving,         EventType::harsh_braking,
                                                    EventType::strong_acceleration, EventType::fork_motion};

std::string_view to_string(EventType type);
std::string_view to_string(ForkDirection dir);
EventType parse_event_type(std::string_view name);
bool is_exclusive(EventType type);

/// Threshold on the type's signal and the shortest duration kept.
///   standstill:           speed <  threshold
///   maneuvering:          speed <  threshold
///   driving:              speed >= threshold
///   harsh_braking:        accel <= threshold (negative)
///   strong_acceleration:  accel >= threshold
///   fork_motion:          |fork_v| >= threshold
struct Limit {
  double threshold = 0.0;
  double min_duration = 0.0;

  bool operator==(const Limit&) const = default;
};

struct EventLimits {
  Limit standstill{100.0, 2.0};
  Limit maneuvering{500.0, 1.5};
  Limit driving{500.0, 1.0};
  Limit harsh_braking{-1500.0, 0.3};
  Limit strong_acceleration{1500.0, 0.3};
  Limit fork_motion{50.0, 0.5};
  /// Priority order of the exclusive types; earlier types keep their bounds.
  std::vector<EventType> order{EventType::harsh_braking, EventType::strong_acceleration, EventType::standstill,
                               EventType::maneuvering, EventType::driving};

  const Limit& of(EventType type) const;
  Limit& of(EventType type);

  bool operator==(const EventLimits&) const = default;
};

EventLimits default_limits();

/// Throws Error(invalid_argument) when bounds are inconsistent.
void validate(const EventLimits& limits);

/// Frames [start_idx, end_idx); times are half-open [start_t, end_t) with
/// end_t = t[end_idx - 1] + dt.
struct MotionEvent {
  EventType type = EventType::standstill;
  ForkDirection direction = ForkDirection::none;
  double start_t = 0.0;
  double end_t = 0.0;
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;
  double mean_speed = 0.0;
  double peak_accel = 0.0;  // signed accel with the largest magnitude
  double distance = 0.0;

  double duration() const { return end_t - start_t; }
  bool operator==(const MotionEvent&) const = default;
};

/// All detected events, sorted by start time (ties by type).
class EventStack {
 public:
  EventStack() = default;
  explicit EventStack(std::vector<MotionEvent> events);

  void push(MotionEvent event);
  void sort();

  const std::vector<MotionEvent>& all() const { return events_; }
  std::vector<MotionEvent> of_type(EventType type) const;
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  bool operator==(const EventStack&) const = default;

 private:
  std::vector<MotionEvent> events_;
};

/// Frame spacing of a uniform frame list (seconds).
double frame_dt(std::span<const kinematics::KinematicFrame> frames);

/// Fills mean_speed / peak_accel / distance / times from the frame range.
MotionEvent make_event(std::span<const kinematics::KinematicFrame> frames, EventType type, std::size_t begin,
                       std::size_t end, ForkDirection dir = ForkDirection::none);

/// Threshold segmentation, duration pruning, priority overlap trimming and
/// chronological sort. Gap frames never satisfy any condition.
EventStack detect_events(std::span<const kinematics::KinematicFrame> frames, const EventLimits& limits);

struct Run {
  std::optional<EventType> label;  // nullopt = unclassified
  ForkDirection direction = ForkDirection::none;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const Run&) const = default;
};

struct Segmentation {
  std::vector<Run> exclusive;  // partition of [0, frames.size())
  std::vector<Run> fork;       // fork_motion overlay
};

Segmentation segment_trajectory(std::span<const kinematics::KinematicFrame> frames, const EventStack& stack);

}  // namespace trucklens::events
