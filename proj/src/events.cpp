#include "trucklens/events.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trucklens/error.hpp"

namespace trucklens::events {
namespace {

using kinematics::KinematicFrame;

constexpr double kDurationEps = 1e-9;

bool condition(EventType type, const Limit& limit, const KinematicFrame& f) {
  switch (type) {
    case EventType::standstill:
    case EventType::maneuvering: return f.speed < limit.threshold;
    case EventType::driving: return f.speed >= limit.threshold;
    case EventType::harsh_braking: return f.accel <= limit.threshold;
    case EventType::strong_acceleration: return f.accel >= limit.threshold;
    case EventType::fork_motion: return f.fork_v && std::abs(*f.fork_v) >= limit.threshold;
  }
  return false;
}

template <typename Pred>
std::vector<std::pair<std::size_t, std::size_t>> runs_of(std::size_t n, Pred&& pred) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t k = 0;
  while (k < n) {
    if (!pred(k)) {
      ++k;
      continue;
    }
    std::size_t start = k;
    while (k < n && pred(k)) ++k;
    out.emplace_back(start, k);
  }
  return out;
}

bool long_enough(std::size_t begin, std::size_t end, double dt, double min_duration) {
  const double duration = static_cast<double>(end - begin) * dt;
  return duration > 0.0 && duration + kDurationEps >= min_duration;
}

int type_rank(EventType t) { return static_cast<int>(t); }

}  // namespace

std::string_view to_string(EventType type) {
  switch (type) {
    case EventType::standstill: return "standstill";
    case EventType::maneuvering: return "maneuvering";
    case EventType::driving: return "driving";
    case EventType::harsh_braking: return "harsh_braking";
    case EventType::strong_acceleration: return "strong_acceleration";
    case EventType::fork_motion: return "fork_motion";
  }
  return "?";
}

std::string_view to_string(ForkDirection dir) {
  switch (dir) {
    case ForkDirection::lift: return "lift";
    case ForkDirection::lower: return "lower";
    case ForkDirection::none: break;
  }
  return "none";
}

EventType parse_event_type(std::string_view name) {
  for (auto t : kAllTypes)
    if (to_string(t) == name) return t;
  throw Error(ErrorCode::invalid_argument, "unknown event type '" + std::string(name) + "'");
}

bool is_exclusive(EventType type) { return type != EventType::fork_motion; }

const Limit& EventLimits::of(EventType type) const {
  switch (type) {
    case EventType::standstill: return standstill;
    case EventType::maneuvering: return maneuvering;
    case EventType::driving: return driving;
    case EventType::harsh_braking: return harsh_braking;
    case EventType::strong_acceleration: return strong_acceleration;
    case EventType::fork_motion: return fork_motion;
  }
  return standstill;
}

Limit& EventLimits::of(EventType type) { return const_cast<Limit&>(std::as_const(*this).of(type)); }

EventLimits default_limits() { return EventLimits{}; }

void validate(const EventLimits& limits) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::invalid_argument, "event limits: " + msg); };
  if (!(limits.standstill.threshold < limits.maneuvering.threshold)) {
    fail("standstill threshold must be below the maneuvering threshold");
  }
  if (!(limits.maneuvering.threshold <= limits.driving.threshold)) {
    fail("maneuvering threshold must not exceed the driving threshold");
  }
  if (!(limits.harsh_braking.threshold < 0.0)) fail("harsh_braking threshold must be negative");
  if (!(limits.strong_acceleration.threshold > 0.0)) fail("strong_acceleration threshold must be positive");
  if (!(limits.fork_motion.threshold > 0.0)) fail("fork_motion threshold must be positive");
  for (auto t : kAllTypes) {
    if (!(limits.of(t).min_duration >= 0.0)) fail(std::string(to_string(t)) + " min_duration must be >= 0");
  }
  std::vector<EventType> seen;
  for (auto t : limits.order) {
    if (!is_exclusive(t)) fail("fork_motion is evaluated independently and cannot appear in order");
    if (std::find(seen.begin(), seen.end(), t) != seen.end()) fail("duplicate type in order");
    seen.push_back(t);
  }
}

EventStack::EventStack(std::vector<MotionEvent> events) : events_(std::move(events)) { sort(); }

void EventStack::push(MotionEvent event) { events_.push_back(event); }

void EventStack::sort() {
  std::stable_sort(events_.begin(), events_.end(), [](const MotionEvent& a, const MotionEvent& b) {
    if (a.start_t != b.start_t) return a.start_t < b.start_t;
    if (a.type != b.type) return type_rank(a.type) < type_rank(b.type);
    return a.direction < b.direction;
  });
}

std::vector<MotionEvent> EventStack::of_type(EventType type) const {
  std::vector<MotionEvent> out;
  std::copy_if(events_.begin(), events_.end(), std::back_inserter(out),
               [type](const MotionEvent& e) { return e.type == type; });
  return out;
}

double frame_dt(std::span<const KinematicFrame> frames) {
  if (frames.size() < 2) return 0.0;
  return (frames.back().t - frames.front().t) / static_cast<double>(frames.size() - 1);
}

MotionEvent make_event(std::span<const KinematicFrame> frames, EventType type, std::size_t begin, std::size_t end,
                       ForkDirection dir) {
  const double dt = frame_dt(frames);
  MotionEvent e;
  e.type = type;
  e.direction = dir;
  e.start_idx = begin;
  e.end_idx = end;
  e.start_t = frames[begin].t;
  e.end_t = frames[end - 1].t + dt;
  double sum = 0.0;
  for (std::size_t k = begin; k < end; ++k) {
    sum += frames[k].speed;
    if (std::abs(frames[k].accel) > std::abs(e.peak_accel)) e.peak_accel = frames[k].accel;
  }
  e.mean_speed = sum / static_cast<double>(end - begin);
  e.distance = sum * dt;
  return e;
}

EventStack detect_events(std::span<const KinematicFrame> frames, const EventLimits& limits) {
  if (frames.empty()) throw Error(ErrorCode::invalid_argument, "cannot detect events on an empty frame list");
  validate(limits);
  const std::size_t n = frames.size();
  const double dt = frame_dt(frames);

  EventStack stack;
  std::vector<bool> taken(n, false);
  for (auto type : limits.order) {
    const Limit& limit = limits.of(type);
    auto candidates = runs_of(n, [&](std::size_t k) { return !frames[k].in_gap && condition(type, limit, frames[k]); });
    for (auto [begin, end] : candidates) {
      if (!long_enough(begin, end, dt, limit.min_duration)) continue;
      // Keep only the parts not already claimed by higher-priority events.
      auto pieces = runs_of(end - begin, [&](std::size_t i) { return !taken[begin + i]; });
      for (auto [pb, pe] : pieces) {
        const std::size_t b = begin + pb, e = begin + pe;
        if (!long_enough(b, e, dt, limit.min_duration)) continue;
        std::fill(taken.begin() + static_cast<std::ptrdiff_t>(b), taken.begin() + static_cast<std::ptrdiff_t>(e), true);
        stack.push(make_event(frames, type, b, e));
      }
    }
  }

  const Limit& fork = limits.fork_motion;
  for (auto dir : {ForkDirection::lift, ForkDirection::lower}) {
    const double sign = dir == ForkDirection::lift ? 1.0 : -1.0;
    auto runs = runs_of(n, [&](std::size_t k) {
      const auto& f = frames[k];
      return !f.in_gap && f.fork_v && sign * *f.fork_v >= fork.threshold;
    });
    for (auto [b, e] : runs) {
      if (long_enough(b, e, dt, fork.min_duration)) stack.push(make_event(frames, EventType::fork_motion, b, e, dir));
    }
  }
  stack.sort();
  return stack;
}

Segmentation segment_trajectory(std::span<const KinematicFrame> frames, const EventStack& stack) {
  const std::size_t n = frames.size();
  std::vector<std::optional<EventType>> label(n);
  Segmentation seg;
  for (const auto& e : stack.all()) {
    if (e.start_idx >= e.end_idx || e.end_idx > n || std::abs(frames[e.start_idx].t - e.start_t) > 1e-9) {
      throw Error(ErrorCode::invalid_argument, "event stack does not belong to these frames");
    }
    if (!is_exclusive(e.type)) {
      seg.fork.push_back({e.type, e.direction, e.start_idx, e.end_idx});
      continue;
    }
    for (std::size_t k = e.start_idx; k < e.end_idx; ++k) {
      if (label[k]) throw Error(ErrorCode::invalid_argument, "exclusive events overlap at frame " + std::to_string(k));
      label[k] = e.type;
    }
  }
  std::size_t k = 0;
  while (k < n) {
    std::size_t start = k;
    while (k < n && label[k] == label[start]) ++k;
    seg.exclusive.push_back({label[start], ForkDirection::none, start, k});
  }
  return seg;
}

}  // namespace trucklens::events
