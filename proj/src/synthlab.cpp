#include "trucklens/synthlab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <future>
#include <numbers>
#include <random>

#include "trucklens/error.hpp"

namespace trucklens::synthlab {
namespace {

using events::EventType;
using ingest::PositionSample;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// A phase resolved into closed-form kinematics.
struct Segment {
  EventType label;
  double t_start = 0.0;
  double duration = 0.0;
  Vec2 p0;
  Vec2 heading{1.0, 0.0};
  double v0 = 0.0;
  double a = 0.0;
  double fork_v = 0.0;
  double fork0 = 0.0;

  double t_end() const { return t_start + duration; }
  double progress(double tau) const { return v0 * tau + 0.5 * a * tau * tau; }
  double speed(double tau) const { return std::max(0.0, v0 + a * tau); }
};

std::vector<Segment> resolve(const MovementScript& script) {
  std::vector<Segment> out;
  Vec2 pos = script.start;
  Vec2 heading{1.0, 0.0};
  double v = 0.0;
  double t = 0.0;
  double fork = script.fork_z0.value_or(0.0);
  for (std::size_t i = 0; i < script.phases.size(); ++i) {
    const auto& ph = script.phases[i];
    auto fail = [&](const std::string& msg) {
      throw Error(ErrorCode::invalid_argument, "phase " + std::to_string(i) + ": " + msg);
    };
    if (!events::is_exclusive(ph.label)) fail("label must be an exclusive event type");
    if (ph.toward) {
      auto it = script.anchors.find(*ph.toward);
      if (it == script.anchors.end()) fail("unknown anchor '" + *ph.toward + "'");
      const double dx = it->second.x - pos.x, dy = it->second.y - pos.y;
      const double len = std::hypot(dx, dy);
      if (len > 0.0) heading = {dx / len, dy / len};
    } else if (ph.heading_deg) {
      const double r = *ph.heading_deg * std::numbers::pi / 180.0;
      heading = {std::cos(r), std::sin(r)};
    }
    Segment s;
    s.label = ph.label;
    s.t_start = t;
    s.p0 = pos;
    s.heading = heading;
    s.v0 = v;
    s.fork_v = ph.fork_v;
    s.fork0 = fork;
    if (ph.speed_to) {
      if (*ph.speed_to < 0.0) fail("speed_to must be >= 0");
      const double dv = *ph.speed_to - v;
      if (ph.accel && dv != 0.0) {
        if (!(*ph.accel > 0.0)) fail("accel must be positive");
        s.duration = std::abs(dv) / *ph.accel;
      } else if (ph.duration) {
        s.duration = *ph.duration;
      } else {
        fail("ramp needs accel or duration");
      }
      if (!(s.duration > 0.0)) fail("duration must be positive");
      s.a = dv / s.duration;
      v = *ph.speed_to;
    } else if (ph.duration) {
      s.duration = *ph.duration;
    } else if (ph.distance) {
      if (!(v > 0.0)) fail("distance phase needs a nonzero speed");
      s.duration = *ph.distance / v;
    } else {
      fail("phase needs duration, distance or speed_to");
    }
    if (!(s.duration > 0.0)) fail("duration must be positive");
    const double d = s.progress(s.duration);
    pos = {pos.x + heading.x * d, pos.y + heading.y * d};
    fork += s.fork_v * s.duration;
    t += s.duration;
    out.push_back(s);
  }
  if (out.empty()) throw Error(ErrorCode::invalid_argument, "movement script has no phases");
  return out;
}

std::size_t tick_of(double t, double rate) { return static_cast<std::size_t>(std::llround(t * rate)); }

}  // namespace

std::vector<PositionSample> gen_static(double duration, double rate, double sensor_noise_std, std::uint64_t seed) {
  if (!(duration > 0.0) || !(rate > 0.0)) throw Error(ErrorCode::invalid_argument, "duration and rate must be positive");
  if (sensor_noise_std < 0.0) throw Error(ErrorCode::invalid_argument, "noise std must be >= 0");
  const auto n = static_cast<std::size_t>(std::llround(duration * rate));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sensor_noise_std > 0.0 ? sensor_noise_std : 1.0);
  std::vector<PositionSample> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto& s = out[k];
    s.t = static_cast<double>(k) / rate;
    s.x = kStaticX;
    s.y = kStaticY;
    s.z = kStaticZ;
    if (sensor_noise_std > 0.0) {
      s.x += noise(rng);
      s.y += noise(rng);
      s.z += noise(rng);
    }
  }
  return out;
}

double estimate_rate(std::span<const PositionSample> samples) {
  if (samples.size() < 2) throw Error(ErrorCode::invalid_argument, "need at least 2 samples to estimate the rate");
  std::vector<double> dts;
  dts.reserve(samples.size() - 1);
  for (std::size_t i = 1; i < samples.size(); ++i) dts.push_back(samples[i].t - samples[i - 1].t);
  std::nth_element(dts.begin(), dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2), dts.end());
  return 1.0 / dts[dts.size() / 2];
}

std::vector<PositionSample> manipulate(std::span<const PositionSample> samples, const ManipulationSpec& spec) {
  if (!(spec.target_rate > 0.0)) throw Error(ErrorCode::invalid_argument, "target_rate must be positive");
  if (spec.scatter_std < 0.0) throw Error(ErrorCode::invalid_argument, "scatter_std must be >= 0");
  const double source = estimate_rate(samples);
  if (spec.target_rate > source * (1.0 + 1e-9)) {
    throw Error(ErrorCode::invalid_argument, "target_rate exceeds the source rate");
  }
  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(source / spec.target_rate)));
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.scatter_std > 0.0 ? spec.scatter_std : 1.0);
  std::vector<PositionSample> out;
  out.reserve(samples.size() / step + 1);
  for (std::size_t i = 0; i < samples.size(); i += step) {
    auto s = samples[i];
    if (spec.scatter_std > 0.0) {
      s.x += noise(rng);
      s.y += noise(rng);
      s.z += noise(rng);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<filters::FilterConfig> default_sweep_filters() {
  filters::FilterConfig butter;
  filters::FilterConfig fir;
  fir.kind = filters::FilterKind::fir;
  filters::FilterConfig savgol;
  savgol.kind = filters::FilterKind::savgol;
  return {butter, fir, savgol};
}

double mean_speed(std::span<const kinematics::KinematicFrame> frames) {
  if (frames.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& f : frames) sum += f.speed;
  return sum / static_cast<double>(frames.size());
}

std::vector<SweepRow> run_static_sweep(const SweepSpec& spec) {
  if (spec.rates.empty() || spec.scatters.empty()) throw Error(ErrorCode::invalid_argument, "sweep axes must be nonempty");
  const auto filters_list = spec.filters.empty() ? default_sweep_filters() : spec.filters;
  const auto source = gen_static(spec.duration, spec.source_rate, spec.rig_noise, spec.seed);

  // One task per (rate, scatter) cell; the same noise draw is shared by all
  // scatter levels of a rate and by all filters of a cell.
  std::vector<std::future<std::vector<SweepRow>>> tasks;
  for (std::size_t ri = 0; ri < spec.rates.size(); ++ri) {
    for (double scatter : spec.scatters) {
      const double rate = spec.rates[ri];
      const std::uint64_t cell_seed = mix_seed(spec.seed, ri);
      tasks.push_back(std::async(std::launch::async, [&, rate, scatter, cell_seed] {
        const auto manipulated = manipulate(source, {rate, scatter, cell_seed});
        std::vector<SweepRow> rows;
        for (const auto& filter : filters_list) {
          auto chain = kinematics::with_filter(kinematics::chain_defaults(), filter);
          chain.resample_rate = spec.resample_rate.value_or(rate);
          const auto frames = kinematics::process_chain(manipulated, chain);
          rows.push_back({rate, scatter, filter, mean_speed(frames)});
        }
        return rows;
      }));
    }
  }
  std::vector<SweepRow> out;
  for (auto& task : tasks) {
    auto rows = task.get();
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out = "rate_hz,scatter_mm,filter,mean_speed_mm_s\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.3f", r.mean_speed_mm_s);
    out += format_number(r.rate_hz) + ',' + format_number(r.scatter_mm) + ',' +
           std::string(filters::to_string(r.filter.kind)) + ',' + buf + '\n';
  }
  return out;
}

MovementScript default_movement_script() {
  using E = EventType;
  MovementScript s;
  s.anchors = {{"parking", {2000.0, 2000.0}},
               {"diagonal_end", {16000.0, 16000.0}},
               {"load_zone", {4000.0, 14000.0}},
               {"shelf", {28000.0, 4000.0}}};
  s.start = s.anchors["parking"];
  s.z = 2200.0;
  s.fork_z0 = 200.0;
  auto hold = [](E label, double duration, double fork_v = 0.0) {
    Phase p;
    p.label = label;
    p.duration = duration;
    p.fork_v = fork_v;
    return p;
  };
  auto ramp = [](E label, double speed_to, double accel, std::optional<std::string> toward = std::nullopt) {
    Phase p;
    p.label = label;
    p.speed_to = speed_to;
    p.accel = accel;
    p.toward = std::move(toward);
    return p;
  };
  auto cruise = [](double distance, double fork_v = 0.0) {
    Phase p;
    p.label = E::driving;
    p.distance = distance;
    p.fork_v = fork_v;
    return p;
  };
  auto ramp_len = [](double v, double a) { return v * v / (2.0 * a); };
  // Travel phases (driving, braking, acceleration) add up to 42.0 m:
  // 12 m first sprint, 20 m shelf transport, 10 m second sprint.
  s.phases = {
      hold(E::standstill, 6.0),
      // first diagonal sprint
      ramp(E::strong_acceleration, 3000.0, 2500.0, "diagonal_end"),
      cruise(12000.0 - 2.0 * ramp_len(3000.0, 2500.0)),
      ramp(E::harsh_braking, 0.0, 2500.0),
      hold(E::standstill, 5.0),
      // slow approach to the load zone
      ramp(E::maneuvering, 300.0, 300.0, "load_zone"),
      hold(E::maneuvering, 4.0),
      ramp(E::maneuvering, 0.0, 300.0),
      hold(E::standstill, 3.0),
      hold(E::standstill, 2.0, 150.0),  // lift while parked
      hold(E::standstill, 2.0),
      // transport to the shelf, lowering the fork on the move
      ramp(E::driving, 1200.0, 600.0, "shelf"),
      cruise(20000.0 - 3.0 * ramp_len(1200.0, 600.0)),
      hold(E::driving, 1.0, -100.0),
      ramp(E::driving, 0.0, 600.0),
      hold(E::standstill, 5.0),
      // storage maneuver
      ramp(E::maneuvering, 250.0, 250.0, "parking"),
      hold(E::maneuvering, 1.0),
      hold(E::maneuvering, 2.0, -100.0),
      ramp(E::maneuvering, 0.0, 250.0),
      hold(E::standstill, 4.0),
      // second diagonal sprint
      ramp(E::strong_acceleration, 2800.0, 2200.0, "diagonal_end"),
      cruise(10000.0 - ramp_len(2800.0, 2200.0) - ramp_len(2800.0, 2800.0)),
      ramp(E::harsh_braking, 0.0, 2800.0),
      hold(E::standstill, 5.0),
  };
  return s;
}

void validate(const MovementScript& script) { resolve(script); }

Movement gen_movement(const MovementScript& script, double rate, double noise_std, std::uint64_t seed) {
  if (!(rate > 0.0)) throw Error(ErrorCode::invalid_argument, "rate must be positive");
  if (noise_std < 0.0) throw Error(ErrorCode::invalid_argument, "noise std must be >= 0");
  const auto segs = resolve(script);
  const double total = segs.back().t_end();
  const std::size_t n = tick_of(total, rate);
  if (n < 2) throw Error(ErrorCode::invalid_argument, "movement script too short for the rate");
  const bool fork = script.fork_z0.has_value();

  Movement m;
  m.truth.resize(n);
  m.samples.resize(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_std > 0.0 ? noise_std : 1.0);
  std::size_t si = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / rate;
    while (si + 1 < segs.size() && t >= segs[si].t_end()) ++si;
    const auto& s = segs[si];
    const double tau = std::min(t - s.t_start, s.duration);
    const double d = s.progress(tau);
    const double v = s.speed(tau);
    auto& f = m.truth[k];
    f.t = t;
    f.x = s.p0.x + s.heading.x * d;
    f.y = s.p0.y + s.heading.y * d;
    f.z = script.z;
    f.vx = s.heading.x * v;
    f.vy = s.heading.y * v;
    f.speed = v;
    f.accel = s.a;
    if (fork) f.fork_v = s.fork_v;

    auto& p = m.samples[k];
    p.t = t;
    p.x = f.x;
    p.y = f.y;
    p.z = f.z;
    if (fork) p.fork_z = s.fork0 + s.fork_v * tau;
    if (noise_std > 0.0) {
      p.x += noise(rng);
      p.y += noise(rng);
      p.z += noise(rng);
      if (p.fork_z) *p.fork_z += noise(rng);
    }
  }

  // Reference events: merged runs of equal labels, and fork runs of equal sign.
  auto add_runs = [&](auto key_of, auto make) {
    std::size_t i = 0;
    while (i < segs.size()) {
      const auto key = key_of(segs[i]);
      std::size_t j = i;
      while (j + 1 < segs.size() && key_of(segs[j + 1]) == key) ++j;
      const std::size_t b = std::min(tick_of(segs[i].t_start, rate), n);
      const std::size_t e = std::min(tick_of(segs[j].t_end(), rate), n);
      if (e > b) make(key, b, e);
      i = j + 1;
    }
  };
  add_runs([](const Segment& s) { return s.label; },
           [&](EventType label, std::size_t b, std::size_t e) { m.reference.push(events::make_event(m.truth, label, b, e)); });
  if (fork) {
    add_runs([](const Segment& s) { return s.fork_v > 0.0 ? 1 : (s.fork_v < 0.0 ? -1 : 0); },
             [&](int sign, std::size_t b, std::size_t e) {
               if (sign == 0) return;
               m.reference.push(events::make_event(m.truth, EventType::fork_motion, b, e,
                                                   sign > 0 ? events::ForkDirection::lift : events::ForkDirection::lower));
             });
  }
  m.reference.sort();
  for (const auto& s : segs) m.path_length += s.progress(s.duration);
  return m;
}

double phase_distance(const MovementScript& script, std::span<const EventType> labels) {
  double total = 0.0;
  for (const auto& s : resolve(script)) {
    if (std::find(labels.begin(), labels.end(), s.label) != labels.end()) total += s.progress(s.duration);
  }
  return total;
}

const TypeQuality& DetectionQuality::of(EventType type) const {
  auto it = per_type.find(type);
  if (it == per_type.end()) throw Error(ErrorCode::not_found, "no quality entry for type");
  return it->second;
}

double DetectionQuality::median_abs_boundary_delta() const {
  std::vector<double> all;
  for (const auto& [type, q] : per_type) {
    for (double d : q.start_deltas) all.push_back(std::abs(d));
    for (double d : q.end_deltas) all.push_back(std::abs(d));
  }
  if (all.empty()) return 0.0;
  std::sort(all.begin(), all.end());
  const std::size_t mid = all.size() / 2;
  return all.size() % 2 ? all[mid] : 0.5 * (all[mid - 1] + all[mid]);
}

DetectionQuality evaluate_detection(const events::EventStack& detected, const events::EventStack& reference,
                                    double match_overlap) {
  if (!(match_overlap > 0.0 && match_overlap <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "match_overlap must lie in (0, 1]");
  }
  DetectionQuality out;
  for (auto type : events::kAllTypes) {
    const auto refs = reference.of_type(type);
    const auto dets = detected.of_type(type);
    TypeQuality q;
    q.reference = refs.size();
    q.detected = dets.size();
    std::vector<bool> used(dets.size(), false);
    for (const auto& r : refs) {
      for (std::size_t j = 0; j < dets.size(); ++j) {
        if (used[j] || dets[j].direction != r.direction) continue;
        const double inter = std::max(0.0, std::min(r.end_t, dets[j].end_t) - std::max(r.start_t, dets[j].start_t));
        if (inter / r.duration() + 1e-12 >= match_overlap) {
          used[j] = true;
          ++q.matched;
          q.start_deltas.push_back(dets[j].start_t - r.start_t);
          q.end_deltas.push_back(dets[j].end_t - r.end_t);
          break;
        }
      }
    }
    q.missed = q.reference - q.matched;
    q.spurious = q.detected - q.matched;
    q.recall_defined = q.reference > 0;
    q.precision_defined = q.detected > 0;
    q.recall = q.recall_defined ? static_cast<double>(q.matched) / static_cast<double>(q.reference) : 0.0;
    q.precision = q.precision_defined ? static_cast<double>(q.matched) / static_cast<double>(q.detected) : 0.0;
    out.per_type.emplace(type, std::move(q));
  }
  return out;
}

}  // namespace trucklens::synthlab
