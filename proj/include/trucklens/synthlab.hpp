#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trucklens/events.hpp"
#include "trucklens/filters.hpp"
#include "trucklens/ingest.hpp"
#include "trucklens/kinematics.hpp"

namespace trucklens::synthlab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Vec2&) const = default;
};

/// Fixed point used by the static generator (mm).
inline constexpr double kStaticX = 4000.0;
inline constexpr double kStaticY = 3000.0;
inline constexpr double kStaticZ = 2200.0;

/// Samples of a parked vehicle: round(duration*rate) fixes at k/rate with
/// independent Gaussian noise per axis.
std::vector<ingest::PositionSample> gen_static(double duration, double rate, double sensor_noise_std,
                                               std::uint64_t seed);

struct ManipulationSpec {
  double target_rate = 5.0;
  double scatter_std = 0.0;  // per axis, mm
  std::uint64_t seed = 1;
};

/// Median sampling rate of a sample list.
double estimate_rate(std::span<const ingest::PositionSample> samples);

/// Keeps every round(source/target)-th fix, then adds Gaussian scatter to
/// x, y and z.
std::vector<ingest::PositionSample> manipulate(std::span<const ingest::PositionSample> samples,
                                               const ManipulationSpec& spec);

struct SweepSpec {
  std::vector<double> rates{5.0, 10.0, 25.0, 50.0, 100.0};
  std::vector<double> scatters{0.0, 20.0, 100.0, 180.0, 200.0};
  std::vector<filters::FilterConfig> filters;  // empty = the three defaults
  std::uint64_t seed = 1;
  double duration = 60.0;
  double source_rate = 100.0;
  double rig_noise = 2.0;
  /// Chain resampling rate; nullopt runs each cell at its manipulated rate.
  std::optional<double> resample_rate;
};

/// Butterworth, FIR and Savitzky-Golay with their default parameters.
std::vector<filters::FilterConfig> default_sweep_filters();

struct SweepRow {
  double rate_hz = 0.0;
  double scatter_mm = 0.0;
  filters::FilterConfig filter;
  double mean_speed_mm_s = 0.0;
};

double mean_speed(std::span<const kinematics::KinematicFrame> frames);

/// gen_static -> manipulate -> process_chain -> mean speed for every
/// (rate, scatter, filter) cell. Cells run in parallel; row order is
/// rate-major, then scatter, then filter.
std::vector<SweepRow> run_static_sweep(const SweepSpec& spec);

/// `rate_hz,scatter_mm,filter,mean_speed_mm_s` table.
std::string sweep_csv(std::span<const SweepRow> rows);

/// One scripted motion segment. Either ramps to `speed_to` (using `accel` or
/// `duration`) or holds the current speed for `duration` / `distance`.
struct Phase {
  events::EventType label = events::EventType::standstill;
  std::optional<double> duration;
  std::optional<double> distance;
  std::optional<double> speed_to;
  std::optional<double> accel;  // magnitude, mm/s^2
  std::optional<std::string> toward;
  std::optional<double> heading_deg;
  double fork_v = 0.0;
};

struct MovementScript {
  std::map<std::string, Vec2> anchors;
  Vec2 start;
  double z = 2200.0;
  std::optional<double> fork_z0;  // enables the fork channel
  std::vector<Phase> phases;
};

/// Warehouse-style scenario: parking area, diagonal sprints with strong
/// acceleration and harsh braking, maneuvering at the load zone and shelf,
/// fork lifts while standing and while driving. Driving, braking and
/// acceleration phases cover 42 m in total.
MovementScript default_movement_script();

void validate(const MovementScript& script);

struct Movement {
  std::vector<ingest::PositionSample> samples;
  events::EventStack reference;
  std::vector<kinematics::KinematicFrame> truth;  // exact kinematics per tick
  double path_length = 0.0;                        // mm, whole script
};

Movement gen_movement(const MovementScript& script, double rate, double noise_std, std::uint64_t seed);

/// Ground-truth path length over phases with the given labels.
double phase_distance(const MovementScript& script, std::span<const events::EventType> labels);

struct TypeQuality {
  std::size_t reference = 0;
  std::size_t detected = 0;
  std::size_t matched = 0;
  std::size_t missed = 0;
  std::size_t spurious = 0;
  double recall = 0.0;
  double precision = 0.0;
  bool recall_defined = false;
  bool precision_defined = false;
  std::vector<double> start_deltas;  // detected - reference, s
  std::vector<double> end_deltas;
};

struct DetectionQuality {
  std::map<events::EventType, TypeQuality> per_type;

  const TypeQuality& of(events::EventType type) const;
  /// Median of |start delta| and |end delta| over all matched pairs.
  double median_abs_boundary_delta() const;
};

/// Greedy chronological one-to-one matching per type; a pair matches when
/// the intersection covers at least `match_overlap` of the reference event.
DetectionQuality evaluate_detection(const events::EventStack& detected, const events::EventStack& reference,
                                    double match_overlap = 0.5);

}  // namespace trucklens::synthlab
