#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "trucklens/filters.hpp"
#include "trucklens/ingest.hpp"

namespace trucklens::kinematics {

/// One resampled tick. Positions in mm, velocities in mm/s, accel in mm/s^2.
struct KinematicFrame {
  double t = 0.0;
  double x = 0.0, y = 0.0, z = 0.0;
  double vx = 0.0, vy = 0.0;
  double speed = 0.0;  // planar magnitude of (vx, vy)
  double accel = 0.0;  // signed derivative of speed
  std::optional<double> fork_v;
  bool in_gap = false;

  bool operator==(const KinematicFrame&) const = default;
};

/// Seven-step chain parameters: filter_pos after resampling, filter_vel after
/// the first differentiation, filter_acc after differentiating speed.
struct ChainConfig {
  double resample_rate = 100.0;
  filters::FilterConfig filter_pos;
  filters::FilterConfig filter_vel;
  filters::FilterConfig filter_acc;
  double max_gap = ingest::kDefaultMaxGap;

  bool operator==(const ChainConfig&) const = default;
};

ChainConfig chain_defaults();

/// Same chain with every stage switched to `kind`, keeping its defaults.
ChainConfig with_filter(ChainConfig config, const filters::FilterConfig& filter);

void validate(const ChainConfig& config);

/// resample -> filter positions -> differentiate -> filter velocities ->
/// planar speed -> differentiate speed -> filter accel.
std::vector<KinematicFrame> process_chain(std::span<const ingest::PositionSample> samples, const ChainConfig& config);

/// Runs the chain on an already resampled series.
std::vector<KinematicFrame> process_series(const ingest::UniformSeries& series, const ChainConfig& config);

/// Inherent delay of the causal chain at DC, in seconds.
struct ChainLatency {
  double speed_s = 0.0;
  double accel_s = 0.0;
};

ChainLatency causal_latency(const ChainConfig& config);

/// Config with every stage forced to causal mode.
ChainConfig as_causal(ChainConfig config);

/// Incremental differentiator matching filters::differentiate exactly:
/// derivatives come out in order, one tick behind the input.
class StreamingDifferentiator {
 public:
  explicit StreamingDifferentiator(double rate) : rate_(rate) {}

  /// Feeds a value, appending any derivatives that became available.
  void push(double v, std::vector<double>& out);
  /// Emits the trailing one-sided derivative.
  void flush(std::vector<double>& out);

 private:
  double rate_;
  std::size_t count_ = 0;
  double w0_ = 0.0, w1_ = 0.0, w2_ = 0.0;  // last three inputs, w2_ newest
};

/// Causal, incremental version of the chain for live sessions. Every stage
/// runs in causal mode; frames are emitted once their accel is known and are
/// identical to process_chain(as_causal(config)) on the same samples.
class StreamingChain {
 public:
  using FrameSink = std::function<void(const KinematicFrame&)>;

  StreamingChain(const ChainConfig& config, FrameSink sink);

  void push(const ingest::PositionSample& sample);
  /// Flushes the trailing frames; no further pushes are accepted.
  void finalize();

  std::size_t emitted() const { return emitted_; }
  ChainLatency latency() const { return latency_; }

 private:
  struct Pending {
    KinematicFrame frame;
    bool has_fork = false;
  };

  void on_tick(double t, double x, double y, double z, std::optional<double> fork_z, bool gap);
  void drain_velocity(const std::vector<double>& dx, const std::vector<double>& dy, const std::vector<double>& dfork);
  void drain_accel(const std::vector<double>& da);

  ChainConfig config_;
  FrameSink sink_;
  ChainLatency latency_;

  std::optional<ingest::PositionSample> prev_;
  double t0_ = 0.0;
  std::size_t next_tick_ = 0;
  bool finalized_ = false;

  filters::CausalFilter fx_, fy_, fz_, ffork_;
  filters::CausalFilter fvx_, fvy_, fvfork_;
  filters::CausalFilter facc_;
  StreamingDifferentiator dx_, dy_, dfork_, dspeed_;

  std::deque<Pending> pending_;
  std::size_t vel_ready_ = 0;  // pending frames (from the front) with velocity set
  std::size_t emitted_ = 0;
};

}  // namespace trucklens::kinematics
