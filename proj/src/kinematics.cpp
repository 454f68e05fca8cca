#include "trucklens/kinematics.hpp"

#include <cmath>

#include "trucklens/error.hpp"

namespace trucklens::kinematics {

using filters::FilterMode;

ChainConfig chain_defaults() {
  ChainConfig c;
  c.resample_rate = 100.0;
  for (auto* f : {&c.filter_pos, &c.filter_vel, &c.filter_acc}) {
    f->kind = filters::FilterKind::butterworth;
    f->cutoff_hz = 1.0;
    f->order = 1;
    f->mode = FilterMode::zero_phase;
  }
  c.max_gap = ingest::kDefaultMaxGap;
  return c;
}

ChainConfig with_filter(ChainConfig config, const filters::FilterConfig& filter) {
  config.filter_pos = filter;
  config.filter_vel = filter;
  config.filter_acc = filter;
  return config;
}

ChainConfig as_causal(ChainConfig config) {
  config.filter_pos.mode = FilterMode::causal;
  config.filter_vel.mode = FilterMode::causal;
  config.filter_acc.mode = FilterMode::causal;
  return config;
}

void validate(const ChainConfig& config) {
  if (!(config.resample_rate > 0.0)) throw Error(ErrorCode::invalid_argument, "resample_rate must be positive");
  if (!(config.max_gap > 0.0)) throw Error(ErrorCode::invalid_argument, "max_gap must be positive");
  filters::validate(config.filter_pos, config.resample_rate);
  filters::validate(config.filter_vel, config.resample_rate);
  filters::validate(config.filter_acc, config.resample_rate);
}

std::vector<KinematicFrame> process_series(const ingest::UniformSeries& series, const ChainConfig& config) {
  validate(config);
  if (series.rate != config.resample_rate) {
    throw Error(ErrorCode::invalid_argument, "series rate does not match the chain's resample_rate");
  }
  const double rate = config.resample_rate;
  const auto pos = filters::design(config.filter_pos, rate);
  const auto vel = filters::design(config.filter_vel, rate);
  const auto acc = filters::design(config.filter_acc, rate);

  // (2) smooth positions, (3) differentiate, (4) smooth velocities
  const auto xs = filters::apply(pos, series.channel("x"));
  const auto ys = filters::apply(pos, series.channel("y"));
  const auto zs = filters::apply(pos, series.channel("z"));
  const auto vx = filters::apply(vel, filters::differentiate(xs, rate));
  const auto vy = filters::apply(vel, filters::differentiate(ys, rate));
  std::optional<std::vector<double>> fork_v;
  if (series.has_channel("fork_z")) {
    const auto fz = filters::apply(pos, series.channel("fork_z"));
    fork_v = filters::apply(vel, filters::differentiate(fz, rate));
  }

  // (5) planar speed, (6) differentiate, (7) smooth
  std::vector<double> speed(vx.size());
  for (std::size_t k = 0; k < speed.size(); ++k) speed[k] = std::hypot(vx[k], vy[k]);
  const auto accel = filters::apply(acc, filters::differentiate(speed, rate));

  std::vector<KinematicFrame> frames(speed.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    auto& f = frames[k];
    f.t = series.time_at(k);
    f.x = xs[k];
    f.y = ys[k];
    f.z = zs[k];
    f.vx = vx[k];
    f.vy = vy[k];
    f.speed = speed[k];
    f.accel = accel[k];
    if (fork_v) f.fork_v = (*fork_v)[k];
  }
  for (const auto& g : series.gaps)
    for (std::size_t k = g.begin; k < g.end && k < frames.size(); ++k) frames[k].in_gap = true;
  return frames;
}

std::vector<KinematicFrame> process_chain(std::span<const ingest::PositionSample> samples, const ChainConfig& config) {
  validate(config);
  // (1) uniform linear resampling
  const auto series = ingest::resample(samples, config.resample_rate, config.max_gap);
  return process_series(series, config);
}

ChainLatency causal_latency(const ChainConfig& config) {
  const double rate = config.resample_rate;
  const auto c = as_causal(config);
  const double pos = filters::dc_group_delay(filters::design(c.filter_pos, rate));
  const double vel = filters::dc_group_delay(filters::design(c.filter_vel, rate));
  const double acc = filters::dc_group_delay(filters::design(c.filter_acc, rate));
  return {(pos + vel) / rate, (pos + vel + acc) / rate};
}

}  // namespace trucklens::kinematics
