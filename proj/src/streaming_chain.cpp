#include <cmath>

#include "trucklens/error.hpp"
#include "trucklens/kinematics.hpp"

namespace trucklens::kinematics {

void StreamingDifferentiator::push(double v, std::vector<double>& out) {
  ++count_;
  w0_ = w1_;
  w1_ = w2_;
  w2_ = v;
  const double h = rate_ / 2.0;
  if (count_ == 3) {
    out.push_back((-3.0 * w0_ + 4.0 * w1_ - w2_) * h);
    out.push_back((w2_ - w0_) * h);
  } else if (count_ > 3) {
    out.push_back((w2_ - w0_) * h);
  }
}

void StreamingDifferentiator::flush(std::vector<double>& out) {
  if (count_ >= 3) out.push_back((3.0 * w2_ - 4.0 * w1_ + w0_) * (rate_ / 2.0));
}

namespace {

filters::FilterCoefficients causal_design(const filters::FilterConfig& f, double rate) {
  auto c = f;
  c.mode = filters::FilterMode::causal;
  return filters::design(c, rate);
}

}  // namespace

StreamingChain::StreamingChain(const ChainConfig& config, FrameSink sink)
    : config_(as_causal(config)),
      sink_(std::move(sink)),
      latency_(causal_latency(config)),
      fx_(causal_design(config.filter_pos, config.resample_rate)),
      fy_(causal_design(config.filter_pos, config.resample_rate)),
      fz_(causal_design(config.filter_pos, config.resample_rate)),
      ffork_(causal_design(config.filter_pos, config.resample_rate)),
      fvx_(causal_design(config.filter_vel, config.resample_rate)),
      fvy_(causal_design(config.filter_vel, config.resample_rate)),
      fvfork_(causal_design(config.filter_vel, config.resample_rate)),
      facc_(causal_design(config.filter_acc, config.resample_rate)),
      dx_(config.resample_rate),
      dy_(config.resample_rate),
      dfork_(config.resample_rate),
      dspeed_(config.resample_rate) {
  validate(config_);
}

void StreamingChain::push(const ingest::PositionSample& sample) {
  if (finalized_) throw Error(ErrorCode::state, "streaming chain already finalized");
  const double rate = config_.resample_rate;
  if (!prev_) {
    t0_ = sample.t;
    prev_ = sample;
    on_tick(sample.t, sample.x, sample.y, sample.z, sample.fork_z, false);
    next_tick_ = 1;
    return;
  }
  const auto& a = *prev_;
  if (!(sample.t > a.t)) return;
  std::optional<double> fork = sample.fork_z ? sample.fork_z : a.fork_z;
  for (;;) {
    const double t = t0_ + static_cast<double>(next_tick_) / rate;
    if (t > sample.t) break;
    const bool gap = (sample.t - a.t) > config_.max_gap && t > a.t && t < sample.t;
    std::optional<double> fz;
    if (a.fork_z && fork) fz = ingest::interpolate(a.t, *a.fork_z, sample.t, *fork, t);
    on_tick(t, ingest::interpolate(a.t, a.x, sample.t, sample.x, t), ingest::interpolate(a.t, a.y, sample.t, sample.y, t),
            ingest::interpolate(a.t, a.z, sample.t, sample.z, t), fz, gap);
    ++next_tick_;
  }
  prev_ = sample;
  if (fork) prev_->fork_z = fork;
}

void StreamingChain::finalize() {
  if (finalized_) return;
  finalized_ = true;
  if (!prev_) return;
  // Ticks within rounding tolerance past the last fix, as in the batch grid.
  const std::size_t total = ingest::grid_count(t0_, prev_->t, config_.resample_rate);
  for (; next_tick_ < total; ++next_tick_) {
    const double t = t0_ + static_cast<double>(next_tick_) / config_.resample_rate;
    on_tick(t, prev_->x, prev_->y, prev_->z, prev_->fork_z, false);
  }
  std::vector<double> ox, oy, of;
  dx_.flush(ox);
  dy_.flush(oy);
  if (prev_->fork_z) dfork_.flush(of);
  drain_velocity(ox, oy, of);
  std::vector<double> oa;
  dspeed_.flush(oa);
  drain_accel(oa);
}

void StreamingChain::on_tick(double t, double x, double y, double z, std::optional<double> fork_z, bool gap) {
  Pending p;
  p.frame.t = t;
  p.frame.x = fx_.step(x);
  p.frame.y = fy_.step(y);
  p.frame.z = fz_.step(z);
  p.frame.in_gap = gap;
  std::vector<double> ox, oy, of;
  dx_.push(p.frame.x, ox);
  dy_.push(p.frame.y, oy);
  if (fork_z) {
    p.has_fork = true;
    dfork_.push(ffork_.step(*fork_z), of);
  }
  pending_.push_back(p);
  drain_velocity(ox, oy, of);
}

void StreamingChain::drain_velocity(const std::vector<double>& dx, const std::vector<double>& dy,
                                    const std::vector<double>& dfork) {
  std::vector<double> da;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    auto& f = pending_[vel_ready_].frame;
    f.vx = fvx_.step(dx[i]);
    f.vy = fvy_.step(dy[i]);
    if (i < dfork.size()) f.fork_v = fvfork_.step(dfork[i]);
    f.speed = std::hypot(f.vx, f.vy);
    dspeed_.push(f.speed, da);
    ++vel_ready_;
  }
  drain_accel(da);
}

void StreamingChain::drain_accel(const std::vector<double>& da) {
  for (double a : da) {
    auto frame = pending_.front().frame;
    frame.accel = facc_.step(a);
    pending_.pop_front();
    --vel_ready_;
    ++emitted_;
    if (sink_) sink_(frame);
  }
}

}  // namespace trucklens::kinematics
