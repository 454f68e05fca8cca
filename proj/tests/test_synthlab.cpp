#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "trucklens/error.hpp"
#include "trucklens/synthlab.hpp"

namespace {

using namespace trucklens;
using namespace trucklens::synthlab;
using events::EventType;

double stddev(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

TEST(Static, ZeroNoiseIsConstant) {
  auto s = gen_static(60.0, 100.0, 0.0, 1);
  ASSERT_EQ(s.size(), 6000u);
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_DOUBLE_EQ(s[k].t, static_cast<double>(k) / 100.0);
    EXPECT_EQ(s[k].x, kStaticX);
    EXPECT_EQ(s[k].y, kStaticY);
    EXPECT_EQ(s[k].z, kStaticZ);
  }
}

TEST(Static, NoiseLevelAndDeterminism) {
  auto s = gen_static(60.0, 100.0, 2.0, 9);
  std::vector<double> xs, ys;
  for (const auto& p : s) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  EXPECT_NEAR(stddev(xs), 2.0, 0.2);
  EXPECT_NEAR(stddev(ys), 2.0, 0.2);
  EXPECT_EQ(gen_static(60.0, 100.0, 2.0, 9), s);
  EXPECT_NE(gen_static(60.0, 100.0, 2.0, 10), s);
  EXPECT_THROW(gen_static(0.0, 100.0, 2.0, 1), Error);
  EXPECT_THROW(gen_static(10.0, 100.0, -1.0, 1), Error);
}

TEST(Manipulate, IdentityAtSourceRate) {
  auto s = gen_static(10.0, 100.0, 2.0, 3);
  EXPECT_EQ(manipulate(s, {100.0, 0.0, 1}), s);
  EXPECT_NEAR(estimate_rate(s), 100.0, 1e-9);
}

TEST(Manipulate, DecimationRatio) {
  auto s = gen_static(60.0, 100.0, 2.0, 3);
  auto m = manipulate(s, {5.0, 0.0, 1});
  ASSERT_EQ(m.size(), 300u);
  for (std::size_t k = 0; k < m.size(); ++k) EXPECT_EQ(m[k], s[20 * k]);
  EXPECT_NEAR(estimate_rate(m), 5.0, 1e-9);
  EXPECT_THROW(manipulate(s, {200.0, 0.0, 1}), Error);
  EXPECT_THROW(manipulate(s, {5.0, -1.0, 1}), Error);
}

TEST(Manipulate, ScatterLevel) {
  auto s = gen_static(60.0, 100.0, 0.0, 3);
  auto m = manipulate(s, {100.0, 200.0, 4});
  std::vector<double> dx, dy, dz;
  for (std::size_t k = 0; k < m.size(); ++k) {
    dx.push_back(m[k].x - s[k].x);
    dy.push_back(m[k].y - s[k].y);
    dz.push_back(m[k].z - s[k].z);
  }
  for (const auto* d : {&dx, &dy, &dz}) EXPECT_NEAR(stddev(*d), 200.0, 20.0);
}

class Sweep : public ::testing::Test {
 protected:
  static const std::vector<SweepRow>& rows() {
    static const auto r = run_static_sweep(SweepSpec{});
    return r;
  }
};

TEST_F(Sweep, ShapeAndOrder) {
  const auto& r = rows();
  ASSERT_EQ(r.size(), 75u);
  SweepSpec spec;
  auto filters = default_sweep_filters();
  std::size_t i = 0;
  for (double rate : spec.rates)
    for (double sc : spec.scatters)
      for (const auto& f : filters) {
        EXPECT_EQ(r[i].rate_hz, rate);
        EXPECT_EQ(r[i].scatter_mm, sc);
        EXPECT_EQ(r[i].filter, f);
        EXPECT_TRUE(std::isfinite(r[i].mean_speed_mm_s));
        EXPECT_GE(r[i].mean_speed_mm_s, 0.0);
        ++i;
      }
}

TEST_F(Sweep, CsvDeterministic) {
  const auto a = sweep_csv(rows());
  EXPECT_EQ(a, sweep_csv(run_static_sweep(SweepSpec{})));
  EXPECT_EQ(a.substr(0, a.find('\n')), "rate_hz,scatter_mm,filter,mean_speed_mm_s");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 76);
}

TEST_F(Sweep, MonotoneInScatter) {
  // per (rate, filter): mean speed should grow with scatter
  std::map<std::pair<double, std::string>, std::vector<double>> series;
  for (const auto& row : rows()) series[{row.rate_hz, std::string(filters::to_string(row.filter.kind))}].push_back(row.mean_speed_mm_s);
  std::size_t pairs = 0, inversions = 0;
  for (const auto& [key, v] : series) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      ++pairs;
      inversions += v[i] < v[i - 1];
    }
  }
  EXPECT_LE(inversions * 20, pairs);
}

TEST(SweepSpecCheck, RejectsBadSpec) {
  SweepSpec s;
  s.rates = {200.0};
  EXPECT_THROW(run_static_sweep(s), Error);
  s = SweepSpec{};
  s.scatters = {-1.0};
  EXPECT_THROW(run_static_sweep(s), Error);
}

MovementScript single_stop() {
  MovementScript s;
  s.start = {1000.0, 1000.0};
  auto ph = [](EventType l) {
    Phase p;
    p.label = l;
    return p;
  };
  Phase up = ph(EventType::driving);
  up.speed_to = 1000.0;
  up.accel = 500.0;
  up.heading_deg = 0.0;
  Phase cruise = ph(EventType::driving);
  cruise.duration = 3.0;
  Phase down = ph(EventType::driving);
  down.speed_to = 0.0;
  down.accel = 500.0;
  Phase stop = ph(EventType::standstill);
  stop.duration = 5.0;
  s.phases = {up, cruise, down, stop, up, cruise};
  return s;
}

TEST(Movement, SingleStopDetectedOnce) {
  auto m = gen_movement(single_stop(), 100.0, 3.0, 5);
  auto frames = kinematics::process_chain(m.samples, kinematics::chain_defaults());
  auto stack = events::detect_events(frames, events::default_limits());
  auto stops = stack.of_type(EventType::standstill);
  ASSERT_EQ(stops.size(), 1u);
  // stop spans t in [7, 12); braking tail below 100 mm/s adds up to 0.2 s on each side
  EXPECT_NEAR(stops[0].start_t, 7.0, 0.3);
  EXPECT_NEAR(stops[0].end_t, 12.0, 0.3);
  auto ref = m.reference.of_type(EventType::standstill);
  ASSERT_EQ(ref.size(), 1u);
  EXPECT_NEAR(ref[0].start_t, 7.0, 1e-9);
  EXPECT_NEAR(ref[0].end_t, 12.0, 1e-9);
}

TEST(Movement, BrakingProfile) {
  MovementScript s;
  Phase go;
  go.label = EventType::driving;
  go.speed_to = 3000.0;
  go.duration = 1.0;
  go.heading_deg = 90.0;
  Phase brake;
  brake.label = EventType::harsh_braking;
  brake.speed_to = 0.0;
  brake.accel = 2000.0;
  s.phases = {go, brake};
  auto m = gen_movement(s, 100.0, 0.0, 1);
  ASSERT_EQ(m.truth.size(), 250u);
  for (std::size_t k = 100; k < 250; ++k) {
    EXPECT_DOUBLE_EQ(m.truth[k].accel, -2000.0);
    EXPECT_NEAR(m.truth[k].speed, 3000.0 - 2000.0 * (m.truth[k].t - 1.0), 1e-9);
    EXPECT_NEAR(m.truth[k].vx, 0.0, 1e-9);
  }
  EXPECT_NEAR(m.path_length, 1500.0 + 2250.0, 1e-9);
}

TEST(Movement, ReferenceExclusiveAndCovering) {
  auto m = gen_movement(default_movement_script(), 100.0, 0.0, 1);
  std::vector<events::MotionEvent> excl;
  for (const auto& e : m.reference.all())
    if (events::is_exclusive(e.type)) excl.push_back(e);
  ASSERT_FALSE(excl.empty());
  EXPECT_EQ(excl.front().start_idx, 0u);
  EXPECT_EQ(excl.back().end_idx, m.truth.size());
  for (std::size_t i = 1; i < excl.size(); ++i) {
    EXPECT_EQ(excl[i].start_idx, excl[i - 1].end_idx);
    EXPECT_NE(excl[i].type, excl[i - 1].type);
  }
  EXPECT_FALSE(m.reference.of_type(EventType::fork_motion).empty());
}

TEST(Movement, Deterministic) {
  auto a = gen_movement(default_movement_script(), 100.0, 5.0, 77);
  auto b = gen_movement(default_movement_script(), 100.0, 5.0, 77);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.reference, b.reference);
}

TEST(Movement, ScenarioTravelDistance) {
  const std::array travel{EventType::driving, EventType::harsh_braking, EventType::strong_acceleration};
  EXPECT_NEAR(phase_distance(default_movement_script(), travel), 42000.0, 1e-6);
}

TEST(Movement, InvalidScripts) {
  MovementScript s;
  EXPECT_THROW(validate(s), Error);
  Phase p;
  p.label = EventType::driving;
  p.toward = "nowhere";
  p.speed_to = 100.0;
  p.duration = 1.0;
  s.phases = {p};
  EXPECT_THROW(validate(s), Error);
  p.toward.reset();
  p.speed_to = -5.0;
  s.phases = {p};
  EXPECT_THROW(validate(s), Error);
}

TEST(Evaluate, IdenticalStacks) {
  auto m = gen_movement(default_movement_script(), 100.0, 0.0, 1);
  auto q = evaluate_detection(m.reference, m.reference);
  for (const auto& [type, tq] : q.per_type) {
    EXPECT_EQ(tq.matched, tq.reference);
    EXPECT_EQ(tq.spurious, 0u);
    if (tq.recall_defined) {
      EXPECT_EQ(tq.recall, 1.0);
    }
  }
  EXPECT_EQ(q.median_abs_boundary_delta(), 0.0);
}

TEST(Evaluate, EmptyDetection) {
  auto m = gen_movement(default_movement_script(), 100.0, 0.0, 1);
  auto q = evaluate_detection(events::EventStack{}, m.reference);
  const auto& st = q.of(EventType::standstill);
  EXPECT_TRUE(st.recall_defined);
  EXPECT_EQ(st.recall, 0.0);
  EXPECT_EQ(st.missed, st.reference);
  EXPECT_FALSE(st.precision_defined);
}

TEST(Evaluate, OverlapRule) {
  auto ev = [](double a, double b) {
    events::MotionEvent e;
    e.type = EventType::standstill;
    e.start_t = a;
    e.end_t = b;
    return e;
  };
  events::EventStack ref({ev(0.0, 10.0)});
  EXPECT_EQ(evaluate_detection(events::EventStack({ev(5.0, 20.0)}), ref).of(EventType::standstill).matched, 1u);
  EXPECT_EQ(evaluate_detection(events::EventStack({ev(5.1, 20.0)}), ref).of(EventType::standstill).matched, 0u);
  // one-to-one: a second detection over the same reference is spurious
  auto q = evaluate_detection(events::EventStack({ev(0.0, 6.0), ev(6.0, 10.0)}), ref).of(EventType::standstill);
  EXPECT_EQ(q.matched, 1u);
  EXPECT_EQ(q.spurious, 1u);
}

TEST(Evaluate, ScenarioZeroNoise) {
  auto m = gen_movement(default_movement_script(), 100.0, 0.0, 1);
  auto frames = kinematics::process_chain(m.samples, kinematics::chain_defaults());
  auto q = evaluate_detection(events::detect_events(frames, events::default_limits()), m.reference);
  for (auto t : {EventType::standstill, EventType::harsh_braking, EventType::strong_acceleration})
    EXPECT_EQ(q.of(t).recall, 1.0) << events::to_string(t);
  EXPECT_LE(q.median_abs_boundary_delta(), 0.5);
}

}  // namespace
