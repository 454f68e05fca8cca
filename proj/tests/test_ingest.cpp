#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "trucklens/error.hpp"
#include "trucklens/ingest.hpp"
#include "trucklens/synthlab.hpp"

namespace {

using namespace trucklens;
using namespace trucklens::ingest;

TEST(ParseLog, CsvTwoSamples) {
  auto s = parse_log("t,x,y,z\n0.0,0,0,0\n0.01,1,0,0", LogFormat::csv);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s[1].t - s[0].t, 0.01);
  EXPECT_DOUBLE_EQ(s[1].x, 1.0);
  EXPECT_FALSE(s[0].fork_z);
}

TEST(ParseLog, NanRowNamesLine) {
  try {
    parse_log("t,x,y,z\n0,0,0,0\n0.01,NaN,0,0\n", LogFormat::csv);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(ParseLog, EmptyInputIsError) {
  EXPECT_THROW(parse_log("", LogFormat::csv), Error);
  EXPECT_THROW(parse_log("t,x,y,z\n", LogFormat::csv), Error);
  EXPECT_THROW(parse_log("\n\n", LogFormat::jsonl), Error);
}

TEST(ParseLog, MalformedRows) {
  EXPECT_THROW(parse_log("t,x,y,z\n0,1,2\n", LogFormat::csv), ParseError);
  EXPECT_THROW(parse_log("t,x,y,z\n0,1,2,abc\n", LogFormat::csv), ParseError);
  EXPECT_THROW(parse_log("t,x,y\n0,1,2\n", LogFormat::csv), ParseError);
  EXPECT_THROW(parse_log("{\"t\":0,\"x\":1}\n", LogFormat::jsonl), ParseError);
  EXPECT_THROW(parse_log("{\"t\":0,\"x\":1,\"y\":2,\"z\":\"a\"}\n", LogFormat::jsonl), ParseError);
}

TEST(ParseLog, GroupsBySourceSortsAndCollapsesDuplicates) {
  const char* text =
      "{\"t\":1,\"x\":1,\"y\":0,\"z\":0,\"id\":\"b\"}\n"
      "{\"t\":0.5,\"x\":2,\"y\":0,\"z\":0,\"id\":\"a\"}\n"
      "{\"t\":0,\"x\":3,\"y\":0,\"z\":0,\"id\":\"b\"}\n"
      "{\"t\":1,\"x\":4,\"y\":0,\"z\":0,\"id\":\"b\"}\n";
  auto s = parse_log(text, LogFormat::jsonl);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].source_id, "b");
  EXPECT_DOUBLE_EQ(s[0].t, 0.0);
  EXPECT_DOUBLE_EQ(s[1].t, 1.0);
  EXPECT_DOUBLE_EQ(s[1].x, 4.0);  // last writer wins
  EXPECT_EQ(s[2].source_id, "a");
  EXPECT_EQ(split_by_source(s).size(), 2u);
}

TEST(ParseLog, ForkColumn) {
  auto s = parse_log("t,x,y,z,fork_z\n0,0,0,0,100\n1,0,0,0,150\n", LogFormat::csv);
  ASSERT_TRUE(s[1].fork_z);
  EXPECT_DOUBLE_EQ(*s[1].fork_z, 150.0);
}

TEST(ParseLog, SynthRoundTrip) {
  auto gen = synthlab::gen_static(60.0, 100.0, 2.0, 9);
  for (auto fmt : {LogFormat::csv, LogFormat::jsonl}) {
    auto s = parse_log(write_log(gen, fmt), fmt);
    ASSERT_EQ(s.size(), 6000u);
    EXPECT_NEAR(s.back().t - s.front().t, 59.99, 1e-9);
    EXPECT_EQ(s, gen);
  }
}

TEST(Resample, IdentityOnGrid) {
  std::vector<PositionSample> in;
  for (int k = 0; k < 50; ++k) in.push_back({k / 10.0, std::sin(k * 0.3) * 100, k * 2.0, 7.0, "", std::nullopt});
  auto s = resample(in, 10.0);
  ASSERT_EQ(s.size(), 50u);
  for (std::size_t k = 0; k < 50; ++k) {
    EXPECT_DOUBLE_EQ(s.channel("x")[k], in[k].x);
    EXPECT_DOUBLE_EQ(s.channel("y")[k], in[k].y);
  }
  EXPECT_TRUE(s.gaps.empty());
}

TEST(Resample, TwoPointLine) {
  std::vector<PositionSample> in{{0, 0, 0, 0, "", {}}, {1, 1000, 0, 0, "", {}}};
  auto s = resample(in, 10.0);
  ASSERT_EQ(s.size(), 11u);
  for (std::size_t k = 0; k < 11; ++k) EXPECT_NEAR(s.channel("x")[k], 100.0 * k, 1e-9);
  // 1 s interval is not > max_gap 1 s
  EXPECT_TRUE(s.gaps.empty());
}

TEST(Resample, UpsampleRatio) {
  auto in = synthlab::manipulate(synthlab::gen_static(10.0, 100.0, 0.0, 1), {5.0, 0.0, 1});
  auto s = resample(in, 100.0);
  // index arithmetic oracle: (n-1) intervals of 20 ticks plus the first tick
  const std::size_t expected = (in.size() - 1) * 20 + 1;
  EXPECT_LE(std::abs(static_cast<long>(s.size()) - static_cast<long>(expected)), 1);
  EXPECT_NEAR(static_cast<double>(s.size()) / in.size(), 20.0, 20.0 / in.size() + 1e-9);
}

TEST(Resample, Idempotent) {
  std::vector<PositionSample> in;
  for (int k = 0; k < 40; ++k) in.push_back({k * 0.137, k * k * 1.5, -k * 3.0, 1.0, "", std::nullopt});
  auto once = resample(in, 25.0);
  auto twice = resample(to_samples(once), 25.0);
  ASSERT_EQ(once.size(), twice.size());
  for (const char* ch : {"x", "y", "z"}) EXPECT_EQ(once.channel(ch), twice.channel(ch)) << ch;
}

TEST(Resample, LinearMotionStaysOnLine) {
  std::vector<PositionSample> in;
  double t = 0.0;
  for (int k = 0; k < 100; ++k) {
    in.push_back({t, 3.0 + 250.0 * t, -40.0 * t, 0.0, "", std::nullopt});
    t += 0.03 + 0.02 * ((k * 7) % 5) / 5.0;
  }
  auto s = resample(in, 100.0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double tk = s.time_at(k);
    EXPECT_NEAR(s.channel("x")[k], 3.0 + 250.0 * tk, 1e-9 * (1.0 + 250.0 * tk));
    EXPECT_NEAR(s.channel("y")[k], -40.0 * tk, 1e-9 * (1.0 + 40.0 * tk));
  }
}

TEST(Resample, GapsAreFlagged) {
  std::vector<PositionSample> in{{0, 0, 0, 0, "", {}}, {0.5, 5, 0, 0, "", {}}, {3.0, 30, 0, 0, "", {}},
                                 {3.5, 35, 0, 0, "", {}}};
  auto s = resample(in, 10.0);
  ASSERT_EQ(s.gaps.size(), 1u);
  // ticks strictly inside (0.5, 3.0)
  EXPECT_EQ(s.gaps[0].begin, 6u);
  EXPECT_EQ(s.gaps[0].end, 30u);
  EXPECT_FALSE(s.in_gap(5));
  EXPECT_TRUE(s.in_gap(6));
  EXPECT_FALSE(s.in_gap(30));
  EXPECT_NEAR(s.channel("x")[20], 20.0, 1e-9);  // still bridged
}

TEST(Resample, Errors) {
  std::vector<PositionSample> one{{0, 0, 0, 0, "", {}}};
  EXPECT_THROW(resample(one, 10.0), Error);
  std::vector<PositionSample> two{{0, 0, 0, 0, "", {}}, {1, 0, 0, 0, "", {}}};
  EXPECT_THROW(resample(two, 0.0), Error);
  std::vector<PositionSample> flat{{1, 0, 0, 0, "", {}}, {1, 0, 0, 0, "", {}}};
  EXPECT_THROW(resample(flat, 10.0), Error);
}

TEST(LiveIngest, InOrderRecords) {
  int notified = 0;
  LiveIngest live([&](const PositionSample&) { ++notified; });
  EXPECT_EQ(live.push_line(R"({"t":0,"x":0,"y":0,"z":0})"), RecordStatus::accepted);
  EXPECT_EQ(live.push_line(R"({"t":0.1,"x":1,"y":0,"z":0})"), RecordStatus::accepted);
  EXPECT_EQ(live.push_line(R"({"t":0.2,"x":2,"y":0,"z":0})"), RecordStatus::accepted);
  EXPECT_EQ(notified, 3);
  EXPECT_EQ(live.counters().dropped_out_of_order, 0u);
}

TEST(LiveIngest, OutOfOrderDropped) {
  LiveIngest live;
  live.push_line(R"({"t":1,"x":0,"y":0,"z":0})");
  EXPECT_EQ(live.push_line(R"({"t":0.5,"x":0,"y":0,"z":0})"), RecordStatus::out_of_order);
  EXPECT_EQ(live.counters().dropped_out_of_order, 1u);
  EXPECT_EQ(live.size(), 1u);
}

TEST(LiveIngest, MalformedCountedAndSkipped) {
  std::istringstream in("{\"t\":0,\"x\":0,\"y\":0,\"z\":0}\nnot json\n{\"t\":1,\"x\":0,\"y\":0,\"z\":0}\n");
  auto live = live_ingest(in);
  EXPECT_EQ(live->counters().malformed, 1u);
  EXPECT_EQ(live->size(), 2u);
  EXPECT_TRUE(live->finalized());
  EXPECT_THROW(live->push_line(R"({"t":2,"x":0,"y":0,"z":0})"), Error);
}

TEST(LiveIngest, ReplayEqualsBatchParse) {
  auto m = synthlab::gen_movement(synthlab::default_movement_script(), 20.0, 3.0, 4);
  m.samples.resize(1000);
  const std::string bytes = write_log(m.samples, LogFormat::jsonl);
  std::istringstream in(bytes);
  auto live = live_ingest(in);
  EXPECT_EQ(live->snapshot(), parse_log(bytes, LogFormat::jsonl));
  EXPECT_EQ(live->counters().accepted, 1000u);
}

}  // namespace
