#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trucklens::ingest {

/// One timestamped position fix. Seconds and millimeters.
struct PositionSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  std::string source_id;
  std::optional<double> fork_z;

  bool operator==(const PositionSample&) const = default;
};

enum class LogFormat { csv, jsonl };

/// Picks the format from a file extension (".csv" or ".jsonl"/".ndjson").
LogFormat format_from_path(std::string_view path);

/// Decodes a recorded log. Samples come back grouped by source (first
/// appearance order) and sorted by time; duplicate timestamps within a source
/// keep the last row. Throws ParseError naming the offending line.
std::vector<PositionSample> parse_log(std::string_view bytes, LogFormat format);

/// Decodes one JSONL record. `line_no` is only used for error messages.
PositionSample parse_record(std::string_view line, std::size_t line_no = 0);

/// Serializes samples back into the CSV or JSONL log format.
std::string write_log(std::span<const PositionSample> samples, LogFormat format);

/// Half-open frame index range.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const IndexRange&) const = default;
};

inline constexpr double kDefaultMaxGap = 1.0;

/// Uniformly sampled channels ("x", "y", "z" and optionally "fork_z").
struct UniformSeries {
  double t0 = 0.0;
  double rate = 0.0;
  std::map<std::string, std::vector<double>, std::less<>> channels;
  std::vector<IndexRange> gaps;

  std::size_t size() const;
  double time_at(std::size_t k) const { return t0 + static_cast<double>(k) / rate; }
  bool has_channel(std::string_view name) const;
  const std::vector<double>& channel(std::string_view name) const;
  bool in_gap(std::size_t k) const;
};

/// Number of grid ticks covering [t_first, t_last] at `rate`.
std::size_t grid_count(double t_first, double t_last, double rate);

/// Linear interpolation of one coordinate between two fixes. Exact at both
/// endpoints so the batch and streaming resamplers agree bit for bit.
double interpolate(double ta, double va, double tb, double vb, double t);

/// Linearly resamples a single-source sample list onto [t_first, t_last].
/// Intervals longer than `max_gap` are still bridged but recorded in `gaps`.
UniformSeries resample(std::span<const PositionSample> samples, double rate,
                       double max_gap = kDefaultMaxGap);

/// Expands a uniform series back into samples (one per tick).
std::vector<PositionSample> to_samples(const UniformSeries& series, const std::string& source_id = {});

/// Splits a parsed log into per-source sample lists, preserving order.
std::vector<std::vector<PositionSample>> split_by_source(std::span<const PositionSample> samples);

enum class RecordStatus { accepted, out_of_order, malformed };

struct IngestCounters {
  std::size_t accepted = 0;
  std::size_t dropped_out_of_order = 0;
  std::size_t malformed = 0;
};

/// Single-writer live ingestion buffer. Readers take immutable snapshots.
class LiveIngest {
 public:
  using Sink = std::function<void(const PositionSample&)>;

  explicit LiveIngest(Sink sink = {});

  RecordStatus push_line(std::string_view line);
  RecordStatus push(PositionSample sample);
  void finalize();

  bool finalized() const;
  IngestCounters counters() const;
  std::size_t size() const;
  std::vector<PositionSample> snapshot() const;

 private:
  Sink sink_;
  mutable std::mutex mutex_;
  std::vector<PositionSample> buffer_;
  std::map<std::string, double, std::less<>> last_t_;
  IngestCounters counters_;
  bool finalized_ = false;
};

/// Reads JSONL records until end of stream, then finalizes the session.
std::unique_ptr<LiveIngest> live_ingest(std::istream& stream, LiveIngest::Sink sink = {});

}  // namespace trucklens::ingest
