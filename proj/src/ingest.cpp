#include "trucklens/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include <json.hpp>

#include "trucklens/error.hpp"

namespace trucklens::ingest {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(s.substr(start)));
      return out;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

template <typename F>
void for_each_line(std::string_view bytes, F&& f) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= bytes.size()) {
    auto pos = bytes.find('\n', start);
    auto line = bytes.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    ++line_no;
    f(line, line_no);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
}

double parse_number(std::string_view cell, std::string_view column, std::size_t line_no) {
  double value = 0.0;
  auto first = cell.data();
  auto last = cell.data() + cell.size();
  if (!cell.empty() && cell.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || cell.empty()) {
    throw ParseError(line_no, "malformed value '" + std::string(cell) + "' in column " + std::string(column));
  }
  if (!std::isfinite(value)) {
    throw ParseError(line_no, "non-finite value in column " + std::string(column));
  }
  return value;
}

double json_number(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line_no, std::string("missing key '") + key + "'");
  if (!it->is_number()) throw ParseError(line_no, std::string("key '") + key + "' is not a number");
  double v = it->get<double>();
  if (!std::isfinite(v)) throw ParseError(line_no, std::string("non-finite value for '") + key + "'");
  return v;
}

void validate_finite(const PositionSample& s, std::size_t line_no) {
  if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z) ||
      (s.fork_z && !std::isfinite(*s.fork_z))) {
    throw ParseError(line_no, "non-finite coordinate");
  }
}

std::vector<PositionSample> parse_csv(std::string_view bytes) {
  std::vector<PositionSample> out;
  std::vector<std::string> header;
  int col_t = -1, col_x = -1, col_y = -1, col_z = -1, col_fork = -1, col_id = -1;
  for_each_line(bytes, [&](std::string_view raw, std::size_t line_no) {
    auto line = trim(raw);
    if (line.empty()) return;
    auto cells = split(line, ',');
    if (header.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        std::string name(cells[i]);
        header.push_back(name);
        int idx = static_cast<int>(i);
        if (name == "t") col_t = idx;
        else if (name == "x") col_x = idx;
        else if (name == "y") col_y = idx;
        else if (name == "z") col_z = idx;
        else if (name == "fork_z") col_fork = idx;
        else if (name == "id") col_id = idx;
        else throw ParseError(line_no, "unknown column '" + name + "'");
      }
      if (col_t < 0 || col_x < 0 || col_y < 0 || col_z < 0) {
        throw ParseError(line_no, "header must contain t,x,y,z");
      }
      return;
    }
    if (cells.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(cells.size()));
    }
    PositionSample s;
    s.t = parse_number(cells[col_t], "t", line_no);
    s.x = parse_number(cells[col_x], "x", line_no);
    s.y = parse_number(cells[col_y], "y", line_no);
    s.z = parse_number(cells[col_z], "z", line_no);
    if (col_fork >= 0 && !cells[col_fork].empty()) s.fork_z = parse_number(cells[col_fork], "fork_z", line_no);
    if (col_id >= 0) s.source_id = std::string(cells[col_id]);
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<PositionSample> parse_jsonl(std::string_view bytes) {
  std::vector<PositionSample> out;
  for_each_line(bytes, [&](std::string_view raw, std::size_t line_no) {
    if (trim(raw).empty()) return;
    out.push_back(parse_record(raw, line_no));
  });
  return out;
}

// Groups by source in first-appearance order, sorts by t, last duplicate wins.
std::vector<PositionSample> normalize(std::vector<PositionSample> samples) {
  std::map<std::string, std::size_t, std::less<>> source_rank;
  for (const auto& s : samples) source_rank.try_emplace(s.source_id, source_rank.size());
  std::stable_sort(samples.begin(), samples.end(), [&](const PositionSample& a, const PositionSample& b) {
    auto ra = source_rank.find(a.source_id)->second;
    auto rb = source_rank.find(b.source_id)->second;
    if (ra != rb) return ra < rb;
    return a.t < b.t;
  });
  std::vector<PositionSample> out;
  out.reserve(samples.size());
  for (auto& s : samples) {
    if (!out.empty() && out.back().source_id == s.source_id && out.back().t == s.t) {
      out.back() = std::move(s);
    } else {
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

LogFormat format_from_path(std::string_view path) {
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() && path.substr(path.size() - suffix.size()) == suffix;
  };
  if (ends_with(".csv")) return LogFormat::csv;
  if (ends_with(".jsonl") || ends_with(".ndjson")) return LogFormat::jsonl;
  throw Error(ErrorCode::invalid_argument, "cannot infer log format from '" + std::string(path) + "'");
}

PositionSample parse_record(std::string_view line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line_no, "record is not a JSON object");
  PositionSample s;
  s.t = json_number(obj, "t", line_no);
  s.x = json_number(obj, "x", line_no);
  s.y = json_number(obj, "y", line_no);
  s.z = json_number(obj, "z", line_no);
  if (auto it = obj.find("fork_z"); it != obj.end() && !it->is_null()) s.fork_z = json_number(obj, "fork_z", line_no);
  if (auto it = obj.find("id"); it != obj.end()) {
    if (it->is_string()) s.source_id = it->get<std::string>();
    else if (it->is_number_integer()) s.source_id = std::to_string(it->get<long long>());
    else throw ParseError(line_no, "key 'id' must be a string or integer");
  }
  validate_finite(s, line_no);
  return s;
}

std::vector<PositionSample> parse_log(std::string_view bytes, LogFormat format) {
  auto samples = format == LogFormat::csv ? parse_csv(bytes) : parse_jsonl(bytes);
  if (samples.empty()) throw ParseError(0, "log contains no samples");
  return normalize(std::move(samples));
}

std::string write_log(std::span<const PositionSample> samples, LogFormat format) {
  bool fork = std::any_of(samples.begin(), samples.end(), [](const auto& s) { return s.fork_z.has_value(); });
  bool ids = std::any_of(samples.begin(), samples.end(), [](const auto& s) { return !s.source_id.empty(); });
  std::string out;
  if (format == LogFormat::csv) {
    out = "t,x,y,z";
    if (fork) out += ",fork_z";
    if (ids) out += ",id";
    out += '\n';
    for (const auto& s : samples) {
      out += format_double(s.t) + ',' + format_double(s.x) + ',' + format_double(s.y) + ',' + format_double(s.z);
      if (fork) out += ',' + (s.fork_z ? format_double(*s.fork_z) : std::string());
      if (ids) out += ',' + s.source_id;
      out += '\n';
    }
    return out;
  }
  for (const auto& s : samples) {
    json obj = {{"t", s.t}, {"x", s.x}, {"y", s.y}, {"z", s.z}};
    if (s.fork_z) obj["fork_z"] = *s.fork_z;
    if (!s.source_id.empty()) obj["id"] = s.source_id;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::size_t UniformSeries::size() const { return channels.empty() ? 0 : channels.begin()->second.size(); }

bool UniformSeries::has_channel(std::string_view name) const { return channels.find(name) != channels.end(); }

const std::vector<double>& UniformSeries::channel(std::string_view name) const {
  auto it = channels.find(name);
  if (it == channels.end()) throw Error(ErrorCode::not_found, "no channel '" + std::string(name) + "'");
  return it->second;
}

bool UniformSeries::in_gap(std::size_t k) const {
  return std::any_of(gaps.begin(), gaps.end(), [k](const IndexRange& g) { return k >= g.begin && k < g.end; });
}

std::size_t grid_count(double t_first, double t_last, double rate) {
  return static_cast<std::size_t>(std::floor((t_last - t_first) * rate + 1e-6)) + 1;
}

double interpolate(double ta, double va, double tb, double vb, double t) {
  if (t >= tb) return vb;
  if (t <= ta) return va;
  return va + (vb - va) * ((t - ta) / (tb - ta));
}

UniformSeries resample(std::span<const PositionSample> samples, double rate, double max_gap) {
  if (!(rate > 0.0)) throw Error(ErrorCode::invalid_argument, "resample rate must be positive");
  if (samples.size() < 2) throw Error(ErrorCode::invalid_argument, "resample needs at least 2 samples");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].source_id != samples[0].source_id) {
      throw Error(ErrorCode::invalid_argument, "resample expects a single source; split the log first");
    }
    if (!(samples[i].t > samples[i - 1].t)) {
      throw Error(ErrorCode::invalid_argument, "sample times must be strictly increasing");
    }
  }
  const double t_first = samples.front().t;
  const double t_last = samples.back().t;
  if (!(t_last > t_first)) throw Error(ErrorCode::invalid_argument, "samples span zero duration");

  const bool fork = std::all_of(samples.begin(), samples.end(), [](const auto& s) { return s.fork_z.has_value(); });
  const std::size_t n = grid_count(t_first, t_last, rate);

  UniformSeries out;
  out.t0 = t_first;
  out.rate = rate;
  auto& xs = out.channels["x"];
  auto& ys = out.channels["y"];
  auto& zs = out.channels["z"];
  std::vector<double>* fs = fork ? &out.channels["fork_z"] : nullptr;
  xs.reserve(n);
  ys.reserve(n);
  zs.reserve(n);

  // Tick k belongs to segment (i-1, i] with t[i-1] < t_k <= t[i]; tick 0 is the first fix.
  std::size_t seg = 1;
  std::optional<std::size_t> gap_start;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = out.time_at(k);
    while (seg + 1 < samples.size() && t > samples[seg].t) ++seg;
    const auto& a = samples[seg - 1];
    const auto& b = samples[seg];
    const bool gap = (b.t - a.t) > max_gap && t > a.t && t < b.t;
    if (gap && !gap_start) gap_start = k;
    if (!gap && gap_start) {
      out.gaps.push_back({*gap_start, k});
      gap_start.reset();
    }
    xs.push_back(interpolate(a.t, a.x, b.t, b.x, t));
    ys.push_back(interpolate(a.t, a.y, b.t, b.y, t));
    zs.push_back(interpolate(a.t, a.z, b.t, b.z, t));
    if (fs) fs->push_back(interpolate(a.t, *a.fork_z, b.t, *b.fork_z, t));
  }
  if (gap_start) out.gaps.push_back({*gap_start, n});
  return out;
}

std::vector<PositionSample> to_samples(const UniformSeries& series, const std::string& source_id) {
  std::vector<PositionSample> out;
  const auto& xs = series.channel("x");
  const auto& ys = series.channel("y");
  const auto& zs = series.channel("z");
  const std::vector<double>* fs = series.has_channel("fork_z") ? &series.channel("fork_z") : nullptr;
  out.reserve(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    PositionSample s{series.time_at(k), xs[k], ys[k], zs[k], source_id, std::nullopt};
    if (fs) s.fork_z = (*fs)[k];
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::vector<PositionSample>> split_by_source(std::span<const PositionSample> samples) {
  std::vector<std::vector<PositionSample>> out;
  std::map<std::string, std::size_t, std::less<>> index;
  for (const auto& s : samples) {
    auto [it, inserted] = index.try_emplace(s.source_id, out.size());
    if (inserted) out.emplace_back();
    out[it->second].push_back(s);
  }
  return out;
}

LiveIngest::LiveIngest(Sink sink) : sink_(std::move(sink)) {}

RecordStatus LiveIngest::push_line(std::string_view line) {
  if (trim(line).empty()) return RecordStatus::malformed;
  PositionSample sample;
  try {
    sample = parse_record(line);
  } catch (const ParseError&) {
    std::lock_guard lock(mutex_);
    ++counters_.malformed;
    return RecordStatus::malformed;
  }
  return push(std::move(sample));
}

RecordStatus LiveIngest::push(PositionSample sample) {
  {
    std::lock_guard lock(mutex_);
    if (finalized_) throw Error(ErrorCode::state, "live session already finalized");
    auto it = last_t_.find(sample.source_id);
    if (it != last_t_.end() && !(sample.t > it->second)) {
      ++counters_.dropped_out_of_order;
      return RecordStatus::out_of_order;
    }
    last_t_[sample.source_id] = sample.t;
    buffer_.push_back(sample);
    ++counters_.accepted;
  }
  if (sink_) sink_(sample);
  return RecordStatus::accepted;
}

void LiveIngest::finalize() {
  std::lock_guard lock(mutex_);
  finalized_ = true;
}

bool LiveIngest::finalized() const {
  std::lock_guard lock(mutex_);
  return finalized_;
}

IngestCounters LiveIngest::counters() const {
  std::lock_guard lock(mutex_);
  return counters_;
}

std::size_t LiveIngest::size() const {
  std::lock_guard lock(mutex_);
  return buffer_.size();
}

std::vector<PositionSample> LiveIngest::snapshot() const {
  std::lock_guard lock(mutex_);
  return buffer_;
}

std::unique_ptr<LiveIngest> live_ingest(std::istream& stream, LiveIngest::Sink sink) {
  auto session = std::make_unique<LiveIngest>(std::move(sink));
  std::string line;
  while (std::getline(stream, line)) {
    if (trim(line).empty()) continue;
    session->push_line(line);
  }
  session->finalize();
  return session;
}

}  // namespace trucklens::ingest
