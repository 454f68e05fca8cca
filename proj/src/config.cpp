#include "trucklens/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "trucklens/error.hpp"

namespace trucklens {
namespace {

using nlohmann::json;

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string(what) + ": invalid JSON: " + e.what());
  }
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::invalid_argument, where + " must be a JSON object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::invalid_argument, where + ": unknown key '" + key + "'");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw Error(ErrorCode::invalid_argument, where + " must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw Error(ErrorCode::invalid_argument, where + " must be an integer");
  return j.get<int>();
}

std::string string(const json& j, const std::string& where) {
  if (!j.is_string()) throw Error(ErrorCode::invalid_argument, where + " must be a string");
  return j.get<std::string>();
}

template <typename T, typename F>
void read_opt(const json& j, const char* key, T& out, F&& conv, const std::string& where) {
  if (auto it = j.find(key); it != j.end()) out = conv(*it, where + "." + key);
}

filters::FilterConfig filter_from(const json& j, filters::FilterConfig base, const std::string& where) {
  if (j.is_string()) {
    filters::FilterConfig f;
    f.kind = filters::parse_filter_kind(j.get<std::string>());
    return f;
  }
  check_keys(j, {"kind", "cutoff_hz", "order", "window_seconds", "poly_degree", "mode"}, where);
  if (auto it = j.find("kind"); it != j.end()) base.kind = filters::parse_filter_kind(string(*it, where + ".kind"));
  if (auto it = j.find("mode"); it != j.end()) base.mode = filters::parse_filter_mode(string(*it, where + ".mode"));
  read_opt(j, "cutoff_hz", base.cutoff_hz, number, where);
  read_opt(j, "order", base.order, integer, where);
  read_opt(j, "window_seconds", base.window_seconds, number, where);
  read_opt(j, "poly_degree", base.poly_degree, integer, where);
  return base;
}

json filter_to(const filters::FilterConfig& f) {
  return {{"kind", filters::to_string(f.kind)}, {"cutoff_hz", f.cutoff_hz},     {"order", f.order},
          {"window_seconds", f.window_seconds}, {"poly_degree", f.poly_degree}, {"mode", filters::to_string(f.mode)}};
}

kinematics::ChainConfig chain_from(const json& j, kinematics::ChainConfig c) {
  const std::string where = "chain";
  check_keys(j, {"resample_rate", "max_gap", "filter", "filter_pos", "filter_vel", "filter_acc"}, where);
  read_opt(j, "resample_rate", c.resample_rate, number, where);
  read_opt(j, "max_gap", c.max_gap, number, where);
  if (auto it = j.find("filter"); it != j.end()) c = kinematics::with_filter(c, filter_from(*it, c.filter_pos, "chain.filter"));
  if (auto it = j.find("filter_pos"); it != j.end()) c.filter_pos = filter_from(*it, c.filter_pos, "chain.filter_pos");
  if (auto it = j.find("filter_vel"); it != j.end()) c.filter_vel = filter_from(*it, c.filter_vel, "chain.filter_vel");
  if (auto it = j.find("filter_acc"); it != j.end()) c.filter_acc = filter_from(*it, c.filter_acc, "chain.filter_acc");
  return c;
}

events::EventLimits limits_from(const json& j, events::EventLimits l) {
  const std::string where = "limits";
  check_keys(j,
             {"standstill", "maneuvering", "driving", "harsh_braking", "strong_acceleration", "fork_motion", "order"},
             where);
  for (auto type : events::kAllTypes) {
    const std::string name(events::to_string(type));
    auto it = j.find(name);
    if (it == j.end()) continue;
    check_keys(*it, {"threshold", "min_duration"}, where + "." + name);
    read_opt(*it, "threshold", l.of(type).threshold, number, where + "." + name);
    read_opt(*it, "min_duration", l.of(type).min_duration, number, where + "." + name);
  }
  if (auto it = j.find("order"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::invalid_argument, "limits.order must be an array");
    l.order.clear();
    for (const auto& v : *it) l.order.push_back(events::parse_event_type(string(v, "limits.order[]")));
  }
  return l;
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorCode::invalid_argument, where + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, where + "[]"));
  return out;
}

synthlab::Vec2 vec2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::invalid_argument, where + " must be [x, y]");
  return {number(j[0], where), number(j[1], where)};
}

}  // namespace

AnalysisConfig parse_analysis_config(std::string_view json_text) {
  const json j = parse_json(json_text, "config");
  check_keys(j, {"chain", "limits", "sector_size"}, "config");
  AnalysisConfig c;
  if (auto it = j.find("chain"); it != j.end()) c.chain = chain_from(*it, c.chain);
  if (auto it = j.find("limits"); it != j.end()) c.limits = limits_from(*it, c.limits);
  read_opt(j, "sector_size", c.sector_size, number, "config");
  kinematics::validate(c.chain);
  events::validate(c.limits);
  if (!(c.sector_size > 0.0)) throw Error(ErrorCode::invalid_argument, "config.sector_size must be positive");
  return c;
}

std::string dump_analysis_config(const AnalysisConfig& c) {
  json limits = json::object();
  for (auto type : events::kAllTypes) {
    limits[std::string(events::to_string(type))] = {{"threshold", c.limits.of(type).threshold},
                                                     {"min_duration", c.limits.of(type).min_duration}};
  }
  json order = json::array();
  for (auto t : c.limits.order) order.push_back(events::to_string(t));
  limits["order"] = order;
  json j = {{"chain",
             {{"resample_rate", c.chain.resample_rate},
              {"max_gap", c.chain.max_gap},
              {"filter_pos", filter_to(c.chain.filter_pos)},
              {"filter_vel", filter_to(c.chain.filter_vel)},
              {"filter_acc", filter_to(c.chain.filter_acc)}}},
            {"limits", limits},
            {"sector_size", c.sector_size}};
  return j.dump(2);
}

filters::FilterConfig parse_filter_config(std::string_view json_text) {
  return filter_from(parse_json(json_text, "filter"), {}, "filter");
}

synthlab::SweepSpec parse_sweep_spec(std::string_view json_text) {
  const json j = parse_json(json_text, "sweep spec");
  const std::string where = "sweep";
  check_keys(j, {"rates", "scatters", "filters", "seed", "duration", "source_rate", "rig_noise", "resample_rate"}, where);
  synthlab::SweepSpec s;
  if (auto it = j.find("rates"); it != j.end()) s.rates = number_list(*it, "sweep.rates");
  if (auto it = j.find("scatters"); it != j.end()) s.scatters = number_list(*it, "sweep.scatters");
  if (auto it = j.find("filters"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::invalid_argument, "sweep.filters must be an array");
    for (const auto& f : *it) s.filters.push_back(filter_from(f, {}, "sweep.filters[]"));
  }
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) throw Error(ErrorCode::invalid_argument, "sweep.seed must be a non-negative integer");
    s.seed = it->get<std::uint64_t>();
  }
  read_opt(j, "duration", s.duration, number, where);
  read_opt(j, "source_rate", s.source_rate, number, where);
  read_opt(j, "rig_noise", s.rig_noise, number, where);
  if (auto it = j.find("resample_rate"); it != j.end()) {
    if (it->is_string() && it->get<std::string>() == "native") s.resample_rate.reset();
    else s.resample_rate = number(*it, "sweep.resample_rate");
  }
  if (s.rates.empty() || s.scatters.empty()) throw Error(ErrorCode::invalid_argument, "sweep axes must be nonempty");
  for (double r : s.rates)
    if (!(r > 0.0) || r > s.source_rate) throw Error(ErrorCode::invalid_argument, "sweep rates must lie in (0, source_rate]");
  for (double sc : s.scatters)
    if (sc < 0.0) throw Error(ErrorCode::invalid_argument, "sweep scatters must be >= 0");
  return s;
}

synthlab::MovementScript parse_movement_script(std::string_view json_text) {
  const json j = parse_json(json_text, "movement script");
  check_keys(j, {"anchors", "start", "z", "fork_z0", "phases"}, "script");
  synthlab::MovementScript s;
  if (auto it = j.find("anchors"); it != j.end()) {
    require_object(*it, "script.anchors");
    for (const auto& [name, v] : it->items()) s.anchors[name] = vec2(v, "script.anchors." + name);
  }
  if (auto it = j.find("start"); it != j.end()) {
    if (it->is_string()) {
      auto a = s.anchors.find(it->get<std::string>());
      if (a == s.anchors.end()) throw Error(ErrorCode::invalid_argument, "script.start names an unknown anchor");
      s.start = a->second;
    } else {
      s.start = vec2(*it, "script.start");
    }
  }
  read_opt(j, "z", s.z, number, "script");
  if (auto it = j.find("fork_z0"); it != j.end() && !it->is_null()) s.fork_z0 = number(*it, "script.fork_z0");
  auto phases = j.find("phases");
  if (phases == j.end() || !phases->is_array()) throw Error(ErrorCode::invalid_argument, "script.phases must be an array");
  for (const auto& p : *phases) {
    const std::string where = "script.phases[]";
    check_keys(p, {"label", "duration", "distance", "speed_to", "accel", "toward", "heading_deg", "fork_v"}, where);
    synthlab::Phase ph;
    auto label = p.find("label");
    if (label == p.end()) throw Error(ErrorCode::invalid_argument, where + ": missing label");
    ph.label = events::parse_event_type(string(*label, where + ".label"));
    if (auto it = p.find("duration"); it != p.end()) ph.duration = number(*it, where + ".duration");
    if (auto it = p.find("distance"); it != p.end()) ph.distance = number(*it, where + ".distance");
    if (auto it = p.find("speed_to"); it != p.end()) ph.speed_to = number(*it, where + ".speed_to");
    if (auto it = p.find("accel"); it != p.end()) ph.accel = number(*it, where + ".accel");
    if (auto it = p.find("toward"); it != p.end()) ph.toward = string(*it, where + ".toward");
    if (auto it = p.find("heading_deg"); it != p.end()) ph.heading_deg = number(*it, where + ".heading_deg");
    read_opt(p, "fork_v", ph.fork_v, number, where);
    s.phases.push_back(std::move(ph));
  }
  synthlab::validate(s);
  return s;
}

std::string dump_movement_script(const synthlab::MovementScript& s) {
  json anchors = json::object();
  for (const auto& [name, v] : s.anchors) anchors[name] = {v.x, v.y};
  json phases = json::array();
  for (const auto& p : s.phases) {
    json o = {{"label", events::to_string(p.label)}};
    if (p.duration) o["duration"] = *p.duration;
    if (p.distance) o["distance"] = *p.distance;
    if (p.speed_to) o["speed_to"] = *p.speed_to;
    if (p.accel) o["accel"] = *p.accel;
    if (p.toward) o["toward"] = *p.toward;
    if (p.heading_deg) o["heading_deg"] = *p.heading_deg;
    if (p.fork_v != 0.0) o["fork_v"] = p.fork_v;
    phases.push_back(std::move(o));
  }
  json j = {{"anchors", anchors}, {"start", {s.start.x, s.start.y}}, {"z", s.z}, {"phases", phases}};
  if (s.fork_z0) j["fork_z0"] = *s.fork_z0;
  return j.dump(2);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

}  // namespace trucklens
