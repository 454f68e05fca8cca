#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "trucklens/area.hpp"
#include "trucklens/events.hpp"
#include "trucklens/kinematics.hpp"
#include "trucklens/synthlab.hpp"

namespace trucklens {

/// Everything an analysis run needs. The JSON form mirrors the field names:
///   {"chain": {"resample_rate", "max_gap", "filter_pos", "filter_vel",
///              "filter_acc", "filter"}, "limits": {...}, "sector_size"}
/// Missing keys keep their defaults; unknown keys are rejected.
struct AnalysisConfig {
  kinematics::ChainConfig chain = kinematics::chain_defaults();
  events::EventLimits limits = events::default_limits();
  double sector_size = area::kDefaultSectorSize;

  bool operator==(const AnalysisConfig&) const = default;
};

AnalysisConfig parse_analysis_config(std::string_view json_text);
std::string dump_analysis_config(const AnalysisConfig& config);

filters::FilterConfig parse_filter_config(std::string_view json_text);
synthlab::SweepSpec parse_sweep_spec(std::string_view json_text);
synthlab::MovementScript parse_movement_script(std::string_view json_text);
std::string dump_movement_script(const synthlab::MovementScript& script);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace trucklens
