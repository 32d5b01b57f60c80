#pragma once

// JSON form of OpticalConfig and TurbulenceStats, plus key=value overrides.
//
// Keys are the OpticalConfig field names in SI units. `exposure_ms` is
// accepted as an alternative to `exposure_time` and `cn2_e14` (units of
// 1e-14 m^(-2/3)) as an alternative to `cn2`.

#include "turbsynth/optics.hpp"

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace turbsynth {

nlohmann::json config_to_json(const OpticalConfig& cfg);
/// Missing keys keep their defaults; unknown keys throw ValidationError.
OpticalConfig config_from_json(const nlohmann::json& j, OpticalConfig base = {});
OpticalConfig load_config(const std::filesystem::path& path);

/// Applies one `key=value` assignment. Numeric keys accept a plain number,
/// wind_direction accepts `x,y`. Throws ValidationError on bad input.
void apply_override(OpticalConfig& cfg, std::string_view assignment);

nlohmann::json stats_to_json(const TurbulenceStats& stats);

std::string to_string(WaveShape shape);
std::string to_string(FieldRegime regime);

} // namespace turbsynth
