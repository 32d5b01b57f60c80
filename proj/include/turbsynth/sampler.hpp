#pragma once

// Table-driven parameter sampling for dataset generation: twelve
// configuration rows, chosen with equal probability, each with continuous
// ranges (uniform) and discrete sets (uniform).

#include "turbsynth/optics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace turbsynth {

struct Interval {
    double min = 0.0;
    double max = 0.0;
    bool contains(double v) const { return v >= min && v <= max; }
};

struct ConfigRow {
    Interval distance_m;
    Interval focal_length_m;
    std::vector<double> f_numbers;
    /// In units of 1e-14 m^(-2/3).
    Interval cn2_e14;
    std::vector<double> heights_m;
    Interval wind_speed_mps;
    Interval exposure_ms;
};

/// The twelve built-in rows, in table order.
const std::vector<ConfigRow>& builtin_table();

struct SampledConfig {
    OpticalConfig config;
    /// 1-based row number in builtin_table().
    int row = 0;
};

/// Row chosen uniformly, then every parameter sampled from that row.
/// Wind direction is drawn uniformly on the unit circle. Deterministic in seed.
SampledConfig sample_config(std::uint64_t seed);
/// Same, with the row pinned (1-based). Throws ValidationError on a bad row.
SampledConfig sample_config(std::uint64_t seed, int row);

/// True when every sampled quantity lies in the row's ranges and sets.
bool config_in_row(const OpticalConfig& cfg, const ConfigRow& row);

/// Config invariants plus cross-checks (aperture, r0, mean blur width
/// within the range a PSF bank can be built for). Empty means valid.
std::vector<std::string> validate_config(const OpticalConfig& cfg, ExposureWindow window = {});

/// Widths (px) a bank can be constructed for.
inline constexpr double min_bank_width_px = 1e-3;
inline constexpr double max_bank_width_px = 512.0;

} // namespace turbsynth
