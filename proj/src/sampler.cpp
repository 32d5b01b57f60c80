#include "turbsynth/sampler.hpp"

#include "turbsynth/errors.hpp"
#include "turbsynth/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace turbsynth {

const std::vector<ConfigRow>& builtin_table()
{
    static const std::vector<ConfigRow> table{
        {{30, 100}, {0.1, 0.3}, {2.8, 4}, {50, 300}, {4, 50}, {1, 3}, {0.5, 8}},
        {{30, 100}, {0.1, 0.3}, {2.8, 4, 5.6}, {200, 500}, {100, 200}, {3, 5}, {0.5, 8}},
        {{100, 200}, {0.2, 0.5}, {2.8, 4, 5.6}, {5, 50}, {200, 400}, {1, 4}, {1, 20}},
        {{100, 200}, {0.2, 0.5}, {2.8, 4, 5.6, 8}, {20, 100}, {4, 50}, {2, 6}, {0.5, 10}},
        {{200, 400}, {0.3, 0.5}, {2.8, 4, 5.6, 8}, {2, 30}, {50, 100}, {2, 5}, {1, 20}},
        {{200, 400}, {0.3, 0.5}, {4, 5.6, 8, 11}, {10, 40}, {10, 50}, {3, 6}, {1, 20}},
        {{400, 600}, {0.4, 0.75}, {4, 5.6, 8, 11}, {1, 20}, {50, 150}, {3, 5}, {2, 40}},
        {{400, 600}, {0.4, 0.75}, {5.6, 8, 11, 16}, {10, 30}, {10, 100}, {4, 7}, {1, 20}},
        {{600, 800}, {0.6, 0.8}, {5.6, 8, 11, 16}, {1, 15}, {100, 300}, {3, 7}, {2, 40}},
        {{600, 800}, {0.6, 0.8}, {8, 11, 16, 18}, {2, 20}, {50, 200}, {4, 8}, {2, 40}},
        {{800, 1000}, {0.8, 1}, {8, 11, 16, 18}, {0.5, 10}, {10, 100}, {5, 9}, {2, 40}},
        {{800, 1000}, {0.8, 1}, {11, 16, 18, 24}, {1, 20}, {4, 50}, {6, 10}, {1, 20}},
    };
    return table;
}

namespace {

// Draw indices within a config stream; each parameter has its own slot so
// adding a parameter never shifts the others.
enum Draw : std::uint64_t { row_draw, distance, focal, fnum, cn2, height, wind, exposure, direction };

double lerp(const Interval& r, double u)
{
    return std::min(r.max, r.min + (r.max - r.min) * u);
}

} // namespace

SampledConfig sample_config(std::uint64_t seed, int row)
{
    const auto& table = builtin_table();
    if (row < 1 || row > static_cast<int>(table.size()))
        throw ValidationError("config row must be in [1, " + std::to_string(table.size()) + "], got " +
                              std::to_string(row));
    const ConfigRow& r = table[static_cast<std::size_t>(row - 1)];
    const Philox4x32 rng(derive_seed(seed, stream::config));

    SampledConfig out;
    out.row = row;
    OpticalConfig& cfg = out.config;
    cfg.distance = lerp(r.distance_m, rng.uniform(distance));
    cfg.focal_length = lerp(r.focal_length_m, rng.uniform(focal));
    cfg.f_number = r.f_numbers[rng.below(fnum, r.f_numbers.size())];
    cfg.cn2 = lerp(r.cn2_e14, rng.uniform(cn2)) * 1e-14;
    cfg.height = r.heights_m[rng.below(height, r.heights_m.size())];
    cfg.wind_speed = lerp(r.wind_speed_mps, rng.uniform(wind));
    cfg.exposure_time = lerp(r.exposure_ms, rng.uniform(exposure)) * 1e-3;
    const double angle = 2.0 * std::numbers::pi * rng.uniform(direction);
    cfg.wind_direction = {std::cos(angle), std::sin(angle)};
    return out;
}

SampledConfig sample_config(std::uint64_t seed)
{
    const Philox4x32 rng(derive_seed(seed, stream::config));
    const auto row = static_cast<int>(rng.below(row_draw, builtin_table().size())) + 1;
    return sample_config(seed, row);
}

bool config_in_row(const OpticalConfig& cfg, const ConfigRow& row)
{
    auto in_set = [](const std::vector<double>& set, double v) {
        return std::find(set.begin(), set.end(), v) != set.end();
    };
    // cn2 and exposure are stored in SI; compare in table units with a
    // relative slack for the unit conversion.
    auto in_scaled = [](const Interval& r, double v) {
        const double slack = 1e-12 * std::max(std::abs(r.min), std::abs(r.max));
        return v >= r.min - slack && v <= r.max + slack;
    };
    return row.distance_m.contains(cfg.distance) && row.focal_length_m.contains(cfg.focal_length) &&
           in_set(row.f_numbers, cfg.f_number) && in_scaled(row.cn2_e14, cfg.cn2 * 1e14) &&
           in_set(row.heights_m, cfg.height) && row.wind_speed_mps.contains(cfg.wind_speed) &&
           in_scaled(row.exposure_ms, cfg.exposure_time * 1e3);
}

std::vector<std::string> validate_config(const OpticalConfig& cfg, ExposureWindow window)
{
    auto out = config_violations(cfg, window);
    if (!out.empty())
        return out;
    if (!(cfg.aperture() > 0.0) || !std::isfinite(cfg.aperture()))
        out.push_back("aperture focal_length / f_number must be positive");
    const double r0 = fried_parameter(cfg);
    if (!(r0 > 0.0) || !std::isfinite(r0)) {
        out.push_back("Fried parameter is not computable for this config");
        return out;
    }
    const TurbulenceStats s = turbulence_stats(cfg);
    if (!(s.mean_blur_width_px >= min_bank_width_px && s.mean_blur_width_px <= max_bank_width_px)) {
        std::ostringstream msg;
        msg << "mean blur width " << s.mean_blur_width_px << " px is outside the supported range ["
            << min_bank_width_px << ", " << max_bank_width_px << "] px";
        out.push_back(msg.str());
    }
    return out;
}

} // namespace turbsynth
