#include "turbsynth/config_io.hpp"

#include "turbsynth/errors.hpp"

#include <charconv>
#include <fstream>
#include <map>

namespace turbsynth {

using nlohmann::json;

std::string to_string(WaveShape shape)
{
    return shape == WaveShape::Plane ? "plane" : "spherical";
}

std::string to_string(FieldRegime regime)
{
    return regime == FieldRegime::Near ? "near" : "far";
}

namespace {

WaveShape parse_wave_shape(const std::string& s)
{
    if (s == "spherical")
        return WaveShape::Spherical;
    if (s == "plane")
        return WaveShape::Plane;
    throw ValidationError("wave_shape must be \"spherical\" or \"plane\", got \"" + s + "\"");
}

FieldRegime parse_field_regime(const std::string& s)
{
    if (s == "far")
        return FieldRegime::Far;
    if (s == "near")
        return FieldRegime::Near;
    throw ValidationError("field_regime must be \"far\" or \"near\", got \"" + s + "\"");
}

double* scalar_field(OpticalConfig& cfg, const std::string& key)
{
    static const std::map<std::string, double OpticalConfig::*> fields{
        {"wavelength", &OpticalConfig::wavelength},     {"focal_length", &OpticalConfig::focal_length},
        {"f_number", &OpticalConfig::f_number},         {"distance", &OpticalConfig::distance},
        {"cn2", &OpticalConfig::cn2},                   {"wind_speed", &OpticalConfig::wind_speed},
        {"height", &OpticalConfig::height},             {"exposure_time", &OpticalConfig::exposure_time},
        {"pixel_pitch", &OpticalConfig::pixel_pitch},   {"frame_rate", &OpticalConfig::frame_rate},
    };
    auto it = fields.find(key);
    return it == fields.end() ? nullptr : &(cfg.*(it->second));
}

double parse_number(std::string_view key, std::string_view text)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ValidationError("override " + std::string(key) + ": \"" + std::string(text) + "\" is not a number");
    return v;
}

double number_of(const json& v, const std::string& key)
{
    if (!v.is_number())
        throw ValidationError("config key " + key + " must be a number");
    return v.get<double>();
}

} // namespace

json config_to_json(const OpticalConfig& cfg)
{
    return json{
        {"wavelength", cfg.wavelength},
        {"focal_length", cfg.focal_length},
        {"f_number", cfg.f_number},
        {"distance", cfg.distance},
        {"cn2", cfg.cn2},
        {"wind_speed", cfg.wind_speed},
        {"wind_direction", {cfg.wind_direction[0], cfg.wind_direction[1]}},
        {"height", cfg.height},
        {"exposure_time", cfg.exposure_time},
        {"pixel_pitch", cfg.pixel_pitch},
        {"frame_rate", cfg.frame_rate},
        {"wave_shape", to_string(cfg.wave_shape)},
        {"field_regime", to_string(cfg.field_regime)},
    };
}

OpticalConfig config_from_json(const json& j, OpticalConfig base)
{
    if (!j.is_object())
        throw ValidationError("config must be a JSON object");
    OpticalConfig cfg = base;
    for (const auto& [key, v] : j.items()) {
        if (double* field = scalar_field(cfg, key)) {
            *field = number_of(v, key);
        } else if (key == "exposure_ms") {
            cfg.exposure_time = number_of(v, key) * 1e-3;
        } else if (key == "cn2_e14") {
            cfg.cn2 = number_of(v, key) * 1e-14;
        } else if (key == "wind_direction") {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw ValidationError("wind_direction must be an array of two numbers");
            cfg.wind_direction = {v[0].get<double>(), v[1].get<double>()};
        } else if (key == "wave_shape") {
            if (!v.is_string())
                throw ValidationError("wave_shape must be a string");
            cfg.wave_shape = parse_wave_shape(v.get<std::string>());
        } else if (key == "field_regime") {
            if (!v.is_string())
                throw ValidationError("field_regime must be a string");
            cfg.field_regime = parse_field_regime(v.get<std::string>());
        } else {
            throw ValidationError("unknown config key \"" + key + "\"");
        }
    }
    return cfg;
}

OpticalConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

void apply_override(OpticalConfig& cfg, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ValidationError("override must look like key=value, got \"" + std::string(assignment) + "\"");
    const std::string key(assignment.substr(0, eq));
    const std::string_view value = assignment.substr(eq + 1);

    if (double* field = scalar_field(cfg, key)) {
        *field = parse_number(key, value);
    } else if (key == "exposure_ms") {
        cfg.exposure_time = parse_number(key, value) * 1e-3;
    } else if (key == "cn2_e14") {
        cfg.cn2 = parse_number(key, value) * 1e-14;
    } else if (key == "wind_direction") {
        const auto comma = value.find(',');
        if (comma == std::string_view::npos)
            throw ValidationError("wind_direction override must look like x,y");
        cfg.wind_direction = {parse_number(key, value.substr(0, comma)), parse_number(key, value.substr(comma + 1))};
    } else if (key == "wave_shape") {
        cfg.wave_shape = parse_wave_shape(std::string(value));
    } else if (key == "field_regime") {
        cfg.field_regime = parse_field_regime(std::string(value));
    } else {
        throw ValidationError("unknown override key \"" + key + "\"");
    }
}

json stats_to_json(const TurbulenceStats& s)
{
    return json{
        {"r0_m", s.fried_r0},
        {"rho_p", s.rho_p},
        {"mean_blur_width_rad", s.mean_blur_width_angular},
        {"std_blur_width_rad", s.std_blur_width_angular},
        {"mean_blur_width_px", s.mean_blur_width_px},
        {"std_blur_width_px", s.std_blur_width_px},
    };
}

} // namespace turbsynth
