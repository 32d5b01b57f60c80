#include "cli.hpp"

#include "turbsynth/config_io.hpp"
#include "turbsynth/dataset.hpp"
#include "turbsynth/degrade.hpp"
#include "turbsynth/errors.hpp"
#include "turbsynth/fields.hpp"
#include "turbsynth/io.hpp"
#include "turbsynth/optics.hpp"
#include "turbsynth/sampler.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace turbsynth::cli {

namespace {

// Exit codes.
constexpr int ok = 0;
constexpr int failure = 1;
constexpr int stats_out_of_tolerance = 3;

const std::vector<std::string> all_kinds{"gt", "tilt", "blur", "turb"};

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct ConfigArgs {
    std::string config_path;
    std::uint64_t sample_seed = 0;
    int row = 0;
    std::vector<std::string> overrides;
    double exposure_ms = 0.0;

    CLI::Option* config_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* row_opt = nullptr;
    CLI::Option* exposure_opt = nullptr;
};

void add_config_options(CLI::App* app, ConfigArgs& a, const std::string& row_flag = "--config-row")
{
    a.config_opt = app->add_option("--config", a.config_path,
                                   "JSON optical config; keys in SI units (meters, seconds, m^(-2/3) for cn2)")
                       ->check(CLI::ExistingFile);
    a.seed_opt = app->add_option("--sample-seed", a.sample_seed, "Draw the config from the built-in table with this seed")
                     ->excludes(a.config_opt);
    a.row_opt = app->add_option(row_flag, a.row, "Pin the table row (1-12) for sampled configs")
                    ->check(CLI::Range(1, 12))
                    ->excludes(a.config_opt);
    app->add_option("--override", a.overrides,
                    "key=value applied to the config (SI units; exposure_ms in ms, cn2_e14 in 1e-14 m^(-2/3))");
    a.exposure_opt = app->add_option("--exposure-ms", a.exposure_ms, "Exposure time in milliseconds")
                         ->check(CLI::PositiveNumber);
}

struct ResolvedConfig {
    OpticalConfig cfg;
    int row = 0;
};

ResolvedConfig resolve_config(const ConfigArgs& a)
{
    ResolvedConfig r;
    if (a.config_opt->count() > 0) {
        r.cfg = load_config(a.config_path);
    } else if (a.seed_opt->count() > 0 || a.row_opt->count() > 0) {
        const SampledConfig s = a.row_opt->count() > 0 ? sample_config(a.sample_seed, a.row) : sample_config(a.sample_seed);
        r.cfg = s.config;
        r.row = s.row;
    }
    for (const auto& ov : a.overrides)
        apply_override(r.cfg, ov);
    if (a.exposure_opt->count() > 0)
        r.cfg.exposure_time = a.exposure_ms * 1e-3;
    const auto violations = validate_config(r.cfg);
    if (!violations.empty()) {
        std::string msg = "invalid config:";
        for (const auto& v : violations)
            msg += "\n  " + v;
        throw ValidationError(msg);
    }
    return r;
}

json config_line(const ResolvedConfig& r)
{
    json j = config_to_json(r.cfg);
    if (r.row > 0)
        j["config_row"] = r.row;
    return j;
}

struct SynthArgs {
    ConfigArgs config;
    std::string input;
    std::string out_prefix;
    std::vector<std::string> emit = all_kinds;
    double noise_k = 0.0;
    std::uint64_t seed = 0;
    int k_bins = 16;
    int bit_depth = 0;
    double blur_correlation_px = 32.0;
};

void add_synth_options(CLI::App* app, SynthArgs& a)
{
    add_config_options(app, a.config);
    app->add_option("--out-prefix", a.out_prefix, "Output path prefix")->required();
    app->add_option("--emit", a.emit, "Artifacts to write: gt, tilt, blur, turb")
        ->check(CLI::IsMember(all_kinds))
        ->delimiter(',');
    app->add_option("--noise-k", a.noise_k, "Exposure noise constant K; std is K / sqrt(exposure in ms). 0 disables")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--seed", a.seed, "Seed for the random fields and noise");
    app->add_option("--k-bins", a.k_bins, "Number of PSF bank kernels")->check(CLI::Range(1, 256));
    app->add_option("--bit-depth", a.bit_depth, "PNG bit depth of outputs (8 or 16); default: the input's")
        ->check(CLI::IsMember({8, 16}));
    app->add_option("--blur-correlation-px", a.blur_correlation_px,
                    "Correlation length of the blur-width field in pixels")
        ->check(CLI::NonNegativeNumber);
}

SynthesisOptions synthesis_options(const SynthArgs& a)
{
    SynthesisOptions so;
    so.k_bins = a.k_bins;
    so.noise_k = a.noise_k;
    so.blur_correlation_length = a.blur_correlation_px;
    return so;
}

bool wants(const SynthArgs& a, const std::string& kind)
{
    return std::find(a.emit.begin(), a.emit.end(), kind) != a.emit.end();
}

bool wants_synthesis(const SynthArgs& a)
{
    return wants(a, "tilt") || wants(a, "blur") || wants(a, "turb");
}

const ImageBuffer& pick(const FrameOutputs& f, const ImageBuffer& gt, const std::string& kind)
{
    if (kind == "tilt")
        return f.tilt;
    if (kind == "blur")
        return f.blur;
    if (kind == "turb")
        return f.turb;
    return gt;
}

void ensure_parent(const fs::path& p)
{
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
}

json video_line(const ResolvedConfig& r, const VideoResult& v)
{
    json j = stats_to_json(v.stats);
    j["tilt_sigma_px"] = v.tilt_sigma;
    j["tilt_correlation_px"] = v.tilt_correlation_length;
    j["bank_size"] = v.bank_size;
    j["bank_support_px"] = v.bank_support;
    j["config"] = config_line(r);
    return j;
}

int synth_image(const SynthArgs& a, std::ostream& out)
{
    const ResolvedConfig r = resolve_config(a.config);
    const DecodedImage input = read_png(a.input);
    const int depth = a.bit_depth > 0 ? a.bit_depth : input.bit_depth;

    std::optional<VideoResult> video;
    if (wants_synthesis(a))
        video = degrade_video({input.image}, r.cfg, a.seed, synthesis_options(a));
    for (const auto& kind : a.emit) {
        const fs::path path = a.out_prefix + "_" + kind + ".png";
        ensure_parent(path);
        write_png(path, kind == "gt" ? input.image : pick(video->frames.front(), input.image, kind), depth);
    }
    json line = video ? video_line(r, *video) : stats_to_json(turbulence_stats(r.cfg));
    if (!video)
        line["config"] = config_line(r);
    out << line.dump() << "\n";
    return ok;
}

struct VideoArgs {
    SynthArgs synth;
    std::string input_dir;
    double frame_rate = 0.0;
    bool dump_fields = false;
};

std::vector<fs::path> frame_files(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw IoError("input directory " + dir.string() + " does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw IoError("no .png frames in " + dir.string());
    return files;
}

std::string frame_name(std::size_t i, const char* ext)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu%s", i, ext);
    return buf;
}

int synth_video(const VideoArgs& a, std::ostream& out)
{
    ResolvedConfig r = resolve_config(a.synth.config);
    if (a.frame_rate > 0.0)
        r.cfg.frame_rate = a.frame_rate;

    std::vector<ImageBuffer> frames;
    int depth = a.synth.bit_depth;
    for (const auto& f : frame_files(a.input_dir)) {
        DecodedImage d = read_png(f);
        if (!frames.empty() && (d.image.shape() != frames.front().shape() || d.image.channels() != frames.front().channels()))
            throw ValidationError("frame " + f.filename().string() + " differs in size from the first frame");
        if (depth == 0)
            depth = d.bit_depth;
        frames.push_back(std::move(d.image));
    }

    SynthesisOptions so = synthesis_options(a.synth);
    so.keep_fields = a.dump_fields;
    std::optional<VideoResult> video;
    if (wants_synthesis(a.synth) || a.dump_fields)
        video = degrade_video(frames, r.cfg, a.synth.seed, so);

    for (const auto& kind : a.synth.emit) {
        const fs::path dir = a.synth.out_prefix + "_" + kind;
        fs::create_directories(dir);
        for (std::size_t i = 0; i < frames.size(); ++i)
            write_png(dir / frame_name(i, ".png"), kind == "gt" ? frames[i] : pick(video->frames[i], frames[i], kind), depth);
    }
    if (a.dump_fields) {
        const fs::path dir = a.synth.out_prefix + "_fields";
        fs::create_directories(dir);
        for (std::size_t i = 0; i < video->fields.size(); ++i) {
            write_raster(dir / ("blur_width_" + frame_name(i, ".ettf")), video->fields[i].blur_width);
            write_raster(dir / ("dx_" + frame_name(i, ".ettf")), video->fields[i].dx);
            write_raster(dir / ("dy_" + frame_name(i, ".ettf")), video->fields[i].dy);
        }
    }
    json line = video ? video_line(r, *video) : json{{"config", config_line(r)}};
    line["n_frames"] = frames.size();
    out << line.dump() << "\n";
    return ok;
}

struct DatasetArgs {
    std::string source;
    std::string out;
    std::uint64_t master_seed = 0;
    double split_ratio = default_split_ratio;
    int workers = 1;
    bool resume = false;
    int row = 0;
    std::vector<std::string> overrides;
    double noise_k = 0.0;
    int k_bins = 16;
    int bit_depth = 8;
    std::int64_t timestamp = 0;
    CLI::Option* row_opt = nullptr;
    CLI::Option* timestamp_opt = nullptr;
};

int gen_dataset(const DatasetArgs& a, std::ostream& out, std::ostream& err)
{
    DatasetRequest req;
    req.source_root = a.source;
    req.out_root = a.out;
    req.master_seed = a.master_seed;
    req.split_ratio = a.split_ratio;
    req.options.workers = a.workers;
    req.options.overrides = a.overrides;
    req.options.noise_k = a.noise_k;
    req.options.k_bins = a.k_bins;
    req.options.bit_depth = a.bit_depth;
    if (a.row_opt->count() > 0)
        req.options.config_row = a.row;
    if (a.timestamp_opt->count() > 0)
        req.options.timestamp = a.timestamp;

    const DatasetManifest m = a.resume ? resume(req.out_root, req) : generate_dataset(req);
    for (const auto& s : m.sequences)
        if (!s.ok)
            err << "sequence " << s.sequence_id << " failed: " << s.error << "\n";
    int train = 0;
    for (const auto& s : m.sequences)
        train += s.split == Split::Train ? 1 : 0;
    out << json{{"sequences", m.sequences.size()},
                {"succeeded", m.succeeded()},
                {"failed", m.failed()},
                {"train", train},
                {"test", static_cast<int>(m.sequences.size()) - train},
                {"manifest", (fs::path(a.out) / "manifest.json").generic_string()}}
               .dump()
        << "\n";
    return exit_code(m);
}

struct MtfArgs {
    ConfigArgs config;
    std::vector<double> tau_ms{0.5, 1, 2, 4, 8, 16, 32, 40};
    int n_freq = 64;
    double omega_px = 0.0;
    std::string out;
};

std::vector<double> frequency_axis(int n)
{
    std::vector<double> xi(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        xi[static_cast<std::size_t>(k)] = n == 1 ? 0.0 : 0.5 * k / (n - 1);
    return xi;
}

std::string tau_label(double ms)
{
    std::ostringstream s;
    s << ms;
    return s.str();
}

int mtf_curve(const MtfArgs& a, std::ostream& out)
{
    const ResolvedConfig r = resolve_config(a.config);
    const double omega_px =
        a.omega_px > 0.0 ? a.omega_px : meters_to_px(r.cfg, blur_width_from_r0(r.cfg, fried_parameter(r.cfg)));

    std::ostringstream csv;
    csv << "xi_cycles_per_px,mtf_se,mtf_le";
    for (double t : a.tau_ms)
        csv << ",mtf_et_tau_" << tau_label(t);
    csv << "\r\n";
    for (double xi : frequency_axis(a.n_freq)) {
        const double nu = angular_frequency(r.cfg, xi);
        csv << num(xi) << "," << num(mtf_short_exposure(r.cfg, nu)) << "," << num(mtf_long_exposure(r.cfg, nu));
        for (double t : a.tau_ms)
            csv << "," << num(mtf_et(r.cfg.with_exposure(t * 1e-3), omega_px, xi));
        csv << "\r\n";
    }
    if (a.out.empty() || a.out == "-") {
        out << csv.str();
    } else {
        ensure_parent(a.out);
        std::ofstream f(a.out, std::ios::binary);
        if (!f || !(f << csv.str()))
            throw IoError("cannot write " + a.out);
    }
    return ok;
}

struct PsfArgs {
    ConfigArgs config;
    double omega_px = 4.0;
    int size = 0;
    std::string out;
};

int psf_dump(const PsfArgs& a, std::ostream& out)
{
    const ResolvedConfig r = resolve_config(a.config);
    const int size = a.size > 0 ? a.size : std::max(16, 2 * static_cast<int>(std::ceil(8.0 * a.omega_px)));
    const SampledGrid psf = fftshift(psf_from_mtf(mtf_et(r.cfg, a.omega_px, Shape{size, size})));
    ensure_parent(a.out);
    write_raster(a.out, psf);
    out << json{{"omega_px", a.omega_px},
                {"rho_p", rho_p_from_width_px(r.cfg, a.omega_px)},
                {"exposure_ms", r.cfg.exposure_ms()},
                {"size", size},
                {"center", {size / 2, size / 2}},
                {"sum", psf.sum()}}
               .dump()
        << "\n";
    return ok;
}

struct StatsArgs {
    ConfigArgs config;
    int grid = 1024;
    std::uint64_t seed = 0;
    double epsilon = 0.1;
    double correlation_px = 32.0;
    bool zero_std = false;
    double mean_tolerance = 0.03;
    double std_tolerance = 0.05;
};

int validate_stats(const StatsArgs& a, std::ostream& out, std::ostream& err)
{
    const ResolvedConfig r = resolve_config(a.config);
    const TurbulenceStats s = turbulence_stats(r.cfg);
    const double mean_target = s.mean_blur_width_px;
    const double std_target = a.zero_std ? 0.0 : s.std_blur_width_px;

    const RandomFieldSpec spec{a.grid, a.grid, a.correlation_px, a.seed};
    const BlurWidthField field = blur_width_field(mean_target, std_target, spec, a.epsilon);

    // Pre-clamp samples: mean + std * R, with R regenerated from the same stream.
    double mean = mean_target;
    double sd = 0.0;
    if (std_target > 0.0) {
        const SampledGrid g = gaussian_random_field(spec, GridKind::BlurWidthField);
        std::vector<double> pre(g.values().begin(), g.values().end());
        for (double& v : pre)
            v = mean_target + std_target * v;
        const SampledGrid pre_grid(spec.shape(), GridKind::BlurWidthField, 1.0, pre);
        mean = pre_grid.mean();
        sd = pre_grid.stddev();
    }
    const double mean_err = std::abs(mean - mean_target) / mean_target;
    const double std_err = std_target > 0.0 ? std::abs(sd - std_target) / std_target : std::abs(sd);
    const bool clamp_ok = field.grid.min() >= a.epsilon;
    const bool pass = mean_err <= a.mean_tolerance && (std_target > 0.0 ? std_err <= a.std_tolerance : sd == 0.0) && clamp_ok;

    json line{{"mean_target_px", mean_target},
              {"mean_measured_px", mean},
              {"mean_rel_error", mean_err},
              {"std_target_px", std_target},
              {"std_measured_px", sd},
              {"std_rel_error", std_err},
              {"post_clamp_min_px", field.grid.min()},
              {"grid", a.grid},
              {"pass", pass},
              {"config", config_line(r)}};
    out << line.dump() << "\n";
    err << (pass ? "PASS" : "FAIL") << ": mean " << mean << " px (target " << mean_target << "), std " << sd
        << " px (target " << std_target << ")\n";
    return pass ? ok : stats_out_of_tolerance;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Atmospheric turbulence synthesis with exposure-time dependent blur.\n"
                 "Units: meters and seconds for optics, ms for --exposure-ms, pixels for widths."};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    SynthArgs image_args;
    auto* image = app.add_subcommand("synth-image", "Degrade one image (writes {prefix}_{kind}.png)");
    image->add_option("--input", image_args.input, "Input PNG (8 or 16 bit)")->required();
    add_synth_options(image, image_args);

    VideoArgs video_args;
    auto* video = app.add_subcommand("synth-video",
                                     "Degrade a directory of frames with one frozen-flow realization "
                                     "(writes {prefix}_{kind}/%06d.png)");
    video->add_option("--input-dir", video_args.input_dir, "Directory of .png frames, sorted by name")->required();
    video->add_option("--frame-rate", video_args.frame_rate, "Frames per second (overrides the config)")
        ->check(CLI::PositiveNumber);
    video->add_flag("--dump-fields", video_args.dump_fields,
                    "Also write per-frame blur-width (px) and displacement (px) fields as ETTF rasters "
                    "to {prefix}_fields/");
    add_synth_options(video, video_args.synth);

    DatasetArgs ds_args;
    auto* ds = app.add_subcommand("gen-dataset", "Generate a train/test dataset from a directory of sequences");
    ds->add_option("--source", ds_args.source, "Directory with one subdirectory of .png frames per sequence")
        ->required();
    ds->add_option("--out", ds_args.out, "Output root")->required();
    ds->add_option("--master-seed", ds_args.master_seed, "Master seed for the whole run");
    ds->add_option("--split-ratio", ds_args.split_ratio, "Fraction of sequences assigned to train")
        ->check(CLI::Range(0.0, 1.0));
    ds->add_option("--workers", ds_args.workers, "Worker threads")->check(CLI::PositiveNumber);
    ds->add_flag("--resume", ds_args.resume, "Skip sequences with a verified completion marker");
    ds_args.row_opt =
        ds->add_option("--config-row", ds_args.row, "Pin every sequence to one table row (1-12)")->check(CLI::Range(1, 12));
    ds->add_option("--override", ds_args.overrides,
                   "key=value applied to every sampled config (SI units; exposure_ms in ms)");
    ds->add_option("--noise-k", ds_args.noise_k, "Exposure noise constant K (std K / sqrt(exposure in ms)); 0 disables")
        ->check(CLI::NonNegativeNumber);
    ds->add_option("--k-bins", ds_args.k_bins, "Number of PSF bank kernels")->check(CLI::Range(1, 256));
    ds->add_option("--bit-depth", ds_args.bit_depth, "PNG bit depth of outputs (8 or 16)")->check(CLI::IsMember({8, 16}));
    ds_args.timestamp_opt = ds->add_option("--timestamp", ds_args.timestamp,
                                           "Manifest creation time in seconds since the epoch "
                                           "(default: SOURCE_DATE_EPOCH, else now)");

    MtfArgs mtf_args;
    auto* mtf = app.add_subcommand("mtf-curve",
                                   "Write MTF_SE, MTF_LE and one MTF_ET column per exposure as CSV "
                                   "over xi in [0, 0.5] cycles/px");
    add_config_options(mtf, mtf_args.config);
    mtf->add_option("--tau-list-ms", mtf_args.tau_ms, "Exposure times in ms")->delimiter(',')->check(CLI::PositiveNumber);
    mtf->add_option("--n-freq", mtf_args.n_freq, "Number of frequency samples")->check(CLI::Range(1, 1 << 20));
    mtf->add_option("--omega-px", mtf_args.omega_px,
                    "Blur width in pixels for the MTF_ET columns (default: 0.49 lambda f / r0 in px)")
        ->check(CLI::PositiveNumber);
    mtf->add_option("--out", mtf_args.out, "CSV path (default: standard output)");

    PsfArgs psf_args;
    auto* psf = app.add_subcommand("psf-dump", "Write a centered exposure-time PSF as an ETTF raster");
    add_config_options(psf, psf_args.config);
    psf->add_option("--omega-px", psf_args.omega_px, "Blur width in pixels")->check(CLI::PositiveNumber);
    psf->add_option("--tau-ms", psf_args.config.exposure_ms, "Exposure time in ms (alias of --exposure-ms)")
        ->check(CLI::PositiveNumber);
    psf->add_option("--size", psf_args.size, "Raster side in pixels (default: max(16, 2 ceil(8 omega)))")
        ->check(CLI::Range(1, 8192));
    psf->add_option("--out", psf_args.out, "Output .ettf path")->required();

    StatsArgs stats_args;
    auto* stats = app.add_subcommand("validate-stats",
                                     "Check blur-width field mean/std (px) against the closed forms; exit 3 on failure");
    add_config_options(stats, stats_args.config, "--row");
    stats->add_option("--grid", stats_args.grid, "Field side in pixels")->check(CLI::Range(2, 8192));
    stats->add_option("--seed", stats_args.seed, "Field seed");
    stats->add_option("--epsilon", stats_args.epsilon, "Width floor in pixels")->check(CLI::PositiveNumber);
    stats->add_option("--correlation-px", stats_args.correlation_px, "Field correlation length in pixels")
        ->check(CLI::NonNegativeNumber);
    stats->add_flag("--zero-std", stats_args.zero_std, "Force the width std to 0 (constant field)");
    stats->add_option("--mean-tolerance", stats_args.mean_tolerance, "Relative tolerance on the mean");
    stats->add_option("--std-tolerance", stats_args.std_tolerance, "Relative tolerance on the std");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (image->parsed())
            return synth_image(image_args, out);
        if (video->parsed())
            return synth_video(video_args, out);
        if (ds->parsed())
            return gen_dataset(ds_args, out, err);
        if (mtf->parsed())
            return mtf_curve(mtf_args, out);
        if (psf->parsed()) {
            // --tau-ms is bound to the same value as --exposure-ms.
            if (psf->get_option("--tau-ms")->count() > 0)
                psf_args.config.exposure_opt = psf->get_option("--tau-ms");
            return psf_dump(psf_args, out);
        }
        if (stats->parsed())
            return validate_stats(stats_args, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return failure;
    }
    return failure;
}

} // namespace turbsynth::cli
