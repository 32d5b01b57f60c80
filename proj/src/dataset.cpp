#include "turbsynth/dataset.hpp"

#include "turbsynth/config_io.hpp"
#include "turbsynth/errors.hpp"
#include "turbsynth/io.hpp"
#include "turbsynth/rng.hpp"
#include "turbsynth/sampler.hpp"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace turbsynth {

namespace {

constexpr const char* marker_name = ".complete";
constexpr const char* run_file = "run.json";
constexpr const char* manifest_file = "manifest.json";
const std::vector<std::string> output_kinds{"gt", "tilt", "blur", "turb"};

std::string frame_name(int index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06d.png", index);
    return buf;
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_atomic(const fs::path& path, const std::string& content)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + tmp.string());
        out << content;
        if (!out.flush())
            throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::uint32_t file_crc32(const fs::path& path)
{
    const std::string bytes = read_file(path);
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

Split parse_split(const std::string& s)
{
    if (s == "train")
        return Split::Train;
    if (s == "test")
        return Split::Test;
    throw ValidationError("bad split \"" + s + "\"");
}

json record_to_json(const SequenceRecord& r)
{
    json j{
        {"sequence_id", r.sequence_id},
        {"source_path", r.source_path},
        {"split", to_string(r.split)},
        {"seed", r.seed},
        {"config", config_to_json(r.config)},
        {"config_row", r.row},
        {"n_frames", r.n_frames},
        {"status", r.ok ? "ok" : "failed"},
        {"output_paths", r.output_paths},
    };
    if (!r.ok)
        j["error"] = r.error;
    return j;
}

SequenceRecord record_from_json(const json& j)
{
    SequenceRecord r;
    r.sequence_id = j.at("sequence_id").get<std::string>();
    r.source_path = j.at("source_path").get<std::string>();
    r.split = parse_split(j.at("split").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config = config_from_json(j.at("config"));
    r.row = j.at("config_row").get<int>();
    r.n_frames = j.at("n_frames").get<int>();
    r.ok = j.at("status").get<std::string>() == "ok";
    if (j.contains("error"))
        r.error = j.at("error").get<std::string>();
    r.output_paths = j.at("output_paths").get<std::map<std::string, std::vector<std::string>>>();
    return r;
}

json options_to_json(const DatasetOptions& o)
{
    json j{
        {"overrides", o.overrides},
        {"noise_k", o.noise_k},
        {"k_bins", o.k_bins},
        {"bit_depth", o.bit_depth},
    };
    j["config_row"] = o.config_row ? json(*o.config_row) : json(nullptr);
    return j;
}

DatasetOptions options_from_json(const json& j)
{
    DatasetOptions o;
    o.overrides = j.at("overrides").get<std::vector<std::string>>();
    o.noise_k = j.at("noise_k").get<double>();
    o.k_bins = j.at("k_bins").get<int>();
    o.bit_depth = j.at("bit_depth").get<int>();
    if (!j.at("config_row").is_null())
        o.config_row = j.at("config_row").get<int>();
    return o;
}

std::int64_t resolve_timestamp(const DatasetOptions& o)
{
    if (o.timestamp)
        return *o.timestamp;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end != env && *end == '\0')
            return v;
    }
    return static_cast<std::int64_t>(std::time(nullptr));
}

fs::path sequence_dir(const DatasetRequest& req, const std::string& id, Split split)
{
    return req.out_root / to_string(split) / id;
}

std::vector<fs::path> list_frames(const fs::path& dir)
{
    std::vector<fs::path> frames;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            frames.push_back(entry.path());
    }
    std::sort(frames.begin(), frames.end());
    return frames;
}

/// The record stored in a verified marker, or nothing.
std::optional<SequenceRecord> verified_marker(const DatasetRequest& req, const std::string& id, Split split)
{
    const fs::path marker = sequence_dir(req, id, split) / marker_name;
    std::error_code ec;
    if (!fs::is_regular_file(marker, ec))
        return std::nullopt;
    try {
        const json j = json::parse(read_file(marker));
        SequenceRecord rec = record_from_json(j.at("record"));
        const auto& sums = j.at("checksums");
        if (rec.sequence_id != id || rec.split != split || !rec.ok)
            return std::nullopt;
        for (const auto& [kind, paths] : rec.output_paths) {
            for (const auto& p : paths) {
                if (!sums.contains(p) || sums.at(p).get<std::uint32_t>() != file_crc32(req.out_root / p))
                    return std::nullopt;
            }
        }
        return rec;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

SequenceRecord run_sequence(const DatasetRequest& req, const std::string& id, Split split)
{
    SequenceRecord rec;
    rec.sequence_id = id;
    rec.source_path = (req.source_root / id).generic_string();
    rec.split = split;
    rec.seed = derive_seed(req.master_seed, id);

    const fs::path dir = sequence_dir(req, id, split);
    fs::remove_all(dir);
    try {
        const DatasetOptions& o = req.options;
        const SampledConfig sampled = o.config_row ? sample_config(rec.seed, *o.config_row) : sample_config(rec.seed);
        rec.config = sampled.config;
        rec.row = sampled.row;
        for (const auto& ov : o.overrides)
            apply_override(rec.config, ov);
        const auto violations = validate_config(rec.config);
        if (!violations.empty()) {
            std::string msg = "invalid config:";
            for (const auto& v : violations)
                msg += " " + v + ";";
            throw ValidationError(msg);
        }

        const auto paths = list_frames(req.source_root / id);
        if (paths.empty())
            throw IoError("no .png frames in " + (req.source_root / id).string());
        std::vector<ImageBuffer> frames;
        frames.reserve(paths.size());
        for (const auto& p : paths) {
            try {
                frames.push_back(read_png(p).image);
            } catch (const std::exception& e) {
                throw IoError("unreadable frame " + p.filename().string() + ": " + e.what());
            }
            if (frames.back().shape() != frames.front().shape() ||
                frames.back().channels() != frames.front().channels())
                throw ValidationError("frame " + p.filename().string() + " differs in size from the first frame");
        }
        rec.n_frames = static_cast<int>(frames.size());

        SynthesisOptions so;
        so.k_bins = o.k_bins;
        so.noise_k = o.noise_k;
        const VideoResult video = degrade_video(frames, rec.config, rec.seed, so);

        json sums = json::object();
        for (const auto& kind : output_kinds) {
            fs::create_directories(dir / kind);
            auto& list = rec.output_paths[kind];
            for (int i = 0; i < rec.n_frames; ++i) {
                const auto& out = video.frames[static_cast<std::size_t>(i)];
                const ImageBuffer& img = kind == "gt"     ? frames[static_cast<std::size_t>(i)]
                                         : kind == "tilt" ? out.tilt
                                         : kind == "blur" ? out.blur
                                                          : out.turb;
                const fs::path file = dir / kind / frame_name(i);
                write_png(file, img, o.bit_depth);
                const std::string rel = fs::relative(file, req.out_root).generic_string();
                list.push_back(rel);
                sums[rel] = file_crc32(file);
            }
        }
        rec.ok = true;
        write_atomic(dir / marker_name, json{{"checksums", sums}, {"record", record_to_json(rec)}}.dump(2) + "\n");
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
        rec.output_paths.clear();
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    return rec;
}

void write_run_file(const DatasetRequest& req, std::int64_t timestamp)
{
    const json j{
        {"source_root", req.source_root.generic_string()},
        {"master_seed", req.master_seed},
        {"split_ratio", req.split_ratio},
        {"creation_timestamp", timestamp},
        {"options", options_to_json(req.options)},
    };
    write_atomic(req.out_root / run_file, j.dump(2) + "\n");
}

DatasetManifest run(const DatasetRequest& req, std::int64_t timestamp, bool reuse_completed)
{
    if (!(req.split_ratio >= 0.0 && req.split_ratio <= 1.0))
        throw ValidationError("split ratio must be in [0, 1]");
    if (req.options.workers < 1)
        throw ValidationError("workers must be at least 1");
    const auto ids = discover_sequences(req.source_root);
    if (ids.empty())
        throw ValidationError("no sequence directories under " + req.source_root.string());
    const auto splits = assign_splits(ids, req.master_seed, req.split_ratio);

    DatasetManifest manifest;
    manifest.tool_version = tool_version;
    manifest.master_seed = req.master_seed;
    manifest.split_ratio = req.split_ratio;
    manifest.creation_timestamp = timestamp;
    manifest.sequences.resize(ids.size());

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Split split = splits.at(ids[i]);
        if (reuse_completed) {
            if (auto rec = verified_marker(req, ids[i], split)) {
                manifest.sequences[i] = std::move(*rec);
                continue;
            }
        }
        pending.push_back(i);
    }

    std::atomic<std::size_t> next{0};
    std::atomic<int> finished{0};
    std::atomic<bool> stop{false};
    auto worker = [&] {
        while (!stop.load()) {
            const std::size_t k = next.fetch_add(1);
            if (k >= pending.size())
                return;
            const std::size_t i = pending[k];
            manifest.sequences[i] = run_sequence(req, ids[i], splits.at(ids[i]));
            const int done = finished.fetch_add(1) + 1;
            if (req.options.stop_after && done >= *req.options.stop_after)
                stop.store(true);
        }
    };
    {
        const int n = std::min<int>(req.options.workers, static_cast<int>(std::max<std::size_t>(pending.size(), 1)));
        std::vector<std::jthread> pool;
        for (int t = 1; t < n; ++t)
            pool.emplace_back(worker);
        worker();
    }
    if (static_cast<std::size_t>(finished.load()) < pending.size()) {
        manifest.complete = false;
        return manifest;
    }

    if (manifest.succeeded() == 0) {
        const auto& first = manifest.sequences.front();
        throw IoError("no sequence succeeded (" + first.sequence_id + ": " + first.error + ")");
    }

    const std::string text = manifest.to_json().dump(2) + "\n";
    const fs::path path = req.out_root / manifest_file;
    std::error_code ec;
    if (!(fs::is_regular_file(path, ec) && read_file(path) == text))
        write_atomic(path, text);
    return manifest;
}

} // namespace

std::string to_string(Split split)
{
    return split == Split::Train ? "train" : "test";
}

int DatasetManifest::succeeded() const
{
    return static_cast<int>(std::count_if(sequences.begin(), sequences.end(), [](const auto& s) { return s.ok; }));
}

int DatasetManifest::failed() const
{
    return static_cast<int>(sequences.size()) - succeeded();
}

json DatasetManifest::to_json() const
{
    json seqs = json::array();
    for (const auto& s : sequences)
        seqs.push_back(record_to_json(s));
    return json{
        {"schema_version", manifest_schema_version},
        {"global",
         {{"tool_version", tool_version},
          {"master_seed", master_seed},
          {"split_ratio", split_ratio},
          {"creation_timestamp", creation_timestamp}}},
        {"sequences", seqs},
    };
}

std::vector<std::string> discover_sequences(const fs::path& source_root)
{
    std::error_code ec;
    if (!fs::is_directory(source_root, ec))
        throw IoError("source root " + source_root.string() + " is not a directory");
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(source_root)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_directory() && !name.empty() && name.front() != '.')
            ids.push_back(name);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::map<std::string, Split> assign_splits(const std::vector<std::string>& ids, std::uint64_t master_seed,
                                           double split_ratio)
{
    const std::uint64_t split_seed = derive_seed(master_seed, stream::split);
    std::vector<std::pair<std::uint64_t, std::string>> keyed;
    keyed.reserve(ids.size());
    for (const auto& id : ids)
        keyed.emplace_back(derive_seed(split_seed, id), id);
    std::sort(keyed.begin(), keyed.end());
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(ids.size()) * split_ratio));
    std::map<std::string, Split> out;
    for (std::size_t i = 0; i < keyed.size(); ++i)
        out[keyed[i].second] = i < n_train ? Split::Train : Split::Test;
    return out;
}

DatasetManifest generate_dataset(const DatasetRequest& request)
{
    DatasetRequest req = request;
    req.source_root = fs::absolute(req.source_root).lexically_normal();
    fs::create_directories(req.out_root);
    std::error_code ec;
    fs::remove(req.out_root / manifest_file, ec);
    const std::int64_t timestamp = resolve_timestamp(req.options);
    write_run_file(req, timestamp);
    return run(req, timestamp, false);
}

DatasetManifest generate_dataset(const fs::path& source_root, const fs::path& out_root, std::uint64_t master_seed,
                                 double split_ratio, const DatasetOptions& options)
{
    return generate_dataset(DatasetRequest{source_root, out_root, master_seed, split_ratio, options});
}

DatasetManifest resume(const fs::path& out_root, std::optional<DatasetRequest> fallback)
{
    const fs::path run_path = out_root / run_file;
    std::error_code ec;
    if (!fs::is_regular_file(run_path, ec)) {
        if (!fallback)
            throw IoError("nothing to resume: " + run_path.string() + " does not exist");
        DatasetRequest req = *fallback;
        req.out_root = out_root;
        return generate_dataset(req);
    }

    DatasetRequest req;
    std::int64_t timestamp = 0;
    try {
        const json j = json::parse(read_file(run_path));
        req.source_root = j.at("source_root").get<std::string>();
        req.master_seed = j.at("master_seed").get<std::uint64_t>();
        req.split_ratio = j.at("split_ratio").get<double>();
        timestamp = j.at("creation_timestamp").get<std::int64_t>();
        req.options = options_from_json(j.at("options"));
    } catch (const json::exception& e) {
        throw IoError("corrupted " + run_path.string() + ": " + e.what());
    }
    req.out_root = out_root;
    if (fallback) {
        if (fallback->master_seed != req.master_seed || fallback->split_ratio != req.split_ratio ||
            fs::absolute(fallback->source_root).lexically_normal() != req.source_root)
            throw ValidationError("resume parameters differ from the run recorded in " + run_path.string());
        req.options.workers = fallback->options.workers;
        req.options.stop_after = fallback->options.stop_after;
    }
    return run(req, timestamp, true);
}

int exit_code(const DatasetManifest& manifest)
{
    return manifest.failed() > 0 ? 2 : 0;
}

} // namespace turbsynth
