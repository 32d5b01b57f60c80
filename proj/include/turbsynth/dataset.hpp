#pragma once

// Dataset generation: every sequence directory under a source root is
// degraded with its own sampled config and written as aligned
// gt/tilt/blur/turb frame sets, split into train and test.
//
// Layout: out_root/{train|test}/{sequence_id}/{gt|tilt|blur|turb}/%06d.png,
// a `.complete` marker per finished sequence, `run.json` with the run
// parameters, and `manifest.json` written last.

#include "turbsynth/degrade.hpp"
#include "turbsynth/optics.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace turbsynth {

inline constexpr const char* tool_version = "0.1.0";
inline constexpr int manifest_schema_version = 1;
/// Default train fraction, 3988 of 5083 sequences.
inline constexpr double default_split_ratio = 3988.0 / 5083.0;

struct DatasetOptions {
    int workers = 1;
    /// Pin every sequence to one config row (1-based).
    std::optional<int> config_row;
    /// `key=value` assignments applied after sampling.
    std::vector<std::string> overrides;
    double noise_k = 0.0;
    int k_bins = 16;
    int bit_depth = 8;
    /// Seconds since the epoch for the manifest; defaults to
    /// SOURCE_DATE_EPOCH, then the wall clock.
    std::optional<std::int64_t> timestamp;
    /// Stop scheduling once this many sequences have finished and return
    /// without a manifest, as if the process had been killed.
    std::optional<int> stop_after;
};

struct DatasetRequest {
    std::filesystem::path source_root;
    std::filesystem::path out_root;
    std::uint64_t master_seed = 0;
    double split_ratio = default_split_ratio;
    DatasetOptions options;
};

enum class Split { Train, Test };
std::string to_string(Split split);

struct SequenceRecord {
    std::string sequence_id;
    std::string source_path;
    Split split = Split::Test;
    std::uint64_t seed = 0;
    OpticalConfig config;
    int row = 0;
    int n_frames = 0;
    bool ok = false;
    std::string error;
    /// Output kind (gt, tilt, blur, turb) to paths relative to out_root.
    std::map<std::string, std::vector<std::string>> output_paths;
};

struct DatasetManifest {
    std::string tool_version;
    std::uint64_t master_seed = 0;
    double split_ratio = 0.0;
    std::int64_t creation_timestamp = 0;
    std::vector<SequenceRecord> sequences;
    /// False when generation stopped early (stop_after); no manifest file
    /// was written.
    bool complete = true;

    int succeeded() const;
    int failed() const;
    nlohmann::json to_json() const;
};

/// Sequence directories (sorted) directly below source_root.
std::vector<std::string> discover_sequences(const std::filesystem::path& source_root);

/// Splits ids by hashed key: the first floor(n * ratio) keys go to train.
std::map<std::string, Split> assign_splits(const std::vector<std::string>& ids, std::uint64_t master_seed,
                                           double split_ratio);

/// Fresh run: every sequence is (re)generated. Throws ValidationError when
/// the source has no sequences or the ratio is outside [0, 1], and
/// IoError when no sequence succeeds.
DatasetManifest generate_dataset(const DatasetRequest& request);
DatasetManifest generate_dataset(const std::filesystem::path& source_root, const std::filesystem::path& out_root,
                                 std::uint64_t master_seed, double split_ratio, const DatasetOptions& options = {});

/// Continues a run from out_root/run.json, skipping sequences whose
/// completion marker verifies. With no run.json, `fallback` starts a fresh
/// run; without it this throws IoError.
DatasetManifest resume(const std::filesystem::path& out_root, std::optional<DatasetRequest> fallback = {});

/// 0 all succeeded, 2 some failed.
int exit_code(const DatasetManifest& manifest);

} // namespace turbsynth
