#include "oracles.hpp"

#include "turbsynth/dataset.hpp"
#include "turbsynth/errors.hpp"
#include "turbsynth/io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>

using namespace turbsynth;
namespace fs = std::filesystem;

namespace {

fs::path make_source(const std::string& name, int sequences, int frames, int width = 24, int height = 20)
{
    const fs::path root = oracle::temp_dir(name);
    for (int s = 0; s < sequences; ++s) {
        char id[32];
        std::snprintf(id, sizeof id, "seq%03d", s);
        fs::create_directories(root / id);
        for (int f = 0; f < frames; ++f) {
            char file[32];
            std::snprintf(file, sizeof file, "%06d.png", f);
            write_png(root / id / file, oracle::test_image(width, height, static_cast<std::uint64_t>(s * 100 + f)));
        }
    }
    return root;
}

DatasetOptions fixed_time()
{
    DatasetOptions o;
    o.timestamp = 1700000000;
    return o;
}

std::string read_all(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("split counts and order independence")
{
    std::vector<std::string> ids;
    for (int i = 0; i < 100; ++i)
        ids.push_back("video_" + std::to_string(i));
    const auto a = assign_splits(ids, 7, default_split_ratio);
    const auto train = std::count_if(a.begin(), a.end(), [](const auto& kv) { return kv.second == Split::Train; });
    CHECK(train == 78);

    std::vector<std::string> shuffled = ids;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(3));
    CHECK(assign_splits(shuffled, 7, default_split_ratio) == a);
    CHECK(assign_splits(ids, 8, default_split_ratio) != a);

    std::vector<std::string> twenty(ids.begin(), ids.begin() + 20);
    const auto b = assign_splits(twenty, 1, default_split_ratio);
    CHECK(std::count_if(b.begin(), b.end(), [](const auto& kv) { return kv.second == Split::Train; }) == 15);
}

TEST_CASE("one sequence produces four aligned outputs per frame")
{
    const fs::path src = make_source("ds_one_src", 1, 5);
    const fs::path out = oracle::temp_dir("ds_one_out");
    const DatasetManifest m = generate_dataset(src, out, 3, 0.0, fixed_time());
    REQUIRE(m.sequences.size() == 1);
    const SequenceRecord& r = m.sequences[0];
    CHECK(r.ok);
    CHECK(r.split == Split::Test);
    CHECK(r.n_frames == 5);
    int count = 0;
    for (const auto& kind : {"gt", "tilt", "blur", "turb"}) {
        REQUIRE(r.output_paths.at(kind).size() == 5);
        for (int f = 0; f < 5; ++f) {
            const fs::path p = out / r.output_paths.at(kind)[f];
            REQUIRE(fs::exists(p));
            const DecodedImage d = read_png(p);
            CHECK(d.image.width() == 24);
            CHECK(d.image.height() == 20);
            ++count;
        }
    }
    CHECK(count == 20);
    CHECK(read_png(out / r.output_paths.at("gt")[2]).image == read_png(src / "seq000" / "000002.png").image);
    CHECK(r.output_paths.at("turb")[4] == "test/seq000/turb/000004.png");
    CHECK(fs::exists(out / "test/seq000/.complete"));
    CHECK(exit_code(m) == 0);

    const auto j = nlohmann::json::parse(read_all(out / "manifest.json"));
    CHECK(j.at("schema_version") == manifest_schema_version);
    CHECK(j.at("global").at("creation_timestamp") == 1700000000);
    CHECK(j.at("sequences")[0].at("config").contains("height"));
}

TEST_CASE("runs are deterministic across repeats and worker counts")
{
    const fs::path src = make_source("ds_det_src", 6, 2);
    const fs::path a = oracle::temp_dir("ds_det_a");
    const fs::path b = oracle::temp_dir("ds_det_b");
    DatasetOptions o = fixed_time();
    generate_dataset(src, a, 11, default_split_ratio, o);
    o.workers = 4;
    generate_dataset(src, b, 11, default_split_ratio, o);
    CHECK(oracle::tree_digest(a) == oracle::tree_digest(b));

    o.workers = 1;
    generate_dataset(src, b, 11, default_split_ratio, o);
    CHECK(oracle::tree_digest(a) == oracle::tree_digest(b));

    const fs::path c = oracle::temp_dir("ds_det_c");
    generate_dataset(src, c, 12, default_split_ratio, o);
    CHECK(oracle::tree_digest(a) != oracle::tree_digest(c));
}

TEST_CASE("kill and resume reproduces the uninterrupted tree")
{
    const fs::path src = make_source("ds_resume_src", 6, 2);
    const fs::path full = oracle::temp_dir("ds_resume_full");
    const fs::path part = oracle::temp_dir("ds_resume_part");
    generate_dataset(src, full, 5, default_split_ratio, fixed_time());

    DatasetOptions o = fixed_time();
    o.stop_after = 3;
    const DatasetManifest interrupted = generate_dataset(src, part, 5, default_split_ratio, o);
    CHECK(!interrupted.complete);
    CHECK(!fs::exists(part / "manifest.json"));

    const DatasetManifest resumed = resume(part);
    CHECK(resumed.complete);
    CHECK(oracle::tree_digest(full) == oracle::tree_digest(part));

    // A complete run resumes as a no-op.
    const auto before = fs::last_write_time(part / "manifest.json");
    const std::string digest = oracle::tree_digest(part);
    resume(part);
    CHECK(fs::last_write_time(part / "manifest.json") == before);
    CHECK(oracle::tree_digest(part) == digest);
}

TEST_CASE("corrupted outputs and markers are regenerated on resume")
{
    const fs::path src = make_source("ds_corrupt_src", 3, 2);
    const fs::path out = oracle::temp_dir("ds_corrupt_out");
    const DatasetManifest m = generate_dataset(src, out, 9, 0.5, fixed_time());
    const std::string digest = oracle::tree_digest(out);

    const SequenceRecord& r = m.sequences[1];
    std::ofstream(out / r.output_paths.at("blur")[0], std::ios::binary | std::ios::trunc) << "garbage";
    const fs::path marker = out / to_string(m.sequences[2].split) / m.sequences[2].sequence_id / ".complete";
    std::ofstream(marker, std::ios::trunc) << "{not json";
    resume(out);
    CHECK(oracle::tree_digest(out) == digest);
}

TEST_CASE("resume without a run falls back to a fresh run")
{
    const fs::path src = make_source("ds_fresh_src", 2, 1);
    const fs::path a = oracle::temp_dir("ds_fresh_a");
    const fs::path b = oracle::temp_dir("ds_fresh_b");
    generate_dataset(src, a, 4, 0.5, fixed_time());
    resume(b, DatasetRequest{src, b, 4, 0.5, fixed_time()});
    CHECK(oracle::tree_digest(a) == oracle::tree_digest(b));
    CHECK_THROWS_AS(resume(oracle::temp_dir("ds_fresh_c")), IoError);
    CHECK_THROWS_AS(resume(b, DatasetRequest{src, b, 5, 0.5, fixed_time()}), ValidationError);
}

TEST_CASE("unreadable frames fail only their sequence")
{
    const fs::path src = make_source("ds_fail_src", 3, 2);
    std::ofstream(src / "seq001" / "000001.png", std::ios::binary | std::ios::trunc) << "broken";
    const fs::path out = oracle::temp_dir("ds_fail_out");
    const DatasetManifest m = generate_dataset(src, out, 2, 0.5, fixed_time());
    CHECK(m.succeeded() == 2);
    CHECK(m.failed() == 1);
    CHECK(!m.sequences[1].ok);
    CHECK(m.sequences[1].error.find("unreadable frame 000001.png") != std::string::npos);
    CHECK(exit_code(m) == 2);
    CHECK(!fs::exists(out / to_string(m.sequences[1].split) / "seq001"));
    const auto j = nlohmann::json::parse(read_all(out / "manifest.json"));
    CHECK(j.at("sequences")[1].at("status") == "failed");

    const fs::path bad = oracle::temp_dir("ds_allbad_src");
    fs::create_directories(bad / "only");
    std::ofstream(bad / "only" / "000000.png") << "x";
    CHECK_THROWS_AS(generate_dataset(bad, oracle::temp_dir("ds_allbad_out"), 1, 0.5, fixed_time()), IoError);
    CHECK_THROWS_AS(generate_dataset(oracle::temp_dir("ds_empty_src"), oracle::temp_dir("ds_empty_out"), 1, 0.5),
                    ValidationError);
}

TEST_CASE("pinned row and overrides reach every sequence")
{
    const fs::path src = make_source("ds_row_src", 3, 1);
    DatasetOptions o = fixed_time();
    o.config_row = 5;
    o.overrides = {"exposure_ms=3"};
    const DatasetManifest m = generate_dataset(src, oracle::temp_dir("ds_row_out"), 1, 0.5, o);
    for (const auto& s : m.sequences) {
        CHECK(s.row == 5);
        CHECK(s.config.exposure_time == doctest::Approx(3e-3));
    }
}
