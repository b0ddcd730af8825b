#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "phasegen/motion_json.hpp"
#include "phasegen/synth.hpp"

using namespace phasegen;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("phasegen_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool clips_equal(const MotionClip& a, const MotionClip& b) {
    if (a.fps != b.fps || a.length() != b.length() || a.text != b.text || a.t_s != b.t_s ||
        a.t_e != b.t_e)
        return false;
    for (int t = 0; t < a.length(); ++t) {
        if (a.frames[t].root_position != b.frames[t].root_position) return false;
        for (size_t j = 0; j < a.frames[t].joint_rotations.size(); ++j) {
            const Quat &qa = a.frames[t].joint_rotations[j], &qb = b.frames[t].joint_rotations[j];
            if (qa.w != qb.w || qa.x != qb.x || qa.y != qb.y || qa.z != qb.z) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("motion json: save/load round-trips a dataset field-by-field") {
    CorpusSpec spec;
    spec.clips_per_family = 3;
    const MotionDataset ds = synth_corpus(spec, 11);
    const fs::path dir = temp_dir("roundtrip");

    save_dataset(ds, dir);
    const MotionDataset loaded = load_dataset(dir);

    REQUIRE(loaded.size() == ds.size());
    CHECK(loaded.skeleton_name == ds.skeleton_name);
    CHECK(loaded.skeleton.joint_names == ds.skeleton.joint_names);
    CHECK(loaded.skeleton.parents == ds.skeleton.parents);
    for (int i = 0; i < ds.size(); ++i) {
        CHECK(loaded.splits[i] == ds.splits[i]);
        CHECK(clips_equal(loaded.clips[i], ds.clips[i]));
    }
    fs::remove_all(dir);
}

TEST_CASE("motion json: fps 12.5 round-trips exactly") {
    CorpusSpec spec;
    spec.clips_per_family = 1;
    spec.families = {"jump"};
    spec.fps = 12.5;
    const MotionDataset ds = synth_corpus(spec, 5);
    const fs::path dir = temp_dir("fps");
    save_dataset(ds, dir);
    const MotionDataset loaded = load_dataset(dir);
    CHECK(loaded.clips[0].fps == 12.5);
    fs::remove_all(dir);
}

TEST_CASE("motion json: missing fps is a parse error naming the field") {
    const fs::path dir = temp_dir("missing_fps");
    const fs::path file = dir / "bad.json";
    {
        std::ofstream f(file);
        f << R"({"skeleton": {"joints": ["a"], "parents": [-1], "offsets": [[0,0,0]]},
                 "text": null, "t_s": null, "t_e": null,
                 "frames": [{"root": [0,0,0], "rot": [[1,0,0,0]]},
                            {"root": [0,0,0], "rot": [[1,0,0,0]]}]})";
    }
    try {
        load_clip(file);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("fps") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("motion json: malformed json is a parse error with context") {
    const fs::path dir = temp_dir("malformed");
    const fs::path file = dir / "broken.json";
    {
        std::ofstream f(file);
        f << "{ not json";
    }
    CHECK_THROWS_AS(load_clip(file), ParseError);
    fs::remove_all(dir);
}

TEST_CASE("motion json: missing file is an io error") {
    CHECK_THROWS_AS(load_clip("/nonexistent/path/clip.json"), IoError);
}
