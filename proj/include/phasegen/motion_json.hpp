#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "phasegen/motion.hpp"

namespace phasegen {

using json = nlohmann::json;

// Motion JSON, one clip per file:
//   {"fps": number,
//    "skeleton": {"joints": [...], "parents": [...], "offsets": [[x,y,z]...]},
//    "text": string|null, "t_s": int|null, "t_e": int|null,
//    "frames": [{"root": [x,y,z], "rot": [[w,x,y,z]...]}...]}
// t_s/t_e are 0-based frame indices, t_e inclusive.

namespace detail {

inline const json& require_field(const json& j, const std::string& key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(ctx + ": missing required field \"" + key + "\"");
    return *it;
}

inline Vec3 parse_vec3(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 3)
        throw ParseError(ctx + ": expected a 3-element array");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace detail

inline json skeleton_to_json(const Skeleton& skeleton) {
    json j;
    j["joints"] = skeleton.joint_names;
    j["parents"] = skeleton.parents;
    json offsets = json::array();
    for (const Vec3& o : skeleton.offsets) offsets.push_back({o.x(), o.y(), o.z()});
    j["offsets"] = offsets;
    return j;
}

inline Skeleton skeleton_from_json(const json& j) {
    Skeleton s;
    const json& joints = detail::require_field(j, "joints", "skeleton");
    const json& parents = detail::require_field(j, "parents", "skeleton");
    const json& offsets = detail::require_field(j, "offsets", "skeleton");
    s.joint_names = joints.get<std::vector<std::string>>();
    s.parents = parents.get<std::vector<int>>();
    for (size_t i = 0; i < offsets.size(); ++i)
        s.offsets.push_back(detail::parse_vec3(offsets[i], "skeleton.offsets[" + std::to_string(i) + "]"));
    s.validate();
    return s;
}

inline json clip_to_json(const MotionClip& clip, const Skeleton& skeleton) {
    json j;
    j["fps"] = clip.fps;
    j["skeleton"] = skeleton_to_json(skeleton);
    j["text"] = clip.text ? json(*clip.text) : json(nullptr);
    j["t_s"] = clip.t_s ? json(*clip.t_s) : json(nullptr);
    j["t_e"] = clip.t_e ? json(*clip.t_e) : json(nullptr);
    json frames = json::array();
    for (const Pose& p : clip.frames) {
        json f;
        f["root"] = {p.root_position.x(), p.root_position.y(), p.root_position.z()};
        json rots = json::array();
        for (const Quat& q : p.joint_rotations) rots.push_back({q.w, q.x, q.y, q.z});
        f["rot"] = rots;
        frames.push_back(std::move(f));
    }
    j["frames"] = std::move(frames);
    return j;
}

struct ParsedClip {
    MotionClip clip;
    Skeleton skeleton;
};

inline ParsedClip clip_from_json(const json& j, const std::string& ctx = "clip") {
    ParsedClip out;
    out.clip.fps = detail::require_field(j, "fps", ctx).get<double>();
    out.skeleton = skeleton_from_json(detail::require_field(j, "skeleton", ctx));
    const json& text = detail::require_field(j, "text", ctx);
    if (!text.is_null()) out.clip.text = text.get<std::string>();
    const json& ts = detail::require_field(j, "t_s", ctx);
    if (!ts.is_null()) out.clip.t_s = ts.get<int>();
    const json& te = detail::require_field(j, "t_e", ctx);
    if (!te.is_null()) out.clip.t_e = te.get<int>();
    const json& frames = detail::require_field(j, "frames", ctx);
    for (size_t t = 0; t < frames.size(); ++t) {
        const std::string fctx = ctx + ".frames[" + std::to_string(t) + "]";
        const json& f = frames[t];
        Pose p;
        p.root_position = detail::parse_vec3(detail::require_field(f, "root", fctx), fctx + ".root");
        const json& rots = detail::require_field(f, "rot", fctx);
        for (const json& r : rots) {
            if (!r.is_array() || r.size() != 4)
                throw ParseError(fctx + ".rot: expected [w,x,y,z]");
            p.joint_rotations.push_back(
                Quat{r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()});
        }
        out.clip.frames.push_back(std::move(p));
    }
    out.clip.validate(out.skeleton);
    return out;
}

inline void save_clip(const MotionClip& clip, const Skeleton& skeleton,
                      const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << clip_to_json(clip, skeleton).dump(1) << "\n";
    if (!f) throw IoError("write failed: " + path.string());
}

inline ParsedClip load_clip(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path.string());
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return clip_from_json(j, path.filename().string());
}

// Dataset directory: clip_NNNNN.json files plus manifest.json with split
// membership and the prompt vocabulary collected at corpus creation.
inline void save_dataset(const MotionDataset& dataset, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    json manifest;
    manifest["skeleton_name"] = dataset.skeleton_name;
    json entries = json::array();
    for (int i = 0; i < dataset.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "clip_%05d.json", i);
        save_clip(dataset.clips[i], dataset.skeleton, dir / name);
        entries.push_back({{"file", name}, {"split", dataset.splits[i]}});
    }
    manifest["clips"] = std::move(entries);
    std::ofstream f(dir / "manifest.json");
    if (!f) throw IoError("cannot open for writing: " + (dir / "manifest.json").string());
    f << manifest.dump(1) << "\n";
}

inline MotionDataset load_dataset(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const fs::path manifest_path = dir / "manifest.json";
    std::ifstream f(manifest_path);
    if (!f) throw IoError("cannot open: " + manifest_path.string());
    json manifest;
    try {
        f >> manifest;
    } catch (const json::parse_error& e) {
        throw ParseError(manifest_path.string() + ": " + e.what());
    }
    MotionDataset out;
    out.skeleton_name = detail::require_field(manifest, "skeleton_name", "manifest").get<std::string>();
    const json& entries = detail::require_field(manifest, "clips", "manifest");
    if (entries.empty()) throw ValidationError("dataset: empty manifest");
    bool first = true;
    for (const json& e : entries) {
        const std::string file =
            detail::require_field(e, "file", "manifest.clips").get<std::string>();
        ParsedClip pc = load_clip(dir / file);
        if (first) {
            out.skeleton = pc.skeleton;
            first = false;
        } else if (pc.skeleton.joint_count() != out.skeleton.joint_count()) {
            throw StructuralError("dataset: inconsistent skeleton in " + file);
        }
        out.clips.push_back(std::move(pc.clip));
        out.splits.push_back(detail::require_field(e, "split", "manifest.clips").get<std::string>());
    }
    return out;
}

}  // namespace phasegen
