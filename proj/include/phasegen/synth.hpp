#pragma once

#include <string>
#include <vector>

#include "phasegen/motion.hpp"
#include "phasegen/rng.hpp"

namespace phasegen {

// Procedural desk-scale corpus: four motion families on a small humanoid.
// Every clip is ramp-in + exactly-periodic primary segment + ramp-out.
// Joint rotations follow low-order sinusoids about fixed per-joint axes, so
// the segment is exactly periodic at signal level and the ramps are affine
// in t (in angle space). Ground-truth (t_s, t_e) land in the clip annotation.

inline Skeleton standard_skeleton() {
    Skeleton s;
    auto add = [&s](const std::string& name, int parent, double x, double y, double z) {
        s.joint_names.push_back(name);
        s.parents.push_back(parent);
        s.offsets.emplace_back(x, y, z);
    };
    add("pelvis", Skeleton::kRootParent, 0.0, 0.0, 0.0);
    add("spine", 0, 0.0, 0.25, 0.0);
    add("head", 1, 0.0, 0.32, 0.0);
    add("l_shoulder", 1, 0.20, 0.22, 0.0);
    add("l_elbow", 3, 0.28, 0.0, 0.0);
    add("r_shoulder", 1, -0.20, 0.22, 0.0);
    add("r_elbow", 5, -0.28, 0.0, 0.0);
    add("l_hip", 0, 0.11, -0.08, 0.0);
    add("l_knee", 7, 0.0, -0.42, 0.0);
    add("r_hip", 0, -0.11, -0.08, 0.0);
    add("r_knee", 9, 0.0, -0.42, 0.0);
    s.validate();
    return s;
}

namespace synth_detail {

// One sinusoidal rotation channel: joint rotates about a fixed axis by
// baseline + amplitude * sin(2*pi*(cycles * t / period) + phase).
struct RotChannel {
    int joint;
    Vec3 axis;
    double baseline;
    double amplitude;
    int cycles;  // integer cycles per period keeps the segment exactly periodic
    double phase;
};

struct RootChannel {
    int axis;  // 0=x, 1=y, 2=z
    double amplitude;
    int cycles;
    double phase;
};

struct FamilyDef {
    std::string name;
    int period_frames;
    std::vector<RotChannel> rot;
    std::vector<RootChannel> root;
    std::vector<std::string> prompts;
};

inline const std::vector<FamilyDef>& family_table() {
    static const std::vector<FamilyDef> table = [] {
        const Vec3 X(1, 0, 0), Y(0, 1, 0), Z(0, 0, 1);
        std::vector<FamilyDef> t;
        // joint indices match standard_skeleton()
        t.push_back({"walk forward",
                     24,
                     {{7, X, 0.0, 0.55, 1, 0.0},            // l_hip
                      {9, X, 0.0, 0.55, 1, kPi},            // r_hip
                      {8, X, 0.35, 0.35, 1, kPi / 2},       // l_knee
                      {10, X, 0.35, 0.35, 1, kPi * 1.5},    // r_knee
                      {3, X, 0.0, 0.30, 1, kPi},            // l_shoulder swings opposite l_hip
                      {5, X, 0.0, 0.30, 1, 0.0}},           // r_shoulder
                     {{1, 0.035, 2, 0.0}, {0, 0.02, 1, 0.0}},
                     {"a person walks forward",
                      "someone walks forward",
                      "the person is walking forward"}});
        t.push_back({"wave right arm",
                     20,
                     {{5, Z, 1.1, 0.25, 1, 0.0},            // r_shoulder lifted, small sway
                      {6, Y, 0.0, 0.85, 2, 0.0}},           // r_elbow does the wave
                     {},
                     {"a person waves the right arm",
                      "someone waves with the right arm",
                      "the person is waving the right arm"}});
        t.push_back({"turn in place",
                     32,
                     {{0, Y, 0.0, 1.15, 1, 0.0},            // pelvis yaw oscillation
                      {1, Y, 0.0, 0.35, 1, 0.5},            // spine follows with lag
                      {3, X, 0.0, 0.18, 1, 0.0},
                      {5, X, 0.0, 0.18, 1, kPi}},
                     {{1, 0.015, 2, 0.0}},
                     {"a person turns in place",
                      "someone turns in place",
                      "the person is turning around in place"}});
        t.push_back({"jump",
                     16,
                     {{7, X, 0.25, 0.25, 1, 0.0},           // hips and knees flex together
                      {9, X, 0.25, 0.25, 1, 0.0},
                      {8, X, 0.45, 0.45, 1, kPi / 3},
                      {10, X, 0.45, 0.45, 1, kPi / 3},
                      {3, Z, 0.3, 0.3, 1, 0.0},
                      {5, Z, -0.3, 0.3, 1, kPi}},
                     {{1, 0.12, 1, -kPi / 2}},
                     {"a person jumps up and down",
                      "someone jumps in place",
                      "the person is jumping up and down"}});
        return t;
    }();
    return table;
}

inline const FamilyDef& find_family(const std::string& name) {
    for (const FamilyDef& f : family_table())
        if (f.name == name) return f;
    throw ConfigError("synth_corpus: unknown motion family \"" + name + "\"");
}

}  // namespace synth_detail

struct CorpusSpec {
    std::vector<std::string> families = {"walk forward", "wave right arm", "turn in place",
                                         "jump"};
    int clips_per_family = 50;
    double fps = 12.5;
    int min_periods = 2;
    int max_periods = 3;
    int min_ramp = 6;
    int max_ramp = 14;
    int pad_to = 0;  // 0 = keep natural length
};

namespace synth_detail {

inline MotionClip make_clip(const Skeleton& skeleton, const FamilyDef& family,
                            const CorpusSpec& spec, Rng& rng) {
    const int P = family.period_frames;
    const int n_periods = static_cast<int>(rng.uniform_int(spec.min_periods, spec.max_periods));
    const int ramp_in = static_cast<int>(rng.uniform_int(spec.min_ramp, spec.max_ramp));
    const int ramp_out = static_cast<int>(rng.uniform_int(spec.min_ramp, spec.max_ramp));
    const double amp_scale = rng.uniform(0.85, 1.15);
    const double tau = rng.uniform(0.0, static_cast<double>(P));  // global time shift
    const std::string prompt =
        family.prompts[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(family.prompts.size()) - 1))];

    const int t_s = ramp_in;
    const int t_e = t_s + n_periods * P;
    const int total = t_e + 1 + ramp_out;

    const Vec3 root_base(0.0, 0.95, 0.0);
    // Ramp-out settles into a slightly leaned-through posture rather than the
    // exact starting rest pose; the first and last frames of a clip then
    // differ, which keeps segment detection from latching onto the full span.
    const double settle_scale = -0.25;

    // deviation-from-rest at periodic time t (frames since t_s)
    auto rot_angle = [&](const RotChannel& c, double t) {
        return c.baseline + amp_scale * c.amplitude *
                                std::sin(kTwoPi * c.cycles * (t + tau) / P + c.phase);
    };
    auto root_dev = [&](const RootChannel& c, double t) {
        return amp_scale * c.amplitude * std::sin(kTwoPi * c.cycles * (t + tau) / P + c.phase);
    };

    MotionClip clip;
    clip.fps = spec.fps;
    clip.text = prompt;
    clip.t_s = t_s;
    clip.t_e = t_e;
    clip.frames.resize(total);

    for (int t = 0; t < total; ++t) {
        // scale factor is affine in t inside each ramp and 1 in the segment
        double scale = 1.0, tp = 0.0;
        if (t < t_s) {
            scale = static_cast<double>(t) / t_s;
            tp = 0.0;
        } else if (t <= t_e) {
            tp = static_cast<double>(t - t_s);
        } else {
            const double u = static_cast<double>(t - t_e) / (total - 1 - t_e);
            scale = 1.0 + (settle_scale - 1.0) * u;
            tp = static_cast<double>(t_e - t_s);
        }

        Pose pose;
        pose.root_position = root_base;
        pose.joint_rotations.assign(skeleton.joint_count(), Quat::identity());
        for (const RotChannel& c : family.rot) {
            const double angle = scale * rot_angle(c, tp);
            pose.joint_rotations[c.joint] =
                (pose.joint_rotations[c.joint] * Quat::from_axis_angle(c.axis, angle)).canonical();
        }
        for (const RootChannel& c : family.root)
            pose.root_position[c.axis] += scale * root_dev(c, tp);
        clip.frames[t] = pose;
    }
    return clip;
}

}  // namespace synth_detail

// Deterministic given seed: clip i of each family draws from its own RNG
// stream, so generation could shard per-clip without changing output.
inline MotionDataset synth_corpus(const CorpusSpec& spec, std::uint64_t seed) {
    MotionDataset ds;
    ds.skeleton = standard_skeleton();
    ds.skeleton_name = "standard-11";
    Rng root(seed, "corpus");
    for (const std::string& fname : spec.families) {
        const synth_detail::FamilyDef& family = synth_detail::find_family(fname);
        for (int i = 0; i < spec.clips_per_family; ++i) {
            Rng rng = root.fork(fname + "#" + std::to_string(i));
            MotionClip clip = synth_detail::make_clip(ds.skeleton, family, spec, rng);
            if (spec.pad_to > 0) clip = pad_or_trim(clip, spec.pad_to);
            ds.clips.push_back(std::move(clip));
            // 8/1/1 train/val/test split, fixed by index
            const int slot = i % 10;
            ds.splits.push_back(slot < 8 ? "train" : (slot == 8 ? "val" : "test"));
        }
    }
    return ds;
}

// Prompt vocabulary of the corpus templates; closed at desk scale.
inline std::vector<std::string> corpus_prompts(const CorpusSpec& spec) {
    std::vector<std::string> out;
    for (const std::string& fname : spec.families) {
        const synth_detail::FamilyDef& family = synth_detail::find_family(fname);
        out.insert(out.end(), family.prompts.begin(), family.prompts.end());
    }
    return out;
}

}  // namespace phasegen
