#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "phasegen/common.hpp"

namespace phasegen {

using Vec3 = Eigen::Vector3d;

// Unit quaternion, canonical sign w >= 0. Stored (w, x, y, z).
struct Quat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    static Quat identity() { return {1.0, 0.0, 0.0, 0.0}; }

    static Quat from_axis_angle(const Vec3& axis, double angle) {
        const double n = axis.norm();
        if (n < 1e-12) return identity();
        const double h = 0.5 * angle;
        const double s = std::sin(h) / n;
        return Quat{std::cos(h), axis.x() * s, axis.y() * s, axis.z() * s}.canonical();
    }

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    Quat normalized() const {
        const double n = norm();
        if (n < 1e-12) return identity();
        return {w / n, x / n, y / n, z / n};
    }

    // Flip sign so w >= 0 (q and -q encode the same rotation).
    Quat canonical() const {
        if (w < 0.0) return {-w, -x, -y, -z};
        return *this;
    }

    Quat operator*(const Quat& r) const {
        return {w * r.w - x * r.x - y * r.y - z * r.z,
                w * r.x + x * r.w + y * r.z - z * r.y,
                w * r.y - x * r.z + y * r.w + z * r.x,
                w * r.z + x * r.y - y * r.x + z * r.w};
    }

    Vec3 rotate(const Vec3& v) const {
        // v' = v + 2w(q_v x v) + 2 q_v x (q_v x v)
        const Vec3 qv(x, y, z);
        const Vec3 t = 2.0 * qv.cross(v);
        return v + w * t + qv.cross(t);
    }

    bool is_finite() const {
        return std::isfinite(w) && std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

struct Skeleton {
    static constexpr int kRootParent = -1;

    std::vector<std::string> joint_names;
    std::vector<int> parents;           // parent[i] < i, root has kRootParent
    std::vector<Vec3> offsets;          // rest-pose bone offsets, meters

    int joint_count() const { return static_cast<int>(joint_names.size()); }

    void validate() const {
        const int n = joint_count();
        if (n < 1 || static_cast<int>(parents.size()) != n ||
            static_cast<int>(offsets.size()) != n)
            throw StructuralError("skeleton: joint_names/parents/offsets sizes disagree");
        int roots = 0;
        for (int i = 0; i < n; ++i) {
            if (parents[i] == kRootParent)
                ++roots;
            else if (parents[i] < 0 || parents[i] >= i)
                throw StructuralError("skeleton: parents must be topologically sorted (parent < joint)");
            if (!offsets[i].allFinite())
                throw ValidationError("skeleton: non-finite offset at joint " + std::to_string(i));
        }
        if (roots != 1) throw StructuralError("skeleton: expected exactly one root");
    }

    // Mean bone offset norm over non-root joints; scale reference for
    // position-error thresholds.
    double mean_bone_length() const {
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < joint_count(); ++i) {
            if (parents[i] == kRootParent) continue;
            sum += offsets[i].norm();
            ++count;
        }
        return count > 0 ? sum / count : 0.0;
    }
};

struct Pose {
    Vec3 root_position = Vec3::Zero();
    std::vector<Quat> joint_rotations;

    void validate(int joint_count) const {
        if (static_cast<int>(joint_rotations.size()) != joint_count)
            throw StructuralError("pose: rotation count " + std::to_string(joint_rotations.size()) +
                                  " != joint count " + std::to_string(joint_count));
        if (!root_position.allFinite())
            throw ValidationError("pose: non-finite root position");
        for (const Quat& q : joint_rotations) {
            if (!q.is_finite()) throw ValidationError("pose: non-finite rotation");
            if (std::abs(q.norm() - 1.0) > 1e-6)
                throw ValidationError("pose: rotation not unit length");
        }
    }
};

struct MotionClip {
    std::string skeleton_ref;
    double fps = 0.0;
    std::vector<Pose> frames;
    std::optional<std::string> text;
    // Primary-segment annotation, 0-based frame indices, t_e inclusive.
    std::optional<int> t_s;
    std::optional<int> t_e;
    // Original frame count before pad_or_trim; in-memory only.
    std::optional<int> original_length;

    int length() const { return static_cast<int>(frames.size()); }

    void validate(const Skeleton& skeleton) const {
        if (length() < 2) throw ValidationError("clip: needs at least 2 frames");
        if (!(fps > 0.0)) throw ValidationError("clip: fps must be positive");
        for (const Pose& p : frames) p.validate(skeleton.joint_count());
        if (t_s && t_e && !(0 <= *t_s && *t_s < *t_e && *t_e < length()))
            throw ValidationError("clip: invalid segment annotation");
    }
};

struct MotionDataset {
    Skeleton skeleton;
    std::string skeleton_name = "skeleton";
    std::vector<MotionClip> clips;
    std::vector<std::string> splits;  // "train" / "val" / "test", parallel to clips

    int size() const { return static_cast<int>(clips.size()); }

    std::vector<int> split_indices(const std::string& split) const {
        std::vector<int> out;
        for (int i = 0; i < size(); ++i)
            if (splits[i] == split) out.push_back(i);
        return out;
    }
};

// World positions of every joint: compose parent transforms root-to-leaf.
// parents[] is topologically sorted so a single forward pass suffices.
inline std::vector<Vec3> forward_kinematics(const Skeleton& skeleton, const Pose& pose) {
    const int n = skeleton.joint_count();
    if (static_cast<int>(pose.joint_rotations.size()) != n)
        throw StructuralError("forward_kinematics: pose has " +
                              std::to_string(pose.joint_rotations.size()) + " rotations, skeleton has " +
                              std::to_string(n) + " joints");
    if (!pose.root_position.allFinite())
        throw ValidationError("forward_kinematics: non-finite root position");

    std::vector<Vec3> positions(n);
    std::vector<Quat> global_rot(n);
    for (int i = 0; i < n; ++i) {
        const Quat& q = pose.joint_rotations[i];
        if (!q.is_finite()) throw ValidationError("forward_kinematics: non-finite rotation");
        const int p = skeleton.parents[i];
        if (p == Skeleton::kRootParent) {
            positions[i] = pose.root_position + skeleton.offsets[i];
            global_rot[i] = q;
        } else {
            positions[i] = positions[p] + global_rot[p].rotate(skeleton.offsets[i]);
            global_rot[i] = global_rot[p] * q;
        }
    }
    return positions;
}

// Fit to target_len: truncate at the end, or hold the last frame (zeros
// would be invalid poses). Original length is recorded.
inline MotionClip pad_or_trim(const MotionClip& clip, int target_len) {
    if (target_len < 1) throw ValidationError("pad_or_trim: target_len must be >= 1");
    MotionClip out = clip;
    out.original_length = clip.length();
    if (clip.length() > target_len) {
        out.frames.resize(target_len);
        if (out.t_e && *out.t_e >= target_len) {
            out.t_s.reset();
            out.t_e.reset();
        }
    } else if (clip.length() < target_len) {
        out.frames.reserve(target_len);
        while (out.length() < target_len) out.frames.push_back(clip.frames.back());
    }
    return out;
}

// Mean per-joint position error between two clips, meters.
inline double mean_joint_position_error(const Skeleton& skeleton, const MotionClip& a,
                                        const MotionClip& b) {
    if (a.length() != b.length())
        throw StructuralError("mean_joint_position_error: clip lengths differ");
    double sum = 0.0;
    long count = 0;
    for (int t = 0; t < a.length(); ++t) {
        const auto pa = forward_kinematics(skeleton, a.frames[t]);
        const auto pb = forward_kinematics(skeleton, b.frames[t]);
        for (size_t j = 0; j < pa.size(); ++j) {
            sum += (pa[j] - pb[j]).norm();
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace phasegen
