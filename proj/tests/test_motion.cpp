#include <catch2/catch_amalgamated.hpp>

#include "phasegen/motion.hpp"
#include "phasegen/rng.hpp"
#include "phasegen/synth.hpp"

using namespace phasegen;

namespace {

Skeleton chain3() {
    Skeleton s;
    s.joint_names = {"a", "b", "c"};
    s.parents = {Skeleton::kRootParent, 0, 1};
    s.offsets = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 0, 0)};
    s.validate();
    return s;
}

Pose identity_pose(int joints) {
    Pose p;
    p.joint_rotations.assign(joints, Quat::identity());
    return p;
}

// Independent FK oracle: explicit 4x4 homogeneous transforms composed
// root-to-leaf, no shared code with forward_kinematics.
Eigen::Matrix4d quat_to_homogeneous(const Quat& q, const Vec3& t) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    const double w = q.w, x = q.x, y = q.y, z = q.z;
    m(0, 0) = 1 - 2 * (y * y + z * z);
    m(0, 1) = 2 * (x * y - w * z);
    m(0, 2) = 2 * (x * z + w * y);
    m(1, 0) = 2 * (x * y + w * z);
    m(1, 1) = 1 - 2 * (x * x + z * z);
    m(1, 2) = 2 * (y * z - w * x);
    m(2, 0) = 2 * (x * z - w * y);
    m(2, 1) = 2 * (y * z + w * x);
    m(2, 2) = 1 - 2 * (x * x + y * y);
    m.block<3, 1>(0, 3) = t;
    return m;
}

std::vector<Vec3> fk_oracle(const Skeleton& s, const Pose& pose) {
    std::vector<Eigen::Matrix4d> global(s.joint_count());
    std::vector<Vec3> out(s.joint_count());
    for (int i = 0; i < s.joint_count(); ++i) {
        const int parent = s.parents[i];
        const Vec3 trans = parent == Skeleton::kRootParent
                               ? Vec3(pose.root_position + s.offsets[i])
                               : s.offsets[i];
        const Eigen::Matrix4d local = quat_to_homogeneous(pose.joint_rotations[i], trans);
        global[i] = parent == Skeleton::kRootParent ? local : global[parent] * local;
        out[i] = global[i].block<3, 1>(0, 3);
    }
    return out;
}

Quat random_quat(Rng& rng) {
    Quat q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    return q.normalized().canonical();
}

}  // namespace

TEST_CASE("fk: identity rotations lay the chain along x") {
    const Skeleton s = chain3();
    Pose p = identity_pose(3);
    const auto pos = forward_kinematics(s, p);
    CHECK(pos[0].isApprox(Vec3(0, 0, 0), 0.0));
    CHECK(pos[1].isApprox(Vec3(1, 0, 0), 0.0));
    CHECK(pos[2].isApprox(Vec3(2, 0, 0), 0.0));
}

TEST_CASE("fk: 90 degree z-rotation at the root swings the second joint to +y") {
    const Skeleton s = chain3();
    Pose p = identity_pose(3);
    p.joint_rotations[0] = Quat::from_axis_angle(Vec3(0, 0, 1), kPi / 2);
    const auto pos = forward_kinematics(s, p);
    CHECK((pos[1] - Vec3(0, 1, 0)).norm() < 1e-9);
    CHECK((pos[2] - Vec3(0, 2, 0)).norm() < 1e-9);
}

TEST_CASE("fk: random poses match the homogeneous-transform oracle") {
    const Skeleton s = standard_skeleton();
    Rng rng(42, "fk-test");
    for (int trial = 0; trial < 50; ++trial) {
        Pose p;
        p.root_position = Vec3(rng.normal(), rng.normal(), rng.normal());
        for (int j = 0; j < s.joint_count(); ++j) p.joint_rotations.push_back(random_quat(rng));
        const auto got = forward_kinematics(s, p);
        const auto expect = fk_oracle(s, p);
        for (int j = 0; j < s.joint_count(); ++j)
            CHECK((got[j] - expect[j]).norm() < 1e-9);
    }
}

TEST_CASE("fk: preserves bone lengths for any pose") {
    const Skeleton s = standard_skeleton();
    Rng rng(7, "bone-length");
    for (int trial = 0; trial < 20; ++trial) {
        Pose p;
        p.root_position = Vec3(rng.normal(), rng.normal(), rng.normal());
        for (int j = 0; j < s.joint_count(); ++j) p.joint_rotations.push_back(random_quat(rng));
        const auto pos = forward_kinematics(s, p);
        for (int j = 0; j < s.joint_count(); ++j) {
            if (s.parents[j] == Skeleton::kRootParent) continue;
            const double bone = (pos[j] - pos[s.parents[j]]).norm();
            CHECK(bone == Catch::Approx(s.offsets[j].norm()).margin(1e-9));
        }
    }
}

TEST_CASE("fk: joint-count mismatch raises a structural error") {
    const Skeleton s = chain3();
    Pose p = identity_pose(2);
    CHECK_THROWS_AS(forward_kinematics(s, p), StructuralError);
}

TEST_CASE("fk: non-finite input raises a validation error") {
    const Skeleton s = chain3();
    Pose p = identity_pose(3);
    p.root_position.x() = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(forward_kinematics(s, p), ValidationError);
}

TEST_CASE("pad_or_trim: identity, hold, and prefix rules") {
    const Skeleton s = chain3();
    MotionClip clip;
    clip.fps = 12.5;
    for (int t = 0; t < 100; ++t) {
        Pose p = identity_pose(3);
        p.root_position = Vec3(t, 0, 0);
        clip.frames.push_back(p);
    }

    SECTION("same length is unchanged") {
        const MotionClip out = pad_or_trim(clip, 100);
        REQUIRE(out.length() == 100);
        CHECK(out.original_length == 100);
        for (int t = 0; t < 100; ++t)
            CHECK(out.frames[t].root_position.x() == Catch::Approx(t));
    }

    SECTION("shorter clips hold the last frame") {
        const MotionClip out = pad_or_trim(clip, 196);
        REQUIRE(out.length() == 196);
        CHECK(out.original_length == 100);
        for (int t = 100; t < 196; ++t)
            CHECK(out.frames[t].root_position.x() == Catch::Approx(99.0));
    }

    SECTION("longer clips keep the exact prefix") {
        MotionClip longer = clip;
        for (int t = 100; t < 300; ++t) {
            Pose p = identity_pose(3);
            p.root_position = Vec3(t, 0, 0);
            longer.frames.push_back(p);
        }
        const MotionClip out = pad_or_trim(longer, 196);
        REQUIRE(out.length() == 196);
        CHECK(out.original_length == 300);
        for (int t = 0; t < 196; ++t)
            CHECK(out.frames[t].root_position.x() == Catch::Approx(t));
    }

    SECTION("target below 1 is rejected") {
        CHECK_THROWS_AS(pad_or_trim(clip, 0), ValidationError);
    }
}

TEST_CASE("quaternion canonicalization keeps w nonnegative") {
    Rng rng(3, "canon");
    for (int i = 0; i < 100; ++i) {
        const Quat q = random_quat(rng);
        CHECK(q.w >= 0.0);
        CHECK(q.norm() == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("skeleton validation rejects malformed hierarchies") {
    Skeleton s = chain3();
    s.parents = {Skeleton::kRootParent, 2, 1};  // parent >= joint
    CHECK_THROWS_AS(s.validate(), StructuralError);

    Skeleton two_roots = chain3();
    two_roots.parents = {Skeleton::kRootParent, Skeleton::kRootParent, 1};
    CHECK_THROWS_AS(two_roots.validate(), StructuralError);
}
