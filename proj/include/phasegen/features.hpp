#pragma once

#include <Eigen/Dense>

#include "phasegen/motion.hpp"

namespace phasegen {

// Per-frame motion features for segment detection: pose rotation parameters
// plus finite-difference joint velocities over a centered window, optionally
// z-normalized with dataset-level statistics.

struct FeatureStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;  // std with a floor; constant dims stay unscaled

    static FeatureStats identity(int dim) {
        FeatureStats s;
        s.mean = Eigen::VectorXd::Zero(dim);
        s.scale = Eigen::VectorXd::Ones(dim);
        return s;
    }
};

inline int feature_dim(const Skeleton& skeleton) {
    return 4 * skeleton.joint_count() + 3 * skeleton.joint_count();
}

// Raw features, one row per frame. Velocities use a centered window of w
// frames (clamped at clip boundaries) over FK joint positions.
inline Eigen::MatrixXd embed_frames_raw(const Skeleton& skeleton, const MotionClip& clip,
                                        int window) {
    const int T = clip.length();
    if (T <= window)
        throw ValidationError("embed_frames: clip length " + std::to_string(T) +
                              " must exceed window " + std::to_string(window));
    const int J = skeleton.joint_count();
    const double dt = 1.0 / clip.fps;
    const int half = window / 2;

    std::vector<std::vector<Vec3>> pos(T);
    for (int t = 0; t < T; ++t) pos[t] = forward_kinematics(skeleton, clip.frames[t]);

    Eigen::MatrixXd d(T, feature_dim(skeleton));
    for (int t = 0; t < T; ++t) {
        int col = 0;
        for (int j = 0; j < J; ++j) {
            const Quat& q = clip.frames[t].joint_rotations[j];
            d(t, col++) = q.w;
            d(t, col++) = q.x;
            d(t, col++) = q.y;
            d(t, col++) = q.z;
        }
        const int lo = std::max(0, t - half);
        const int hi = std::min(T - 1, t + half);
        const double span = (hi - lo) * dt;
        for (int j = 0; j < J; ++j) {
            const Vec3 v = span > 0.0 ? Vec3((pos[hi][j] - pos[lo][j]) / span) : Vec3::Zero();
            d(t, col++) = v.x();
            d(t, col++) = v.y();
            d(t, col++) = v.z();
        }
    }
    return d;
}

inline Eigen::MatrixXd apply_stats(const Eigen::MatrixXd& raw, const FeatureStats& stats) {
    if (raw.cols() != stats.mean.size())
        throw StructuralError("apply_stats: feature dim mismatch");
    return (raw.rowwise() - stats.mean.transpose()).array().rowwise() /
           stats.scale.transpose().array();
}

inline Eigen::MatrixXd embed_frames(const Skeleton& skeleton, const MotionClip& clip, int window,
                                    const FeatureStats& stats) {
    return apply_stats(embed_frames_raw(skeleton, clip, window), stats);
}

// Dataset-level z-normalization statistics over all frames of all clips.
inline FeatureStats compute_feature_stats(const MotionDataset& dataset, int window) {
    const int dim = feature_dim(dataset.skeleton);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(dim);
    long n = 0;
    for (const MotionClip& clip : dataset.clips) {
        const Eigen::MatrixXd raw = embed_frames_raw(dataset.skeleton, clip, window);
        sum += raw.colwise().sum().transpose();
        sum_sq += raw.array().square().colwise().sum().matrix().transpose();
        n += raw.rows();
    }
    if (n == 0) throw ValidationError("compute_feature_stats: empty dataset");
    FeatureStats stats;
    stats.mean = sum / static_cast<double>(n);
    Eigen::VectorXd var =
        sum_sq / static_cast<double>(n) - stats.mean.array().square().matrix();
    stats.scale = var.array().max(0.0).sqrt();
    for (int i = 0; i < dim; ++i)
        if (stats.scale[i] < 1e-12) stats.scale[i] = 1.0;
    return stats;
}

}  // namespace phasegen
