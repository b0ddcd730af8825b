#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <vector>

#include "phasegen/common.hpp"
#include "phasegen/png.hpp"

namespace phasegen {

struct SegmentationWeights {
    double lambda1 = 1.0;
    double lambda2 = 0.5;
    double lambda3 = 0.5;
    int min_len = 20;

    void validate() const {
        if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0)
            throw ValidationError("segmentation weights must be nonnegative");
        if (lambda1 == 0.0 && lambda2 == 0.0 && lambda3 == 0.0)
            throw ValidationError("at least one segmentation weight must be positive");
        if (min_len < 2) throw ValidationError("min_len must be >= 2");
    }
};

struct SegmentAnnotation {
    int t_s = 0;
    int t_e = 0;
    double score = 0.0;
};

namespace seg_detail {

inline double pair_score(const Eigen::MatrixXd& features, const SegmentationWeights& w, int t_s,
                         int t_e) {
    const int T = static_cast<int>(features.rows());
    const double d_start_end = (features.row(t_s) - features.row(t_e)).norm();
    const double d_end_last = (features.row(t_e) - features.row(T - 1)).norm();
    return w.lambda1 * d_start_end - w.lambda2 * static_cast<double>(t_e - t_s) / T -
           w.lambda3 * d_end_last;
}

// score ascending; ties by larger length, then smaller t_s
inline bool better(const SegmentAnnotation& a, const SegmentAnnotation& b) {
    if (a.score != b.score) return a.score < b.score;
    const int la = a.t_e - a.t_s, lb = b.t_e - b.t_s;
    if (la != lb) return la > lb;
    return a.t_s < b.t_s;
}

}  // namespace seg_detail

// Exhaustive search over all admissible (t_s, t_e) pairs. Exact at the clip
// lengths this pipeline handles (<= a few hundred frames).
inline SegmentAnnotation detect_segment(const Eigen::MatrixXd& features,
                                        const SegmentationWeights& weights) {
    weights.validate();
    const int T = static_cast<int>(features.rows());
    if (T < weights.min_len + 2)
        throw ValidationError("detect_segment: need at least min_len + 2 frames, got " +
                              std::to_string(T));
    SegmentAnnotation best{0, 0, 0.0};
    bool have = false;
    for (int t_s = 0; t_s < T; ++t_s) {
        for (int t_e = t_s + weights.min_len; t_e < T; ++t_e) {
            const SegmentAnnotation cand{t_s, t_e,
                                         seg_detail::pair_score(features, weights, t_s, t_e)};
            if (!have || seg_detail::better(cand, best)) {
                best = cand;
                have = true;
            }
        }
    }
    if (!have) throw ValidationError("detect_segment: no admissible (t_s, t_e) pair");
    return best;
}

// Top-W lowest-scoring pairs with non-maximum suppression: a candidate whose
// t_s AND t_e both land within 2 frames of an already-kept pair is dropped.
inline std::vector<SegmentAnnotation> top_w_segments(const Eigen::MatrixXd& features,
                                                     const SegmentationWeights& weights, int W) {
    weights.validate();
    if (W < 1) throw ValidationError("top_w_segments: W must be >= 1");
    const int T = static_cast<int>(features.rows());
    if (T < weights.min_len + 2)
        throw ValidationError("top_w_segments: need at least min_len + 2 frames");

    std::vector<SegmentAnnotation> all;
    all.reserve(static_cast<size_t>(T) * T / 2);
    for (int t_s = 0; t_s < T; ++t_s)
        for (int t_e = t_s + weights.min_len; t_e < T; ++t_e)
            all.push_back({t_s, t_e, seg_detail::pair_score(features, weights, t_s, t_e)});
    std::sort(all.begin(), all.end(), seg_detail::better);

    std::vector<SegmentAnnotation> kept;
    for (const SegmentAnnotation& cand : all) {
        if (static_cast<int>(kept.size()) >= W) break;
        bool suppressed = false;
        for (const SegmentAnnotation& k : kept) {
            if (std::abs(cand.t_s - k.t_s) <= 2 && std::abs(cand.t_e - k.t_e) <= 2) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(cand);
    }
    return kept;
}

// Pairwise Euclidean feature distances; symmetric with zero diagonal.
inline Eigen::MatrixXd loss_matrix(const Eigen::MatrixXd& features) {
    const int T = static_cast<int>(features.rows());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(T, T);
    for (int i = 0; i < T; ++i) {
        for (int j = i + 1; j < T; ++j) {
            const double d = (features.row(i) - features.row(j)).norm();
            m(i, j) = d;
            m(j, i) = d;
        }
    }
    return m;
}

inline void save_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) f << ",";
            f << m(i, j);
        }
        f << "\n";
    }
}

// Grayscale heatmap, dark = small distance.
inline void save_matrix_png(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
    const int h = static_cast<int>(m.rows());
    const int w = static_cast<int>(m.cols());
    const double max_v = std::max(m.maxCoeff(), 1e-12);
    std::vector<unsigned char> pixels(static_cast<size_t>(w) * h);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            pixels[static_cast<size_t>(i) * w + j] =
                static_cast<unsigned char>(255.0 * m(i, j) / max_v);
    write_png(path, w, h, 1, pixels);
}

}  // namespace phasegen
