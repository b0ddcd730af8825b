#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "phasegen/common.hpp"

namespace phasegen {

// Positive integer frequencies, min 1, max f_max, spread as evenly as
// possible (repetition allowed once the count exceeds f_max). Every entry is
// an integer, so the assembled periodic signal has exact period 1 in the
// time-control variable k.
struct FrequencySet {
    std::vector<int> freqs;

    int count() const { return static_cast<int>(freqs.size()); }
};

inline FrequencySet make_frequency_set(int phase_count, int f_max) {
    if (phase_count < 2) throw ConfigError("make_frequency_set: need at least 2 phases");
    if (f_max < 2) throw ConfigError("make_frequency_set: f_max must be >= 2");
    FrequencySet out;
    out.freqs.resize(phase_count);
    for (int i = 0; i < phase_count; ++i) {
        const double t = static_cast<double>(i) / (phase_count - 1);
        out.freqs[i] = static_cast<int>(std::lround(1.0 + t * (f_max - 1)));
    }
    return out;
}

// Per-phase amplitude / shift / offset, the latent X. Shifts live in [0, 1);
// amplitudes are nonnegative in canonical form.
struct PhaseParams {
    Eigen::VectorXd amplitudes;
    Eigen::VectorXd shifts;
    Eigen::VectorXd offsets;

    int count() const { return static_cast<int>(amplitudes.size()); }

    static PhaseParams zeros(int m) {
        PhaseParams p;
        p.amplitudes = Eigen::VectorXd::Zero(m);
        p.shifts = Eigen::VectorXd::Zero(m);
        p.offsets = Eigen::VectorXd::Zero(m);
        return p;
    }

    void validate() const {
        if (shifts.size() != amplitudes.size() || offsets.size() != amplitudes.size())
            throw StructuralError("phase params: component lengths disagree");
        if (!amplitudes.allFinite() || !shifts.allFinite() || !offsets.allFinite())
            throw ValidationError("phase params: non-finite values");
    }

    // Flat layout used by the diffusion model: per-phase (a, p, o) triples.
    Eigen::VectorXd flatten() const {
        Eigen::VectorXd v(3 * count());
        for (int i = 0; i < count(); ++i) {
            v[3 * i] = amplitudes[i];
            v[3 * i + 1] = shifts[i];
            v[3 * i + 2] = offsets[i];
        }
        return v;
    }

    static PhaseParams unflatten(const Eigen::VectorXd& v) {
        if (v.size() % 3 != 0) throw StructuralError("phase params: flat size not divisible by 3");
        const int m = static_cast<int>(v.size()) / 3;
        PhaseParams p = zeros(m);
        for (int i = 0; i < m; ++i) {
            p.amplitudes[i] = v[3 * i];
            p.shifts[i] = v[3 * i + 1];
            p.offsets[i] = v[3 * i + 2];
        }
        return p;
    }

    // Clamp amplitudes to >= 0 and wrap shifts into [0, 1). Raw diffusion
    // outputs pass through this before use.
    PhaseParams canonical() const {
        PhaseParams p = *this;
        for (int i = 0; i < p.count(); ++i) {
            if (p.amplitudes[i] < 0.0) {
                p.amplitudes[i] = -p.amplitudes[i];
                p.shifts[i] += 0.5;
            }
            p.shifts[i] -= std::floor(p.shifts[i]);
        }
        return p;
    }
};

// Channel layout for time-domain signals: [sin_1, cos_1, ..., sin_M, cos_M].
// Per phase i at time control k:
//   sin channel: a_i * sin(2*pi*(f_i*k + p_i)) + o_i
//   cos channel: a_i * cos(2*pi*(f_i*k + p_i)) + o_i
// The offset feeds both channels.
inline Eigen::VectorXd eval_periodic(const PhaseParams& params, const FrequencySet& freqs,
                                     double k) {
    const int m = params.count();
    if (freqs.count() != m) throw StructuralError("eval_periodic: phase/frequency count mismatch");
    Eigen::VectorXd out(2 * m);
    for (int i = 0; i < m; ++i) {
        const double arg = kTwoPi * (freqs.freqs[i] * k + params.shifts[i]);
        out[2 * i] = params.amplitudes[i] * std::sin(arg) + params.offsets[i];
        out[2 * i + 1] = params.amplitudes[i] * std::cos(arg) + params.offsets[i];
    }
    return out;
}

// Linear (non-repeatable) signal: the same X scaled by k.
//   sin channel: k * (a_i * sin(2*pi*p_i) + o_i)
//   cos channel: k * (a_i * cos(2*pi*p_i) + o_i)
inline Eigen::VectorXd eval_linear(const PhaseParams& params, double k) {
    const int m = params.count();
    Eigen::VectorXd out(2 * m);
    for (int i = 0; i < m; ++i) {
        const double arg = kTwoPi * params.shifts[i];
        out[2 * i] = k * (params.amplitudes[i] * std::sin(arg) + params.offsets[i]);
        out[2 * i + 1] = k * (params.amplitudes[i] * std::cos(arg) + params.offsets[i]);
    }
    return out;
}

enum class SegmentTag { RampIn, Periodic, RampOut };

struct PhaseSignal {
    Eigen::MatrixXd samples;            // T x channels
    std::vector<SegmentTag> tags;       // per frame
    Eigen::VectorXd k_values;           // per frame time-control value

    int length() const { return static_cast<int>(samples.rows()); }
    int channels() const { return static_cast<int>(samples.cols()); }
};

// Full-clip signal: linear ramp-in over frames [0, t_s), periodic section
// over [t_s, t_e] with k running 0 -> 1, linear ramp-out over (t_e, T-1]
// with k running back to 0. Boundary frames belong to the periodic section.
// Degenerate ramps (t_s = 0 or t_e = T-1) are simply empty.
inline PhaseSignal assemble_signal(const PhaseParams& params, const FrequencySet& freqs, int t_s,
                                   int t_e, int total_frames) {
    if (!(0 <= t_s && t_s < t_e && t_e < total_frames))
        throw ValidationError("assemble_signal: need 0 <= t_s < t_e < total_frames");
    PhaseSignal sig;
    sig.samples.resize(total_frames, 2 * params.count());
    sig.tags.resize(total_frames);
    sig.k_values.resize(total_frames);
    for (int t = 0; t < total_frames; ++t) {
        if (t < t_s) {
            const double k = static_cast<double>(t) / t_s;
            sig.samples.row(t) = eval_linear(params, k).transpose();
            sig.tags[t] = SegmentTag::RampIn;
            sig.k_values[t] = k;
        } else if (t <= t_e) {
            const double k = static_cast<double>(t - t_s) / (t_e - t_s);
            sig.samples.row(t) = eval_periodic(params, freqs, k).transpose();
            sig.tags[t] = SegmentTag::Periodic;
            sig.k_values[t] = k;
        } else {
            const double k = static_cast<double>(total_frames - 1 - t) / (total_frames - 1 - t_e);
            sig.samples.row(t) = eval_linear(params, k).transpose();
            sig.tags[t] = SegmentTag::RampOut;
            sig.k_values[t] = k;
        }
    }
    return sig;
}

// Least-squares recovery of (a, p, o) from a 2-channel phase signal sampled
// at known k values. The model is linear in (u, v, o) with u = a*cos(2*pi*p),
// v = a*sin(2*pi*p):
//   sin channel = u*sin(w k) + v*cos(w k) + o
//   cos channel = u*cos(w k) - v*sin(w k) + o        (w = 2*pi*f)
// Solved per phase via 3x3 normal equations over both channels jointly,
// then mapped back with a = sqrt(u^2+v^2) >= 0, p = atan2(v, u)/2pi mod 1.
inline PhaseParams fit_phase_params(const Eigen::MatrixXd& signal, const FrequencySet& freqs,
                                    const Eigen::VectorXd& k_values) {
    const int T = static_cast<int>(signal.rows());
    if (T < 3) throw ValidationError("fit_phase_params: need at least 3 samples");
    if (signal.cols() != 2 * freqs.count())
        throw StructuralError("fit_phase_params: channel count must be 2M");
    if (k_values.size() != T) throw StructuralError("fit_phase_params: k_values length mismatch");

    PhaseParams out = PhaseParams::zeros(freqs.count());
    for (int i = 0; i < freqs.count(); ++i) {
        const double w = kTwoPi * freqs.freqs[i];
        Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
        Eigen::Vector3d atb = Eigen::Vector3d::Zero();
        for (int t = 0; t < T; ++t) {
            const double s = std::sin(w * k_values[t]);
            const double c = std::cos(w * k_values[t]);
            const Eigen::Vector3d row_sin(s, c, 1.0);
            const Eigen::Vector3d row_cos(c, -s, 1.0);
            ata += row_sin * row_sin.transpose() + row_cos * row_cos.transpose();
            atb += row_sin * signal(t, 2 * i) + row_cos * signal(t, 2 * i + 1);
        }
        const Eigen::Vector3d sol = ata.ldlt().solve(atb);
        const double u = sol[0], v = sol[1];
        const double a = std::sqrt(u * u + v * v);
        out.amplitudes[i] = a;
        out.offsets[i] = sol[2];
        if (a > 1e-12) {
            double p = std::atan2(v, u) / kTwoPi;
            p -= std::floor(p);
            out.shifts[i] = p;
        } else {
            out.shifts[i] = 0.0;
        }
    }
    return out;
}

// Convenience: fit against a uniformly sampled single period, k = t/T.
inline PhaseParams fit_phase_params(const Eigen::MatrixXd& signal, const FrequencySet& freqs) {
    const int T = static_cast<int>(signal.rows());
    Eigen::VectorXd ks(T);
    for (int t = 0; t < T; ++t) ks[t] = static_cast<double>(t) / T;
    return fit_phase_params(signal, freqs, ks);
}

// Residual of a fitted parameter set against a target signal.
inline double fit_residual(const Eigen::MatrixXd& signal, const FrequencySet& freqs,
                           const Eigen::VectorXd& k_values, const PhaseParams& params) {
    double sum = 0.0;
    for (int t = 0; t < static_cast<int>(signal.rows()); ++t) {
        Eigen::VectorXd model = eval_periodic(params, freqs, k_values[t]);
        sum += (signal.row(t).transpose() - model).squaredNorm();
    }
    return sum;
}

}  // namespace phasegen
