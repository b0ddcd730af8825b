#pragma once

#include <functional>

#include "phasegen/autograd.hpp"

namespace phasegen::ag {

struct GradCheckReport {
    double max_rel_err = 0.0;
    long checked = 0;
    std::string worst_param;
    int worst_row = 0, worst_col = 0;
    double analytic_at_worst = 0.0, numeric_at_worst = 0.0;
};

// Central-difference check of store.grad against a deterministic loss
// functional. Every scalar parameter is perturbed; relative error uses a
// small floor so near-zero gradients compare sanely.
inline GradCheckReport check_gradients(ParamStore& store,
                                       const std::function<double()>& loss_fn,
                                       double step = 1e-5, double floor = 1e-6) {
    GradCheckReport report;
    for (int p = 0; p < store.size(); ++p) {
        ParamStore::Entry& e = store.at(p);
        for (Eigen::Index i = 0; i < e.value.rows(); ++i) {
            for (Eigen::Index j = 0; j < e.value.cols(); ++j) {
                const double saved = e.value(i, j);
                const double h = step * std::max(1.0, std::abs(saved));
                e.value(i, j) = saved + h;
                const double up = loss_fn();
                e.value(i, j) = saved - h;
                const double down = loss_fn();
                e.value(i, j) = saved;
                const double numeric = (up - down) / (2.0 * h);
                const double analytic = e.grad(i, j);
                const double denom = std::max({std::abs(numeric), std::abs(analytic), floor});
                const double rel = std::abs(numeric - analytic) / denom;
                ++report.checked;
                if (rel > report.max_rel_err) {
                    report.max_rel_err = rel;
                    report.worst_param = e.name;
                    report.worst_row = static_cast<int>(i);
                    report.worst_col = static_cast<int>(j);
                    report.analytic_at_worst = analytic;
                    report.numeric_at_worst = numeric;
                }
            }
        }
    }
    return report;
}

}  // namespace phasegen::ag
