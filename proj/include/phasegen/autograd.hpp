#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "phasegen/common.hpp"
#include "phasegen/rng.hpp"

namespace phasegen::ag {

using Mat = Eigen::MatrixXd;

// Trainable tensors with Adam state. Models own a ParamStore; tapes bind
// entries as leaves and push gradients back after the backward sweep.
class ParamStore {
public:
    struct Entry {
        std::string name;
        Mat value;
        Mat grad;
        Mat adam_m;
        Mat adam_v;
    };

    int add(const std::string& name, Mat init) {
        Entry e;
        e.name = name;
        e.grad = Mat::Zero(init.rows(), init.cols());
        e.adam_m = Mat::Zero(init.rows(), init.cols());
        e.adam_v = Mat::Zero(init.rows(), init.cols());
        e.value = std::move(init);
        entries_.push_back(std::move(e));
        return static_cast<int>(entries_.size()) - 1;
    }

    int size() const { return static_cast<int>(entries_.size()); }
    Entry& at(int i) { return entries_[static_cast<size_t>(i)]; }
    const Entry& at(int i) const { return entries_[static_cast<size_t>(i)]; }

    void zero_grad() {
        for (Entry& e : entries_) e.grad.setZero();
    }

    long scalar_count() const {
        long n = 0;
        for (const Entry& e : entries_) n += e.value.size();
        return n;
    }

    void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
        ++step_;
        const double bc1 = 1.0 - std::pow(beta1, step_);
        const double bc2 = 1.0 - std::pow(beta2, step_);
        for (Entry& e : entries_) {
            e.adam_m = beta1 * e.adam_m + (1.0 - beta1) * e.grad;
            e.adam_v = beta2 * e.adam_v.array().matrix() +
                       (1.0 - beta2) * e.grad.array().square().matrix();
            e.value.array() -= lr * (e.adam_m.array() / bc1) /
                               ((e.adam_v.array() / bc2).sqrt() + eps);
        }
    }

    long adam_steps() const { return step_; }

private:
    std::vector<Entry> entries_;
    long step_ = 0;
};

// Xavier-uniform init, seeded.
inline Mat xavier_init(int rows, int cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-limit, limit);
    return m;
}

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape over 2-D double matrices. One tape per forward pass;
// nodes are replayed in reverse for the backward sweep. All shapes are
// checked at graph-build time.
class Tape {
public:
    Var constant(Mat v) { return push(std::move(v), false, nullptr, {}); }

    Var leaf(Mat v) { return push(std::move(v), true, nullptr, {}); }

    // Bind a ParamStore entry as a leaf (cached per tape).
    Var param(const ParamStore& store, int index) {
        const auto key = std::make_pair(&store, index);
        auto it = param_vars_.find(key);
        if (it != param_vars_.end()) return it->second;
        Var v = leaf(store.at(index).value);
        param_vars_.emplace(key, v);
        param_bindings_.push_back({&store, index, v});
        return v;
    }

    const Mat& value(Var v) const { return node(v).value; }
    const Mat& grad(Var v) const { return node(v).grad; }

    Var matmul(Var a, Var b) {
        check(value(a).cols() == value(b).rows(), "matmul: inner dims");
        Mat y = value(a) * value(b);
        return push(std::move(y), needs(a) || needs(b), [this, a, b](const Mat& dy) {
            if (needs(a)) node(a).grad.noalias() += dy * value(b).transpose();
            if (needs(b)) node(b).grad.noalias() += value(a).transpose() * dy;
        }, {a, b});
    }

    Var transpose(Var a) {
        return push(value(a).transpose(), needs(a), [this, a](const Mat& dy) {
            if (needs(a)) node(a).grad += dy.transpose();
        }, {a});
    }

    Var add(Var a, Var b) {
        check_same(a, b, "add");
        return push(value(a) + value(b), needs(a) || needs(b), [this, a, b](const Mat& dy) {
            if (needs(a)) node(a).grad += dy;
            if (needs(b)) node(b).grad += dy;
        }, {a, b});
    }

    Var sub(Var a, Var b) {
        check_same(a, b, "sub");
        return push(value(a) - value(b), needs(a) || needs(b), [this, a, b](const Mat& dy) {
            if (needs(a)) node(a).grad += dy;
            if (needs(b)) node(b).grad -= dy;
        }, {a, b});
    }

    Var mul(Var a, Var b) {
        check_same(a, b, "mul");
        return push(value(a).cwiseProduct(value(b)), needs(a) || needs(b),
                    [this, a, b](const Mat& dy) {
                        if (needs(a)) node(a).grad += dy.cwiseProduct(value(b));
                        if (needs(b)) node(b).grad += dy.cwiseProduct(value(a));
                    }, {a, b});
    }

    Var scale(Var a, double s) {
        return push(value(a) * s, needs(a), [this, a, s](const Mat& dy) {
            if (needs(a)) node(a).grad += s * dy;
        }, {a});
    }

    Var add_scalar(Var a, double s) {
        return push(value(a).array() + s, needs(a), [this, a](const Mat& dy) {
            if (needs(a)) node(a).grad += dy;
        }, {a});
    }

    // n x 1 -> n x d
    Var bcast_col(Var col, int d) {
        check(value(col).cols() == 1, "bcast_col: input must be n x 1");
        Mat y = value(col).replicate(1, d);
        return push(std::move(y), needs(col), [this, col](const Mat& dy) {
            if (needs(col)) node(col).grad += dy.rowwise().sum();
        }, {col});
    }

    // 1 x d -> n x d
    Var bcast_row(Var row, int n) {
        check(value(row).rows() == 1, "bcast_row: input must be 1 x d");
        Mat y = value(row).replicate(n, 1);
        return push(std::move(y), needs(row), [this, row](const Mat& dy) {
            if (needs(row)) node(row).grad += dy.colwise().sum();
        }, {row});
    }

    Var slice_cols(Var a, int j0, int w) {
        check(j0 >= 0 && w >= 0 && j0 + w <= value(a).cols(), "slice_cols: range");
        Mat y = value(a).middleCols(j0, w);
        return push(std::move(y), needs(a), [this, a, j0, w](const Mat& dy) {
            if (needs(a)) node(a).grad.middleCols(j0, w) += dy;
        }, {a});
    }

    Var slice_rows(Var a, int i0, int h) {
        check(i0 >= 0 && h >= 0 && i0 + h <= value(a).rows(), "slice_rows: range");
        Mat y = value(a).middleRows(i0, h);
        return push(std::move(y), needs(a), [this, a, i0, h](const Mat& dy) {
            if (needs(a)) node(a).grad.middleRows(i0, h) += dy;
        }, {a});
    }

    Var concat_cols(const std::vector<Var>& parts) {
        check(!parts.empty(), "concat_cols: empty");
        const Eigen::Index rows = value(parts[0]).rows();
        Eigen::Index cols = 0;
        bool any = false;
        for (Var p : parts) {
            check(value(p).rows() == rows, "concat_cols: row mismatch");
            cols += value(p).cols();
            any = any || needs(p);
        }
        Mat y(rows, cols);
        Eigen::Index off = 0;
        for (Var p : parts) {
            y.middleCols(off, value(p).cols()) = value(p);
            off += value(p).cols();
        }
        return push(std::move(y), any, [this, parts](const Mat& dy) {
            Eigen::Index off2 = 0;
            for (Var p : parts) {
                const Eigen::Index w = value(p).cols();
                if (needs(p)) node(p).grad += dy.middleCols(off2, w);
                off2 += w;
            }
        }, parts);
    }

    Var concat_rows(const std::vector<Var>& parts) {
        check(!parts.empty(), "concat_rows: empty");
        const Eigen::Index cols = value(parts[0]).cols();
        Eigen::Index rows = 0;
        bool any = false;
        for (Var p : parts) {
            check(value(p).cols() == cols, "concat_rows: col mismatch");
            rows += value(p).rows();
            any = any || needs(p);
        }
        Mat y(rows, cols);
        Eigen::Index off = 0;
        for (Var p : parts) {
            y.middleRows(off, value(p).rows()) = value(p);
            off += value(p).rows();
        }
        return push(std::move(y), any, [this, parts](const Mat& dy) {
            Eigen::Index off2 = 0;
            for (Var p : parts) {
                const Eigen::Index h = value(p).rows();
                if (needs(p)) node(p).grad += dy.middleRows(off2, h);
                off2 += h;
            }
        }, parts);
    }

    Var sin(Var a) {
        return push(value(a).array().sin(), needs(a), [this, a](const Mat& dy) {
            if (needs(a)) node(a).grad.array() += dy.array() * value(a).array().cos();
        }, {a});
    }

    Var cos(Var a) {
        return push(value(a).array().cos(), needs(a), [this, a](const Mat& dy) {
            if (needs(a)) node(a).grad.array() -= dy.array() * value(a).array().sin();
        }, {a});
    }

    Var tanh(Var a) {
        Mat y = value(a).array().tanh();
        Var out = push(std::move(y), needs(a), nullptr, {a});
        node(out).backward = [this, a, out](const Mat& dy) {
            if (needs(a))
                node(a).grad.array() += dy.array() * (1.0 - value(out).array().square());
        };
        return out;
    }

    Var sigmoid(Var a) {
        Mat y = value(a).unaryExpr([](double x) {
            return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
        });
        Var out = push(std::move(y), needs(a), nullptr, {a});
        node(out).backward = [this, a, out](const Mat& dy) {
            if (needs(a)) {
                const auto& yv = value(out).array();
                node(a).grad.array() += dy.array() * yv * (1.0 - yv);
            }
        };
        return out;
    }

    Var softplus(Var a) {
        Mat y = value(a).unaryExpr(
            [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); });
        return push(std::move(y), needs(a), [this, a](const Mat& dy) {
            if (needs(a)) {
                const Mat sig = value(a).unaryExpr([](double x) {
                    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
                });
                node(a).grad.array() += dy.array() * sig.array();
            }
        }, {a});
    }

    Var square(Var a) {
        return push(value(a).array().square(), needs(a), [this, a](const Mat& dy) {
            if (needs(a)) node(a).grad.array() += 2.0 * dy.array() * value(a).array();
        }, {a});
    }

    // Elementwise power with scalar exponent; inputs must stay positive when
    // the exponent is fractional.
    Var pow_scalar(Var a, double e) {
        return push(value(a).array().pow(e), needs(a), [this, a, e](const Mat& dy) {
            if (needs(a))
                node(a).grad.array() += e * dy.array() * value(a).array().pow(e - 1.0);
        }, {a});
    }

    Var sum(Var a) {
        Mat y(1, 1);
        y(0, 0) = value(a).sum();
        return push(std::move(y), needs(a), [this, a](const Mat& dy) {
            if (needs(a)) node(a).grad.array() += dy(0, 0);
        }, {a});
    }

    Var row_sum(Var a) {
        Mat y = value(a).rowwise().sum();
        return push(std::move(y), needs(a), [this, a](const Mat& dy) {
            if (needs(a)) node(a).grad += dy.replicate(1, value(a).cols());
        }, {a});
    }

    Var col_sum(Var a) {
        Mat y = value(a).colwise().sum();
        return push(std::move(y), needs(a), [this, a](const Mat& dy) {
            if (needs(a)) node(a).grad += dy.replicate(value(a).rows(), 1);
        }, {a});
    }

    // Row-wise softmax, numerically stabilized.
    Var softmax_rows(Var a) {
        Mat y = value(a);
        for (Eigen::Index i = 0; i < y.rows(); ++i) {
            const double mx = y.row(i).maxCoeff();
            y.row(i) = (y.row(i).array() - mx).exp();
            y.row(i) /= y.row(i).sum();
        }
        Var out = push(std::move(y), needs(a), nullptr, {a});
        node(out).backward = [this, a, out](const Mat& dy) {
            if (!needs(a)) return;
            const Mat& yv = value(out);
            const Eigen::VectorXd dot = (dy.array() * yv.array()).rowwise().sum();
            node(a).grad += (dy.array() - dot.replicate(1, dy.cols()).array()).matrix().cwiseProduct(yv);
        };
        return out;
    }

    // 1-D convolution over time. x: T x Cin, w: (K*Cin) x Cout laid out with
    // kernel tap as the outer index, b: 1 x Cout. Zero padding, stride 1,
    // odd K ("same" output length).
    Var conv1d(Var x, Var w, Var b, int kernel) {
        check(kernel >= 1 && kernel % 2 == 1, "conv1d: kernel must be odd");
        const Eigen::Index T = value(x).rows();
        const Eigen::Index cin = value(x).cols();
        check(value(w).rows() == kernel * cin, "conv1d: weight rows != K*Cin");
        const Eigen::Index cout = value(w).cols();
        check(value(b).rows() == 1 && value(b).cols() == cout, "conv1d: bias shape");

        const int half = kernel / 2;
        Mat patches = Mat::Zero(T, kernel * cin);
        for (int tap = 0; tap < kernel; ++tap) {
            const int shift = tap - half;
            const Eigen::Index src_lo = std::max<Eigen::Index>(0, shift);
            const Eigen::Index src_hi = std::min<Eigen::Index>(T, T + shift);
            if (src_hi <= src_lo) continue;
            const Eigen::Index dst_lo = src_lo - shift;
            patches.block(dst_lo, tap * cin, src_hi - src_lo, cin) =
                value(x).middleRows(src_lo, src_hi - src_lo);
        }
        Mat y = patches * value(w);
        y.rowwise() += value(b).row(0);

        return push(std::move(y), needs(x) || needs(w) || needs(b),
                    [this, x, w, b, kernel, patches = std::move(patches)](const Mat& dy) {
                        if (needs(w)) node(w).grad.noalias() += patches.transpose() * dy;
                        if (needs(b)) node(b).grad += dy.colwise().sum();
                        if (needs(x)) {
                            const Mat dpatches = dy * value(w).transpose();
                            const Eigen::Index T2 = value(x).rows();
                            const Eigen::Index cin2 = value(x).cols();
                            const int half2 = kernel / 2;
                            for (int tap = 0; tap < kernel; ++tap) {
                                const int shift = tap - half2;
                                const Eigen::Index src_lo = std::max<Eigen::Index>(0, shift);
                                const Eigen::Index src_hi = std::min<Eigen::Index>(T2, T2 + shift);
                                if (src_hi <= src_lo) continue;
                                const Eigen::Index dst_lo = src_lo - shift;
                                node(x).grad.middleRows(src_lo, src_hi - src_lo) +=
                                    dpatches.block(dst_lo, tap * cin2, src_hi - src_lo, cin2);
                            }
                        }
                    }, {x, w, b});
    }

    // Sum of squared differences (the ||.||_2^2 building block).
    Var sum_sq_diff(Var a, Var b) { return sum(square(sub(a, b))); }

    double scalar(Var v) const {
        check(value(v).size() == 1, "scalar: not a 1x1 value");
        return value(v)(0, 0);
    }

    void backward(Var loss) {
        check(value(loss).size() == 1, "backward: loss must be scalar");
        for (Node& n : nodes_) n.grad.setZero(n.value.rows(), n.value.cols());
        nodes_[static_cast<size_t>(loss.id)].grad(0, 0) = 1.0;
        for (int i = loss.id; i >= 0; --i) {
            Node& n = nodes_[static_cast<size_t>(i)];
            if (n.backward && n.requires_grad) n.backward(n.grad);
        }
    }

    // Push accumulated leaf gradients back into ParamStore entries (or any
    // sink via the callback form).
    void export_param_grads(ParamStore& store) const {
        for (const Binding& binding : param_bindings_) {
            check(binding.store == &store, "export_param_grads: store mismatch");
            store.at(binding.index).grad += grad(binding.var);
        }
    }

    void export_param_grads(const std::function<void(int, const Mat&)>& sink) const {
        for (const Binding& binding : param_bindings_) sink(binding.index, grad(binding.var));
    }

    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Mat value;
        Mat grad;
        std::function<void(const Mat&)> backward;
        bool requires_grad = false;
    };

    struct Binding {
        const ParamStore* store;
        int index;
        Var var;
    };

    struct PairHash {
        size_t operator()(const std::pair<const ParamStore*, int>& p) const {
            return std::hash<const void*>()(p.first) ^ (static_cast<size_t>(p.second) * 1315423911u);
        }
    };

    static void check(bool ok, const char* what) {
        if (!ok) throw StructuralError(std::string("autograd: ") + what);
    }

    void check_same(Var a, Var b, const char* what) const {
        check(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(), what);
    }

    bool needs(Var v) const { return node(v).requires_grad; }

    Node& node(Var v) { return nodes_[static_cast<size_t>(v.id)]; }
    const Node& node(Var v) const { return nodes_[static_cast<size_t>(v.id)]; }

    Var push(Mat value, bool requires_grad, std::function<void(const Mat&)> backward,
             const std::vector<Var>& parents) {
        bool rg = requires_grad;
        if (!rg)
            for (Var p : parents) rg = rg || needs(p);
        Node n;
        n.value = std::move(value);
        n.requires_grad = rg;
        n.backward = std::move(backward);
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    std::vector<Node> nodes_;
    std::unordered_map<std::pair<const ParamStore*, int>, Var, PairHash> param_vars_;
    std::vector<Binding> param_bindings_;
};

}  // namespace phasegen::ag
