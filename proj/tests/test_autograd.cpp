#include <catch2/catch_amalgamated.hpp>

#include "phasegen/gradcheck.hpp"
#include "phasegen/nn.hpp"

using namespace phasegen;
using ag::Mat;
using ag::ParamStore;
using ag::Tape;
using ag::Var;

namespace {

Mat random_mat(int r, int c, Rng& rng, double scale = 1.0) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
    return m;
}

}  // namespace

// Helper: run analytic backward once, then central differences.
static ag::GradCheckReport run_check(ParamStore& store,
                                     const std::function<Var(Tape&)>& graph) {
    store.zero_grad();
    Tape tape;
    Var loss = graph(tape);
    tape.backward(loss);
    tape.export_param_grads(store);
    return ag::check_gradients(store, [&]() {
        Tape t;
        return t.scalar(graph(t));
    });
}

TEST_CASE("autograd: matmul, add, mul, scale gradients") {
    Rng rng(1, "ag1");
    ParamStore store;
    const int a = store.add("a", random_mat(3, 4, rng));
    const int b = store.add("b", random_mat(4, 5, rng));
    const int c = store.add("c", random_mat(3, 5, rng));

    const auto report = run_check(store, [&](Tape& t) {
        Var x = t.matmul(t.param(store, a), t.param(store, b));
        Var y = t.mul(x, t.param(store, c));
        return t.sum(t.scale(y, 1.7));
    });
    CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("autograd: trig, square, pow, softplus, sigmoid, tanh gradients") {
    Rng rng(2, "ag2");
    ParamStore store;
    const int a = store.add("a", random_mat(4, 4, rng, 0.8));

    const auto report = run_check(store, [&](Tape& t) {
        Var x = t.param(store, a);
        Var s = t.sin(x);
        Var c = t.cos(x);
        Var mix = t.add(t.square(s), t.mul(c, t.tanh(x)));
        Var act = t.add(t.softplus(mix), t.sigmoid(x));
        Var safe = t.add_scalar(t.square(act), 0.5);
        return t.sum(t.pow_scalar(safe, -0.5));
    });
    CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("autograd: broadcast, slice, concat, reductions") {
    Rng rng(3, "ag3");
    ParamStore store;
    const int a = store.add("a", random_mat(5, 6, rng));
    const int col = store.add("col", random_mat(5, 1, rng));
    const int row = store.add("row", random_mat(1, 6, rng));

    const auto report = run_check(store, [&](Tape& t) {
        Var x = t.param(store, a);
        Var y = t.mul(x, t.bcast_col(t.param(store, col), 6));
        Var z = t.add(y, t.bcast_row(t.param(store, row), 5));
        Var left = t.slice_cols(z, 0, 3);
        Var right = t.slice_cols(z, 3, 3);
        Var joined = t.concat_cols({right, left});
        Var top = t.slice_rows(joined, 0, 2);
        Var bottom = t.slice_rows(joined, 2, 3);
        Var stacked = t.concat_rows({bottom, top});
        Var rs = t.row_sum(stacked);
        Var cs = t.col_sum(stacked);
        return t.add(t.sum(t.square(rs)), t.sum(t.square(cs)));
    });
    CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("autograd: softmax rows gradient") {
    Rng rng(4, "ag4");
    ParamStore store;
    const int a = store.add("a", random_mat(4, 7, rng));
    const int w = store.add("w", random_mat(4, 7, rng));

    const auto report = run_check(store, [&](Tape& t) {
        Var soft = t.softmax_rows(t.param(store, a));
        return t.sum(t.mul(soft, t.param(store, w)));
    });
    CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("autograd: conv1d gradient including padding edges") {
    Rng rng(5, "ag5");
    ParamStore store;
    const int x = store.add("x", random_mat(9, 3, rng));
    const int w = store.add("w", random_mat(5 * 3, 4, rng));
    const int b = store.add("b", random_mat(1, 4, rng));

    const auto report = run_check(store, [&](Tape& t) {
        Var y = t.conv1d(t.param(store, x), t.param(store, w), t.param(store, b), 5);
        return t.sum(t.square(y));
    });
    CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("autograd: conv1d forward matches a direct loop") {
    Rng rng(6, "ag6");
    const int T = 8, cin = 2, cout = 3, K = 3;
    Tape tape;
    const Mat x = random_mat(T, cin, rng);
    const Mat w = random_mat(K * cin, cout, rng);
    const Mat b = random_mat(1, cout, rng);
    Var y = tape.conv1d(tape.constant(x), tape.constant(w), tape.constant(b), K);

    for (int t = 0; t < T; ++t) {
        for (int co = 0; co < cout; ++co) {
            double acc = b(0, co);
            for (int tap = 0; tap < K; ++tap) {
                const int src = t + tap - K / 2;
                if (src < 0 || src >= T) continue;
                for (int ci = 0; ci < cin; ++ci) acc += x(src, ci) * w(tap * cin + ci, co);
            }
            CHECK(tape.value(y)(t, co) == Catch::Approx(acc).margin(1e-12));
        }
    }
}

TEST_CASE("autograd: reusing a var twice accumulates gradients") {
    ParamStore store;
    Mat init(1, 1);
    init(0, 0) = 1.3;
    const int a = store.add("a", init);

    store.zero_grad();
    Tape tape;
    Var x = tape.param(store, a);
    Var loss = tape.sum(tape.mul(x, x));  // x^2, d/dx = 2x
    tape.backward(loss);
    tape.export_param_grads(store);
    CHECK(store.at(a).grad(0, 0) == Catch::Approx(2.0 * 1.3).margin(1e-12));
}

TEST_CASE("nn: linear + layernorm + transformer layer gradients") {
    Rng rng(7, "ag7");
    ParamStore store;
    nn::TransformerLayer layer = nn::TransformerLayer::create(store, "l0", 8, 2, 16, rng);
    const int x = store.add("x", random_mat(5, 8, rng));

    const auto report = run_check(store, [&](Tape& t) {
        Var out = layer.apply(t, store, t.param(store, x));
        return t.sum(t.square(out));
    });
    CHECK(report.max_rel_err < 1e-5);
}

TEST_CASE("nn: conv layer shift equivariance away from boundaries") {
    Rng rng(8, "ag8");
    ParamStore store;
    nn::Conv1d conv = nn::Conv1d::create(store, "c", 2, 3, 5, rng);

    const int T = 24, shift = 4;
    Mat x = random_mat(T, 2, rng);
    Mat x_shifted(T, 2);
    x_shifted.setZero();
    x_shifted.bottomRows(T - shift) = x.topRows(T - shift);

    Tape tape;
    Var y = conv.apply(tape, store, tape.constant(x));
    Var ys = conv.apply(tape, store, tape.constant(x_shifted));
    // interior rows: ys[t] == y[t - shift]
    for (int t = shift + 2; t < T - 2; ++t)
        CHECK((tape.value(ys).row(t) - tape.value(y).row(t - shift)).cwiseAbs().maxCoeff() <
              1e-12);
}

TEST_CASE("nn: adam reduces a convex objective") {
    Rng rng(9, "ag9");
    ParamStore store;
    const int a = store.add("a", random_mat(3, 3, rng));
    const Mat target = random_mat(3, 3, rng);

    double first_loss = 0.0, last_loss = 0.0;
    for (int step = 0; step < 200; ++step) {
        store.zero_grad();
        Tape tape;
        Var diff = tape.sub(tape.param(store, a), tape.constant(target));
        Var loss = tape.sum(tape.square(diff));
        tape.backward(loss);
        tape.export_param_grads(store);
        if (step == 0) first_loss = tape.scalar(loss);
        last_loss = tape.scalar(loss);
        store.adam_step(0.05);
    }
    CHECK(last_loss < 0.01 * first_loss);
}

TEST_CASE("nn: batch accumulation is deterministic and matches serial") {
    Rng rng(10, "ag10");
    ParamStore store;
    const int w = store.add("w", random_mat(4, 4, rng));
    std::vector<Mat> items;
    for (int i = 0; i < 12; ++i) items.push_back(random_mat(3, 4, rng));

    auto build = [&](const Mat& item, Tape& t) {
        Var y = t.matmul(t.constant(item), t.param(store, w));
        return t.sum(t.square(y));
    };

    store.zero_grad();
    const nn::BatchStats serial = nn::accumulate_gradients(store, items, build, 1);
    const Mat grad_serial = store.at(w).grad;

    store.zero_grad();
    const nn::BatchStats threaded = nn::accumulate_gradients(store, items, build, 4);
    const Mat grad_threaded = store.at(w).grad;

    CHECK(serial.loss_sum == Catch::Approx(threaded.loss_sum).margin(1e-12));
    CHECK((grad_serial - grad_threaded).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nn: decayed learning rate endpoints") {
    CHECK(nn::decayed_lr(0, 100, 1e-4, 1e-6) == Catch::Approx(1e-4));
    CHECK(nn::decayed_lr(99, 100, 1e-4, 1e-6) == Catch::Approx(1e-6));
    const double mid = nn::decayed_lr(50, 101, 1e-4, 1e-6);
    CHECK(mid == Catch::Approx(1e-5).epsilon(0.01));
}

TEST_CASE("nn: sinusoid embedding is deterministic and bounded") {
    const Mat a = nn::sinusoid_embed(17.0, 64);
    const Mat b = nn::sinusoid_embed(17.0, 64);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.cwiseAbs().maxCoeff() <= 1.0);
    const Mat c = nn::sinusoid_embed(18.0, 64);
    CHECK((a - c).cwiseAbs().maxCoeff() > 1e-3);
}
