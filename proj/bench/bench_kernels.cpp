// Times the serial reference kernels against the OpenMP paths on identical
// inputs and verifies the outputs agree to the bit.  On a single-core host
// the parallel columns show overhead, not speedup; the point of the table
// is the bitwise agreement and the prox scaling behavior.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <vector>

#include <Eigen/Dense>

#include "flextclus/kernels.hpp"
#include "flextclus/penalty.hpp"
#include "flextclus/rng.hpp"

using namespace flextclus;

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

MultiTaskDataset make_dataset(int D, int T, int n) {
    GaussianStream g(make_stream(7, 1, 0));
    MultiTaskDataset ds;
    ds.feature_dim = D;
    for (int t = 0; t < T; ++t) {
        TaskData td;
        td.X.resize(n, D);
        td.y.resize(n);
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < D; ++d) td.X(i, d) = g.next();
            td.y(i) = g.next();
        }
        ds.tasks.push_back(td);
    }
    return ds;
}

Eigen::MatrixXd make_matrix(int D, int T, double scale) {
    GaussianStream g(make_stream(7, 2, 0));
    Eigen::MatrixXd M(D, T);
    for (int d = 0; d < D; ++d)
        for (int t = 0; t < T; ++t) M(d, t) = scale * g.next();
    return M;
}

template <typename F>
double best_of(int trials, int reps, F&& f) {
    double best = 1e300;
    for (int trial = 0; trial < trials; ++trial) {
        const double t0 = now_s();
        for (int r = 0; r < reps; ++r) f();
        best = std::min(best, (now_s() - t0) / reps);
    }
    return best;
}

}  // namespace

int main() {
    const int D = 64, T = 32, n = 256;
    const MultiTaskDataset ds = make_dataset(D, T, n);
    const SmoothContext ctx = make_smooth_context(ds);
    const Eigen::MatrixXd W = make_matrix(D, T, 1.0);

    std::printf("smooth_eval  D=%d T=%d n=%d per task\n", D, T, n);
    Eigen::MatrixXd g_ref;
    const double f_ref = smooth_eval_serial(ctx, W, &g_ref);
    const double t_serial =
        best_of(5, 20, [&] { smooth_eval_serial(ctx, W, &g_ref); });
    std::printf("  %-10s %10.1f us\n", "serial", t_serial * 1e6);
    for (int threads : {1, 2, 4, 8}) {
        Eigen::MatrixXd g;
        const double f = smooth_eval_parallel(ctx, W, &g, threads);
        const bool same = f == f_ref && (g - g_ref).cwiseAbs().maxCoeff() == 0.0;
        const double t = best_of(5, 20, [&] { smooth_eval_parallel(ctx, W, &g, threads); });
        std::printf("  threads=%-3d %10.1f us  bitwise %s\n", threads, t * 1e6,
                    same ? "equal" : "DIFFERENT");
    }

    std::printf("\nprox_all_rows  D=%d T=%d\n", 512, T);
    const Eigen::MatrixXd U_hat = make_matrix(512, T, 3.0);
    const PenaltySpec pen = uniform_penalty();
    const Eigen::MatrixXd p_ref = prox_all_rows_serial(U_hat, pen, 1.3, 0.4);
    const double tp_serial =
        best_of(5, 20, [&] { prox_all_rows_serial(U_hat, pen, 1.3, 0.4); });
    std::printf("  %-10s %10.1f us\n", "serial", tp_serial * 1e6);
    for (int threads : {1, 2, 4, 8}) {
        const Eigen::MatrixXd p = prox_all_rows_parallel(U_hat, pen, 1.3, 0.4, threads);
        const bool same = (p - p_ref).cwiseAbs().maxCoeff() == 0.0;
        const double t =
            best_of(5, 20, [&] { prox_all_rows_parallel(U_hat, pen, 1.3, 0.4, threads); });
        std::printf("  threads=%-3d %10.1f us  bitwise %s\n", threads, t * 1e6,
                    same ? "equal" : "DIFFERENT");
    }

    std::printf("\nrow prox scaling (256 rows, serial)\n");
    GaussianStream g(make_stream(7, 3, 0));
    double prev = 0.0;
    int prev_T = 0;
    for (int T_scale : {10, 100, 1000}) {
        Eigen::MatrixXd U(256, T_scale);
        for (int d = 0; d < 256; ++d)
            for (int t = 0; t < T_scale; ++t) U(d, t) = 3.0 * g.next();
        const int reps = T_scale == 10 ? 400 : T_scale == 100 ? 40 : 4;
        const double t = best_of(5, reps, [&] { prox_all_rows_serial(U, pen, 1.3, 0.4); });
        if (prev > 0.0) {
            const double model = (double(T_scale) * std::log(double(T_scale))) /
                                 (double(prev_T) * std::log(double(prev_T)));
            std::printf("  T=%-5d %10.1f us  ratio %.1f  (T log T model %.1f)\n", T_scale,
                        t * 1e6, t / prev, model);
        } else {
            std::printf("  T=%-5d %10.1f us\n", T_scale, t * 1e6);
        }
        prev = t;
        prev_T = T_scale;
    }
    return 0;
}
