#include "flextclus/kernels.hpp"

#include <omp.h>

#include "flextclus/prox.hpp"

namespace flextclus {

double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

SmoothContext make_smooth_context(const MultiTaskDataset& ds, bool allow_gram) {
    SmoothContext ctx;
    ctx.ds = &ds;
    const int T = ds.T();
    ctx.use_gram.assign(static_cast<std::size_t>(T), 0);
    ctx.G.resize(T);
    ctx.b.resize(T);
    ctx.yty.assign(static_cast<std::size_t>(T), 0.0);
    for (int t = 0; t < T; ++t) {
        const TaskData& td = ds.tasks[t];
        if (allow_gram && td.X.rows() > 2 * ds.feature_dim) {
            ctx.use_gram[static_cast<std::size_t>(t)] = 1;
            ctx.G[t] = td.X.transpose() * td.X;
            ctx.b[t] = td.X.transpose() * td.y;
            ctx.yty[static_cast<std::size_t>(t)] = td.y.squaredNorm();
        }
    }
    return ctx;
}

namespace {

// One task's loss partial and, when grad_col is set, 2 X'(Xw - y).
double task_eval(const SmoothContext& ctx, int t, const Eigen::VectorXd& w,
                 Eigen::VectorXd* grad_col) {
    const TaskData& td = ctx.ds->tasks[t];
    if (ctx.use_gram[static_cast<std::size_t>(t)]) {
        const Eigen::VectorXd Gw = ctx.G[t] * w;
        if (grad_col) *grad_col = 2.0 * (Gw - ctx.b[t]);
        return ctx.yty[static_cast<std::size_t>(t)] - 2.0 * w.dot(ctx.b[t]) + w.dot(Gw);
    }
    const Eigen::VectorXd r = td.X * w - td.y;
    if (grad_col) *grad_col = 2.0 * (td.X.transpose() * r);
    return r.squaredNorm();
}

}  // namespace

double smooth_eval_serial(const SmoothContext& ctx, const Eigen::MatrixXd& W,
                          Eigen::MatrixXd* grad) {
    const int T = static_cast<int>(W.cols());
    if (grad) grad->resize(W.rows(), T);
    std::vector<double> partial(static_cast<std::size_t>(T), 0.0);
    Eigen::VectorXd col;
    for (int t = 0; t < T; ++t) {
        partial[static_cast<std::size_t>(t)] =
            task_eval(ctx, t, W.col(t), grad ? &col : nullptr);
        if (grad) grad->col(t) = col;
    }
    return pairwise_sum(partial.data(), partial.size());
}

double smooth_eval_parallel(const SmoothContext& ctx, const Eigen::MatrixXd& W,
                            Eigen::MatrixXd* grad, int threads) {
    const int T = static_cast<int>(W.cols());
    if (grad) grad->resize(W.rows(), T);
    std::vector<double> partial(static_cast<std::size_t>(T), 0.0);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int t = 0; t < T; ++t) {
        Eigen::VectorXd col;
        partial[static_cast<std::size_t>(t)] =
            task_eval(ctx, t, W.col(t), grad ? &col : nullptr);
        if (grad) grad->col(t) = col;
    }
    return pairwise_sum(partial.data(), partial.size());
}

double smooth_eval(const SmoothContext& ctx, const Eigen::MatrixXd& W,
                   Eigen::MatrixXd* grad, int threads) {
    if (threads > 1) return smooth_eval_parallel(ctx, W, grad, threads);
    return smooth_eval_serial(ctx, W, grad);
}

Eigen::MatrixXd prox_all_rows_serial(const Eigen::MatrixXd& U_hat, const PenaltySpec& penalty,
                                     double lambda1_hat, double lambda2_hat) {
    const int D = static_cast<int>(U_hat.rows());
    const int T = static_cast<int>(U_hat.cols());
    Eigen::MatrixXd U(D, T);
    const bool shared_coeffs = penalty.variant == PenaltyVariant::Uniform;
    RankCoeffs common;
    if (shared_coeffs) common = rank_coeffs(penalty, lambda1_hat, T, 0);
    for (int d = 0; d < D; ++d) {
        const RankCoeffs& rc =
            shared_coeffs ? common : rank_coeffs(penalty, lambda1_hat, T, d);
        U.row(d) = prox_row(U_hat.row(d).transpose(), rc, lambda2_hat).transpose();
    }
    return U;
}

Eigen::MatrixXd prox_all_rows_parallel(const Eigen::MatrixXd& U_hat, const PenaltySpec& penalty,
                                       double lambda1_hat, double lambda2_hat, int threads) {
    const int D = static_cast<int>(U_hat.rows());
    const int T = static_cast<int>(U_hat.cols());
    Eigen::MatrixXd U(D, T);
    const bool shared_coeffs = penalty.variant == PenaltyVariant::Uniform;
    RankCoeffs common;
    if (shared_coeffs) common = rank_coeffs(penalty, lambda1_hat, T, 0);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int d = 0; d < D; ++d) {
        const RankCoeffs rc =
            shared_coeffs ? common : rank_coeffs(penalty, lambda1_hat, T, d);
        U.row(d) = prox_row(U_hat.row(d).transpose(), rc, lambda2_hat).transpose();
    }
    return U;
}

Eigen::MatrixXd prox_all_rows(const Eigen::MatrixXd& U_hat, const PenaltySpec& penalty,
                              double lambda1_hat, double lambda2_hat, int threads) {
    if (threads > 1) {
        return prox_all_rows_parallel(U_hat, penalty, lambda1_hat, lambda2_hat, threads);
    }
    return prox_all_rows_serial(U_hat, penalty, lambda1_hat, lambda2_hat);
}

}  // namespace flextclus
