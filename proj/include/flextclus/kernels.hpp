#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "flextclus/dataset.hpp"
#include "flextclus/penalty.hpp"

namespace flextclus {

// Fixed-shape tree reduction; the summation order depends only on n, so
// per-unit partials computed in parallel combine to the same bits as the
// serial pass.
double pairwise_sum(const double* x, std::size_t n);

// Squared-loss evaluation state.  When n_t is comfortably larger than D
// the Gram form (X'X and X'y cached) evaluates loss and gradient in
// O(D^2) per task instead of O(n_t D); both forms are algebraically equal.
struct SmoothContext {
    const MultiTaskDataset* ds = nullptr;
    std::vector<std::uint8_t> use_gram;  // per task
    std::vector<Eigen::MatrixXd> G;      // X'X
    std::vector<Eigen::VectorXd> b;      // X'y
    std::vector<double> yty;
};

SmoothContext make_smooth_context(const MultiTaskDataset& ds, bool allow_gram = true);

// loss = sum_t ||y_t - X_t w_t||^2, combined from per-task partials with
// pairwise_sum.  grad (shared by the U and V blocks) has column
// 2 X_t'(X_t w_t - y_t); pass nullptr to skip gradient assembly.
double smooth_eval_serial(const SmoothContext& ctx, const Eigen::MatrixXd& W,
                          Eigen::MatrixXd* grad);
double smooth_eval_parallel(const SmoothContext& ctx, const Eigen::MatrixXd& W,
                            Eigen::MatrixXd* grad, int threads);
double smooth_eval(const SmoothContext& ctx, const Eigen::MatrixXd& W,
                   Eigen::MatrixXd* grad, int threads);

// Clustering prox applied to every row of U_hat; rows are independent.
Eigen::MatrixXd prox_all_rows_serial(const Eigen::MatrixXd& U_hat, const PenaltySpec& penalty,
                                     double lambda1_hat, double lambda2_hat);
Eigen::MatrixXd prox_all_rows_parallel(const Eigen::MatrixXd& U_hat, const PenaltySpec& penalty,
                                       double lambda1_hat, double lambda2_hat, int threads);
Eigen::MatrixXd prox_all_rows(const Eigen::MatrixXd& U_hat, const PenaltySpec& penalty,
                              double lambda1_hat, double lambda2_hat, int threads);

}  // namespace flextclus
