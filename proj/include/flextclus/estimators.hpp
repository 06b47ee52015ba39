#pragma once

#include <filesystem>
#include <string>

#include "flextclus/matrix_io.hpp"
#include "flextclus/solver.hpp"

namespace flextclus {

struct FitOptions {
    // false fits the columns as given (identity transform stored); useful
    // for data that is already scaled or carries meaningful units.
    bool standardize = true;
    SolveOptions solve;
};

struct FittedModel {
    std::string method;  // ridge | pooling | flextclus | adaptive_flextclus
    ParamState state;    // in the standardized feature space
    StandardizationTransform transform;
    Hyperparams hp;
    PenaltySpec penalty;
    SolveReport report;  // zero iterations for the closed-form fits
};

// Standardize, solve the clustering objective with the uniform penalty.
FittedModel fit_flextclus(const MultiTaskDataset& ds, const Hyperparams& hp,
                          const FitOptions& opts = {});

// Two stages: a plain fit supplies W, whose row gaps set the adaptive
// pairweights (capped, mean-1 per row) for the reweighted second solve.
FittedModel fit_adaptive_flextclus(const MultiTaskDataset& ds, const Hyperparams& hp_stage1,
                                   const Hyperparams& hp_stage2, const FitOptions& opts = {});
inline FittedModel fit_adaptive_flextclus(const MultiTaskDataset& ds, const Hyperparams& hp,
                                          const FitOptions& opts = {}) {
    return fit_adaptive_flextclus(ds, hp, hp, opts);
}

// Per-task closed form (X'X + kappa I)^{-1} X'y; stored as U = 0, V = W.
FittedModel fit_ridge(const MultiTaskDataset& ds, double kappa, const FitOptions& opts = {});

// One ridge weight vector on all standardized rows pooled, replicated
// across every task column.
FittedModel fit_pooling(const MultiTaskDataset& ds, double kappa, const FitOptions& opts = {});

// Standardize raw rows with the stored per-task transform, apply
// w_t = u_t + v_t, add back the stored target mean.
Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& raw_rows, int task);

// U.csv, V.csv and a model.json sidecar in `dir`; doubles round-trip exactly.
void save_model(const FittedModel& model, const std::filesystem::path& dir);
FittedModel load_model(const std::filesystem::path& dir);

}  // namespace flextclus
