#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "flextclus/errors.hpp"
#include "flextclus/penalty.hpp"

namespace flextclus {

struct TaskData {
    Eigen::MatrixXd X;  // n_t x D
    Eigen::VectorXd y;  // n_t
};

struct MultiTaskDataset {
    std::vector<TaskData> tasks;
    Eigen::Index feature_dim = 0;

    int T() const { return static_cast<int>(tasks.size()); }
    Eigen::Index D() const { return feature_dim; }
};

struct Hyperparams {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    int max_iters = 10000;
    double rel_tol = 1e-10;
};

void check_hyperparams(const Hyperparams& hp);

// W is always derived from U + V, never stored, so the two cannot drift.
struct ParamState {
    Eigen::MatrixXd U, V;  // D x T
    Eigen::MatrixXd W() const { return U + V; }
};

ParamState zero_state(Eigen::Index D, int T);

struct TaskStandardization {
    Eigen::VectorXd mean, scale;           // per feature
    std::vector<std::uint8_t> degenerate;  // zero-variance features, scale forced to 1
    double y_mean = 0.0;
};

struct StandardizationTransform {
    std::vector<TaskStandardization> tasks;
    Eigen::Index feature_dim = 0;

    bool any_degenerate() const;
};

StandardizationTransform identity_transform(Eigen::Index D, int T);

// Empty vector when every invariant holds; otherwise one message per issue.
std::vector<std::string> validate_dataset(const MultiTaskDataset& ds);
void validate_or_throw(const MultiTaskDataset& ds);

// Per task: each feature column to mean 0 and variance 1 (population
// convention, divisor n_t); targets centered by the per-task mean.
// Zero-variance columns are centered with scale 1 and flagged, not rejected.
// Needs n_t >= 2 everywhere.
std::pair<MultiTaskDataset, StandardizationTransform>
standardize(const MultiTaskDataset& ds);

// Map raw rows for one task into the standardized feature space.
Eigen::MatrixXd apply_transform(const StandardizationTransform& tf, int task,
                                const Eigen::MatrixXd& raw_rows);

// sum_t ||y_t - X_t (u_t + v_t)||^2 + lambda1 * penalty_value(U)
//   + lambda2 ||U||_F^2 + lambda3 ||V||_F^2
double objective(const ParamState& state, const MultiTaskDataset& ds,
                 const Hyperparams& hp, const PenaltySpec& penalty);

}  // namespace flextclus
