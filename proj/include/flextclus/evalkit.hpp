#pragma once

#include <Eigen/Dense>
#include <filesystem>

#include "flextclus/errors.hpp"

namespace flextclus {

// Per-feature task-cluster labels; each row is contiguous 0..(k_d - 1) in
// order of first appearance left to right.
using ClusterMatrix = Eigen::MatrixXi;

// Mean squared error divided by the population variance of the targets.
double nmse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets);

double rmse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets);

// Group tasks within each row of U: entries whose sorted neighbours differ
// by at most tol (transitively) share a label.  Prox outputs carry exact
// ties, so the default tol = 0 reproduces the pooled blocks as created;
// the knob exists for matrices loaded from elsewhere.
Eigen::VectorXi cluster_row(const Eigen::VectorXd& u, double tol = 0.0);
ClusterMatrix extract_clusters(const Eigen::MatrixXd& U, double tol = 0.0);

// Fraction of task pairs on which two partitions agree (both together or
// both apart); 1 iff the partitions are identical.
double rand_index(const Eigen::VectorXi& a, const Eigen::VectorXi& b);

// Grid figure, one cell per (feature, task).  Cluster labels pick colors
// from a fixed palette per row; real matrices use a diverging scale
// symmetric around zero with black at zero.
void cluster_heatmap_svg(const ClusterMatrix& labels, const std::filesystem::path& path);
void value_heatmap_svg(const Eigen::MatrixXd& M, const std::filesystem::path& path);

}  // namespace flextclus
