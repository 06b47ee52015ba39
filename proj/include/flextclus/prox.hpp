#pragma once

#include <Eigen/Dense>

#include "flextclus/penalty.hpp"

namespace flextclus {

// Euclidean projection onto the nonincreasing cone {u : u_1 >= ... >= u_T}.
// Single left-to-right stack pass; pooled blocks carry the block mean and
// tying neighbours are merged, so distinct output values strictly decrease.
Eigen::VectorXd pav_nonincreasing(const Eigen::VectorXd& m);

// Exact minimizer of the row subproblem
//   ||u - u_hat||^2 + (penalty on the sorted entries, folded into coeffs)
//                   + lambda2_hat ||u||^2
// via stable descending sort, the shift z_i -> (z_i - c_i/2)/(1+lambda2_hat),
// PAV, and unsorting.  O(T log T); ties inside a pooled block are exact.
Eigen::VectorXd prox_row(const Eigen::VectorXd& u_hat, const RankCoeffs& coeffs,
                         double lambda2_hat);

// Elementwise v_hat / (1 + lambda3_hat); bitwise identity at lambda3_hat = 0.
Eigen::MatrixXd shrink_v(const Eigen::MatrixXd& v_hat, double lambda3_hat);

// Row-subproblem objective with the penalty evaluated from its pairwise
// definition, independent of the sort+shift+PAV path.
double prox_objective(const Eigen::VectorXd& u, const Eigen::VectorXd& u_hat,
                      const PenaltySpec& penalty, int feature,
                      double lambda1_hat, double lambda2_hat);

// Brute-force reference minimizer: enumerate all 2^(T-1) contiguous
// partitions of the sorted indices, build each candidate from block means
// shifted by the pairweight imbalance between earlier and later blocks,
// score every candidate with prox_objective, return the best.  The true
// minimizer is block-constant on the sorted order, so it is among the
// candidates, and true-objective scoring makes the rest upper bounds.
// Guarded to T <= 12.
Eigen::VectorXd oracle_prox_row(const Eigen::VectorXd& u_hat, const PenaltySpec& penalty,
                                int feature, double lambda1_hat, double lambda2_hat);

}  // namespace flextclus
