#pragma once

#include <Eigen/Dense>
#include <vector>

#include "flextclus/errors.hpp"

namespace flextclus {

// Pairwise clustering penalty on each row of U:
//   uniform:  sum_{i<j} |U_di - U_dj|
//   adaptive: sum_{i<j} alpha_{d,ij} * (i-th largest - j-th largest entry
//             of row d), weights fixed at construction.
enum class PenaltyVariant { Uniform, Adaptive };

struct PenaltySpec {
    PenaltyVariant variant = PenaltyVariant::Uniform;
    int T = 0;                // task count (Adaptive only; Uniform adapts to input width)
    double weight_cap = 1e6;
    // Adaptive: per feature, weights on sorted-rank pairs (i, j), i < j,
    // flattened row-major over the strict upper triangle.
    std::vector<Eigen::VectorXd> pair_weights;

    static int pair_index(int i, int j, int T) {
        return i * T - i * (i + 1) / 2 + (j - i - 1);
    }
    int n_pairs() const { return T * (T - 1) / 2; }
};

PenaltySpec uniform_penalty();

// Adaptive weights 1/|W_di - W_dj| on the rank pairs of each row of W,
// capped at weight_cap (also used when the gap is below 1e-6), then
// rescaled to mean 1 per row.  If the induced rank coefficients are not
// nonincreasing, the penalty those weights define is nonconvex; the
// coefficients are then projected onto the monotone cone and re-expressed
// as adjacent-rank weights, which define the same kind of penalty.
PenaltySpec adaptive_from_reference(const Eigen::MatrixXd& W, double weight_cap = 1e6);

// Indices of v in descending value order, ties kept in original order.
std::vector<int> sorted_desc_perm(const Eigen::VectorXd& v);

// Linear coefficients of the penalty on the sorted cone: with the row
// sorted descending, the penalty equals sum_i c_i * u_(i).  Valid
// coefficients are nonincreasing with zero sum; anything else would make
// the penalty nonconvex and is rejected.
struct RankCoeffs {
    Eigen::VectorXd c;
};

RankCoeffs rank_coeffs(const PenaltySpec& penalty, double lambda1_hat, int T, int feature);

// Penalty value of U without any lambda1 scaling (callers apply it).
double penalty_value(const Eigen::MatrixXd& U, const PenaltySpec& penalty);

}  // namespace flextclus
