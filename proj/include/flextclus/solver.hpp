#pragma once

#include <vector>

#include "flextclus/kernels.hpp"

namespace flextclus {

struct SolveOptions {
    double L_init = 1.0;
    bool power_init = false;   // seed L with 1.01 * 4 * max_t lambda_max(X_t'X_t)
    bool use_momentum = true;  // false pins tau to 1 (plain proximal gradient)
    int threads = 0;
    bool record_trace = true;
    bool allow_gram = true;    // false forces the residual-form loss/gradient
};

struct SolveReport {
    ParamState state;           // last prox output, so row ties are exact
    std::vector<double> trace;  // objective after each prox step
    int iterations = 0;
    bool converged = false;
    double final_L = 0.0;
};

struct SmoothEval {
    double loss;
    Eigen::MatrixXd grad;  // shared by the U and V blocks
};

// loss = sum_t ||y_t - X_t (u_t + v_t)||^2; column t of the gradient of
// either block is 2 X_t'(X_t (u_t+v_t) - y_t).
SmoothEval smooth_loss_and_grad(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V,
                                const MultiTaskDataset& ds);

// U_hat = U - grad / L, V_hat = V - grad / L.
void gradient_step(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V,
                   const Eigen::MatrixXd& grad, double L,
                   Eigen::MatrixXd& U_hat, Eigen::MatrixXd& V_hat);

// Smallest L in {L_init * 2^m} whose prox output p satisfies the quadratic
// majorization f(p) <= f(x) + <grad, p - x> + (L/2)||p - x||_F^2 at the
// given point.  Gives up past 1e30.
double backtrack_L(const ParamState& at, const MultiTaskDataset& ds,
                   const Hyperparams& hp, const PenaltySpec& penalty, double L_init);

// 1.01 * 4 * max_t lambda_max(X_t'X_t), each factor from 50 power-iteration
// steps; an upper bound seed for L that skips early line-search doublings.
double power_lipschitz_estimate(const MultiTaskDataset& ds);

// Accelerated proximal gradient on the joint (U, V) objective.  Starts from
// zero (or `init`), doubles L inside the line search and never lowers it,
// recomputes the prox scalings 2*lambda_i/L from the accepted L, stops when
// the relative objective change between prox outputs drops below rel_tol.
SolveReport solve(const MultiTaskDataset& ds, const Hyperparams& hp,
                  const PenaltySpec& penalty, const ParamState* init = nullptr,
                  const SolveOptions& opts = {});

struct Prop2Violation {
    int feature = 0, task_i = 0, task_j = 0;
    double gap = 0.0;           // |W_di - W_dj|
    bool expected_fused = false;  // gap below the fusion threshold yet U entries differ
};

// Fusion consistency of a converged solution: pairs with
// |W_di - W_dj| < (lambda1/lambda3)(1 - margin) must have exactly equal U
// entries; pairs with |W_di - W_dj| > (T-1)(lambda1/lambda3)(1 + margin)
// must have distinct ones.  Needs lambda3 > 0.
std::vector<Prop2Violation> prop2_check(const SolveReport& report, const Hyperparams& hp,
                                        double margin = 1e-3);

}  // namespace flextclus
