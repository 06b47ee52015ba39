#include "flextclus/solver.hpp"

#include <cmath>

#include "flextclus/prox.hpp"

namespace flextclus {

namespace {

constexpr double kMaxL = 1e30;

void check_state_shape(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V,
                       const MultiTaskDataset& ds) {
    if (U.rows() != ds.feature_dim || V.rows() != ds.feature_dim ||
        U.cols() != ds.T() || V.cols() != ds.T()) {
        throw invalid_input_error("parameter shape does not match the dataset");
    }
    for (int t = 0; t < ds.T(); ++t) {
        if (ds.tasks[t].X.cols() != ds.feature_dim ||
            ds.tasks[t].X.rows() != ds.tasks[t].y.size()) {
            throw invalid_input_error("task " + std::to_string(t) +
                                      " has inconsistent shapes");
        }
    }
}

struct ProxStep {
    Eigen::MatrixXd U, V;
    double f_new = 0.0;
    double L = 0.0;
};

// Doubling line search from L_in; the accepted prox pair and its loss come
// back with the accepted L so the caller never re-evaluates.
ProxStep backtrack_step(const SmoothContext& ctx, const PenaltySpec& penalty,
                        const Hyperparams& hp, const Eigen::MatrixXd& U_t,
                        const Eigen::MatrixXd& V_t, double f_t,
                        const Eigen::MatrixXd& grad, double L_in, int threads) {
    double L = L_in;
    for (;;) {
        if (L > kMaxL) {
            throw divergence_error("line search exceeded L = 1e30; the iteration diverged");
        }
        const Eigen::MatrixXd U_hat = U_t - grad / L;
        const Eigen::MatrixXd V_hat = V_t - grad / L;
        const double l1h = 2.0 * hp.lambda1 / L;
        const double l2h = 2.0 * hp.lambda2 / L;
        const double l3h = 2.0 * hp.lambda3 / L;
        Eigen::MatrixXd U_new = prox_all_rows(U_hat, penalty, l1h, l2h, threads);
        Eigen::MatrixXd V_new = shrink_v(V_hat, l3h);

        const Eigen::MatrixXd dU = U_new - U_t;
        const Eigen::MatrixXd dV = V_new - V_t;
        const double f_new = smooth_eval(ctx, U_new + V_new, nullptr, threads);
        const double lin = grad.cwiseProduct(dU + dV).sum();
        const double quad = 0.5 * L * (dU.squaredNorm() + dV.squaredNorm());
        // near a fixed point the decrease margin shrinks to rounding noise in
        // f; without ulp-scale slack that noise doubles L without bound and
        // freezes the iteration on a fake plateau
        const double slack = 1e-12 * (1.0 + std::abs(f_t));
        if (f_new <= f_t + lin + quad + slack) {
            return {std::move(U_new), std::move(V_new), f_new, L};
        }
        L *= 2.0;
    }
}

double regularizer_value(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V,
                         const Hyperparams& hp, const PenaltySpec& penalty) {
    return hp.lambda1 * penalty_value(U, penalty) + hp.lambda2 * U.squaredNorm() +
           hp.lambda3 * V.squaredNorm();
}

}  // namespace

SmoothEval smooth_loss_and_grad(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V,
                                const MultiTaskDataset& ds) {
    check_state_shape(U, V, ds);
    const SmoothContext ctx = make_smooth_context(ds, /*allow_gram=*/false);
    SmoothEval ev;
    ev.loss = smooth_eval_serial(ctx, U + V, &ev.grad);
    return ev;
}

void gradient_step(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V,
                   const Eigen::MatrixXd& grad, double L,
                   Eigen::MatrixXd& U_hat, Eigen::MatrixXd& V_hat) {
    if (!(L > 0.0)) throw invalid_input_error("gradient_step: L must be positive");
    U_hat = U - grad / L;
    V_hat = V - grad / L;
}

double backtrack_L(const ParamState& at, const MultiTaskDataset& ds,
                   const Hyperparams& hp, const PenaltySpec& penalty, double L_init) {
    if (!(L_init > 0.0)) throw invalid_input_error("backtrack_L: L_init must be positive");
    check_state_shape(at.U, at.V, ds);
    check_hyperparams(hp);
    const SmoothContext ctx = make_smooth_context(ds);
    Eigen::MatrixXd grad;
    const double f_t = smooth_eval_serial(ctx, at.U + at.V, &grad);
    return backtrack_step(ctx, penalty, hp, at.U, at.V, f_t, grad, L_init, 0).L;
}

double power_lipschitz_estimate(const MultiTaskDataset& ds) {
    double lmax = 0.0;
    for (const auto& td : ds.tasks) {
        const Eigen::Index D = td.X.cols();
        if (D == 0 || td.X.rows() == 0) continue;
        Eigen::VectorXd v = Eigen::VectorXd::Ones(D) / std::sqrt(static_cast<double>(D));
        double lambda = 0.0;
        for (int it = 0; it < 50; ++it) {
            const Eigen::VectorXd Av = td.X.transpose() * (td.X * v);
            const double norm = Av.norm();
            if (norm <= 0.0) { lambda = 0.0; break; }
            lambda = v.dot(Av);
            v = Av / norm;
        }
        lmax = std::max(lmax, lambda);
    }
    return 1.01 * 4.0 * lmax;
}

SolveReport solve(const MultiTaskDataset& ds, const Hyperparams& hp,
                  const PenaltySpec& penalty, const ParamState* init,
                  const SolveOptions& opts) {
    check_hyperparams(hp);
    validate_or_throw(ds);

    const Eigen::Index D = ds.feature_dim;
    const int T = ds.T();
    ParamState prev = init ? *init : zero_state(D, T);
    check_state_shape(prev.U, prev.V, ds);

    const SmoothContext ctx = make_smooth_context(ds, opts.allow_gram);
    const int threads = opts.threads;

    double L = opts.L_init;
    if (!(L > 0.0)) throw invalid_input_error("solve: L_init must be positive");
    if (opts.power_init) L = std::max(L, power_lipschitz_estimate(ds));

    // extrapolated point starts at the initial state
    Eigen::MatrixXd U_t = prev.U, V_t = prev.V;
    double tau = 1.0;
    double obj_prev = smooth_eval(ctx, prev.U + prev.V, nullptr, threads) +
                      regularizer_value(prev.U, prev.V, hp, penalty);

    SolveReport report;
    Eigen::MatrixXd grad;
    // The momentum ripple makes single near-ties in the objective meaningless:
    // successive values straddle a crest long before the iterate settles, so
    // the relative-change test must hold on consecutive prox outputs.
    constexpr int kSustained = 3;
    int quiet = 0;
    for (int k = 1; k <= hp.max_iters; ++k) {
        const double f_t = smooth_eval(ctx, U_t + V_t, &grad, threads);
        ProxStep step = backtrack_step(ctx, penalty, hp, U_t, V_t, f_t, grad, L, threads);
        L = step.L;  // never decreases across iterations

        const double obj =
            step.f_new + regularizer_value(step.U, step.V, hp, penalty);
        if (!std::isfinite(obj)) {
            throw divergence_error("objective became non-finite at iteration " +
                                   std::to_string(k));
        }
        if (opts.record_trace) report.trace.push_back(obj);
        report.iterations = k;

        const bool quiet_now = std::abs(obj - obj_prev) /
                                   std::max(1.0, std::abs(obj_prev)) <
                               hp.rel_tol;
        quiet = quiet_now ? quiet + 1 : 0;
        const bool done = quiet >= kSustained;

        const double tau_next =
            opts.use_momentum ? (1.0 + std::sqrt(1.0 + 4.0 * tau * tau)) / 2.0 : 1.0;
        const double beta = (tau - 1.0) / tau_next;
        U_t = step.U + beta * (step.U - prev.U);
        V_t = step.V + beta * (step.V - prev.V);
        prev.U = std::move(step.U);
        prev.V = std::move(step.V);
        tau = tau_next;
        obj_prev = obj;

        if (done) {
            report.converged = true;
            break;
        }
    }
    report.state = std::move(prev);
    report.final_L = L;
    return report;
}

std::vector<Prop2Violation> prop2_check(const SolveReport& report, const Hyperparams& hp,
                                        double margin) {
    if (!(hp.lambda3 > 0.0)) {
        throw invalid_input_error("prop2_check needs lambda3 > 0");
    }
    const Eigen::MatrixXd W = report.state.W();
    const Eigen::MatrixXd& U = report.state.U;
    const int D = static_cast<int>(W.rows());
    const int T = static_cast<int>(W.cols());
    const double ratio = hp.lambda1 / hp.lambda3;
    const double fuse_below = ratio * (1.0 - margin);
    const double split_above = (T - 1) * ratio * (1.0 + margin);

    std::vector<Prop2Violation> violations;
    for (int d = 0; d < D; ++d) {
        for (int i = 0; i < T; ++i) {
            for (int j = i + 1; j < T; ++j) {
                const double gap = std::abs(W(d, i) - W(d, j));
                const bool fused = U(d, i) == U(d, j);
                if (gap < fuse_below && !fused) {
                    violations.push_back({d, i, j, gap, true});
                } else if (gap > split_above && fused) {
                    violations.push_back({d, i, j, gap, false});
                }
            }
        }
    }
    return violations;
}

}  // namespace flextclus
