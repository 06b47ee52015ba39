#include "flextclus/prox.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace flextclus {

Eigen::VectorXd pav_nonincreasing(const Eigen::VectorXd& m) {
    const int n = static_cast<int>(m.size());
    Eigen::VectorXd out(n);
    if (n == 0) return out;

    std::vector<double> sum(n);
    std::vector<int> cnt(n);
    int top = 0;
    for (int i = 0; i < n; ++i) {
        sum[top] = m[i];
        cnt[top] = 1;
        ++top;
        // merge while the last block does not sit strictly below its predecessor
        while (top >= 2 && sum[top - 2] / cnt[top - 2] <= sum[top - 1] / cnt[top - 1]) {
            sum[top - 2] += sum[top - 1];
            cnt[top - 2] += cnt[top - 1];
            --top;
        }
    }
    int pos = 0;
    for (int b = 0; b < top; ++b) {
        const double v = sum[b] / cnt[b];
        for (int r = 0; r < cnt[b]; ++r) out[pos++] = v;
    }
    return out;
}

Eigen::VectorXd prox_row(const Eigen::VectorXd& u_hat, const RankCoeffs& coeffs,
                         double lambda2_hat) {
    const int T = static_cast<int>(u_hat.size());
    if (coeffs.c.size() != T) {
        throw invalid_input_error("prox_row: coefficient length does not match the row");
    }
    if (lambda2_hat < 0.0 || !std::isfinite(lambda2_hat)) {
        throw invalid_input_error("prox_row: lambda2_hat must be nonnegative and finite");
    }
    const double scale = 1.0 + (T > 0 ? coeffs.c.cwiseAbs().maxCoeff() : 0.0);
    for (int i = 0; i + 1 < T; ++i) {
        if (coeffs.c[i + 1] - coeffs.c[i] > 1e-9 * scale) {
            throw invalid_input_error("prox_row: rank coefficients are not nonincreasing");
        }
    }

    const std::vector<int> perm = sorted_desc_perm(u_hat);
    Eigen::VectorXd m(T);
    const double denom = 1.0 + lambda2_hat;
    for (int k = 0; k < T; ++k) {
        m[k] = (u_hat[perm[k]] - coeffs.c[k] / 2.0) / denom;
    }
    const Eigen::VectorXd p = pav_nonincreasing(m);
    Eigen::VectorXd out(T);
    for (int k = 0; k < T; ++k) out[perm[k]] = p[k];
    return out;
}

Eigen::MatrixXd shrink_v(const Eigen::MatrixXd& v_hat, double lambda3_hat) {
    if (lambda3_hat < 0.0 || !std::isfinite(lambda3_hat)) {
        throw invalid_input_error("shrink_v: lambda3_hat must be nonnegative and finite");
    }
    return v_hat / (1.0 + lambda3_hat);
}

double prox_objective(const Eigen::VectorXd& u, const Eigen::VectorXd& u_hat,
                      const PenaltySpec& penalty, int feature,
                      double lambda1_hat, double lambda2_hat) {
    const int T = static_cast<int>(u.size());
    if (u_hat.size() != T) {
        throw invalid_input_error("prox_objective: length mismatch");
    }
    double obj = (u - u_hat).squaredNorm() + lambda2_hat * u.squaredNorm();

    if (penalty.variant == PenaltyVariant::Uniform) {
        double pen = 0.0;
        for (int i = 0; i < T; ++i) {
            for (int j = i + 1; j < T; ++j) pen += std::abs(u[i] - u[j]);
        }
        return obj + lambda1_hat * pen;
    }

    if (T != penalty.T || feature < 0 ||
        feature >= static_cast<int>(penalty.pair_weights.size())) {
        throw invalid_input_error("prox_objective: penalty does not match the row");
    }
    const std::vector<int> perm = sorted_desc_perm(u);
    const Eigen::VectorXd& alpha = penalty.pair_weights[feature];
    double pen = 0.0;
    for (int i = 0; i < T; ++i) {
        for (int j = i + 1; j < T; ++j) {
            pen += alpha[PenaltySpec::pair_index(i, j, T)] * (u[perm[i]] - u[perm[j]]);
        }
    }
    return obj + lambda1_hat * pen;
}

Eigen::VectorXd oracle_prox_row(const Eigen::VectorXd& u_hat, const PenaltySpec& penalty,
                                int feature, double lambda1_hat, double lambda2_hat) {
    const int T = static_cast<int>(u_hat.size());
    if (T < 1) throw invalid_input_error("oracle_prox_row: empty row");
    if (T > 12) throw invalid_input_error("oracle_prox_row: T > 12 is too expensive");

    const bool adaptive = penalty.variant == PenaltyVariant::Adaptive;
    if (adaptive &&
        (T != penalty.T || feature < 0 ||
         feature >= static_cast<int>(penalty.pair_weights.size()))) {
        throw invalid_input_error("oracle_prox_row: penalty does not match the row");
    }
    const Eigen::VectorXd* alpha = adaptive ? &penalty.pair_weights[feature] : nullptr;
    auto weight_at = [&](int i, int j) {  // sorted positions, i < j
        return adaptive ? (*alpha)[PenaltySpec::pair_index(i, j, T)] : 1.0;
    };

    const std::vector<int> perm = sorted_desc_perm(u_hat);
    Eigen::VectorXd z(T);
    for (int k = 0; k < T; ++k) z[k] = u_hat[perm[k]];

    const double denom = 1.0 + lambda2_hat;
    Eigen::VectorXd best;
    double best_obj = 0.0;
    Eigen::VectorXd cand_sorted(T), cand(T);

    const unsigned n_masks = 1u << (T - 1);
    for (unsigned mask = 0; mask < n_masks; ++mask) {
        // bit b set: block boundary between sorted positions b and b+1
        std::vector<int> starts{0};
        for (int b = 0; b + 1 < T; ++b) {
            if (mask & (1u << b)) starts.push_back(b + 1);
        }
        starts.push_back(T);

        for (std::size_t a = 0; a + 1 < starts.size(); ++a) {
            const int lo = starts[a], hi = starts[a + 1];
            double zbar = 0.0;
            for (int k = lo; k < hi; ++k) zbar += z[k];
            zbar /= (hi - lo);

            double later = 0.0, earlier = 0.0;
            for (int i = lo; i < hi; ++i) {
                for (int j = hi; j < T; ++j) later += weight_at(i, j);
                for (int j = 0; j < lo; ++j) earlier += weight_at(j, i);
            }
            const double b_a =
                (zbar - (lambda1_hat / 2.0) * (later - earlier) / (hi - lo)) / denom;
            for (int k = lo; k < hi; ++k) cand_sorted[k] = b_a;
        }
        for (int k = 0; k < T; ++k) cand[perm[k]] = cand_sorted[k];

        const double obj =
            prox_objective(cand, u_hat, penalty, feature, lambda1_hat, lambda2_hat);
        if (mask == 0 || obj < best_obj) {
            best_obj = obj;
            best = cand;
        }
    }
    return best;
}

}  // namespace flextclus
