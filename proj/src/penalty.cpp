#include "flextclus/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flextclus/prox.hpp"

namespace flextclus {

namespace {

// c_i = sum_{j>i} alpha_ij - sum_{j<i} alpha_ji over sorted-rank pairs
Eigen::VectorXd induced_coeffs(const Eigen::VectorXd& alpha, int T) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(T);
    for (int i = 0; i < T; ++i) {
        for (int j = i + 1; j < T; ++j) {
            const double a = alpha[PenaltySpec::pair_index(i, j, T)];
            c[i] += a;
            c[j] -= a;
        }
    }
    return c;
}

void check_coeffs(const Eigen::VectorXd& c) {
    const int T = static_cast<int>(c.size());
    const double scale = 1.0 + (T > 0 ? c.cwiseAbs().maxCoeff() : 0.0);
    const double tol = 1e-9 * scale;
    for (int i = 0; i + 1 < T; ++i) {
        if (c[i + 1] - c[i] > tol) {
            throw invalid_input_error(
                "rank coefficients increase at position " + std::to_string(i) +
                "; the induced penalty is nonconvex");
        }
    }
    if (std::abs(c.sum()) > tol * std::max(1, T)) {
        throw invalid_input_error("rank coefficients do not sum to zero");
    }
}

}  // namespace

PenaltySpec uniform_penalty() { return {}; }

std::vector<int> sorted_desc_perm(const Eigen::VectorXd& v) {
    std::vector<int> perm(v.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](int a, int b) { return v[a] > v[b]; });
    return perm;
}

PenaltySpec adaptive_from_reference(const Eigen::MatrixXd& W, double weight_cap) {
    if (W.cols() < 1 || W.rows() < 1) {
        throw invalid_input_error("adaptive penalty needs a nonempty reference matrix");
    }
    if (!(weight_cap > 0.0) || !std::isfinite(weight_cap)) {
        throw invalid_input_error("weight_cap must be positive and finite");
    }
    const int T = static_cast<int>(W.cols());
    const int D = static_cast<int>(W.rows());

    PenaltySpec spec;
    spec.variant = PenaltyVariant::Adaptive;
    spec.T = T;
    spec.weight_cap = weight_cap;
    spec.pair_weights.reserve(D);

    const int P = spec.n_pairs();
    for (int d = 0; d < D; ++d) {
        const Eigen::VectorXd row = W.row(d);
        const std::vector<int> perm = sorted_desc_perm(row);

        Eigen::VectorXd alpha(std::max(P, 0));
        for (int i = 0; i < T; ++i) {
            for (int j = i + 1; j < T; ++j) {
                const double gap = row[perm[i]] - row[perm[j]];  // >= 0 by sort order
                const double a = (gap < 1e-6) ? weight_cap : std::min(1.0 / gap, weight_cap);
                alpha[PenaltySpec::pair_index(i, j, T)] = a;
            }
        }
        if (P > 0) {
            alpha /= alpha.mean();  // mean weight 1 per row keeps lambda1 comparable
        }

        Eigen::VectorXd c = induced_coeffs(alpha, T);
        bool monotone = true;
        for (int i = 0; i + 1 < T; ++i) {
            if (c[i + 1] > c[i]) { monotone = false; break; }
        }
        if (!monotone) {
            // Nearest nonincreasing coefficients, re-expressed as weights on
            // adjacent rank pairs: with partial sums s_i = c_0 + ... + c_i,
            // sum_i c_i u_(i) = sum_i s_i (u_(i) - u_(i+1)), and s_i >= 0
            // whenever c is nonincreasing with zero sum.
            const Eigen::VectorXd cm = pav_nonincreasing(c);
            alpha.setZero();
            double partial = 0.0;
            for (int i = 0; i + 1 < T; ++i) {
                partial += cm[i];
                alpha[PenaltySpec::pair_index(i, i + 1, T)] = std::max(partial, 0.0);
            }
        }
        spec.pair_weights.push_back(std::move(alpha));
    }
    return spec;
}

RankCoeffs rank_coeffs(const PenaltySpec& penalty, double lambda1_hat, int T, int feature) {
    if (T < 1) throw invalid_input_error("rank_coeffs needs T >= 1");
    if (lambda1_hat < 0.0 || !std::isfinite(lambda1_hat)) {
        throw invalid_input_error("lambda1_hat must be nonnegative and finite");
    }

    RankCoeffs rc;
    if (penalty.variant == PenaltyVariant::Uniform) {
        rc.c.resize(T);
        for (int i = 0; i < T; ++i) {
            rc.c[i] = lambda1_hat * static_cast<double>(T - 1 - 2 * i);
        }
        return rc;  // exactly nonincreasing and zero-sum by construction
    }

    if (T != penalty.T) {
        throw invalid_input_error("rank_coeffs: T does not match the adaptive penalty");
    }
    if (feature < 0 || feature >= static_cast<int>(penalty.pair_weights.size())) {
        throw invalid_input_error("rank_coeffs: feature index out of range");
    }
    const Eigen::VectorXd& alpha = penalty.pair_weights[feature];
    if (alpha.size() != penalty.n_pairs()) {
        throw invalid_input_error("rank_coeffs: malformed adaptive weights");
    }
    for (int p = 0; p < alpha.size(); ++p) {
        if (!std::isfinite(alpha[p]) || alpha[p] < 0.0) {
            throw invalid_input_error("adaptive weights must be finite and nonnegative");
        }
    }
    rc.c = lambda1_hat * induced_coeffs(alpha, T);
    check_coeffs(rc.c);
    return rc;
}

double penalty_value(const Eigen::MatrixXd& U, const PenaltySpec& penalty) {
    const int D = static_cast<int>(U.rows());
    const int T = static_cast<int>(U.cols());

    if (penalty.variant == PenaltyVariant::Uniform) {
        // On a descending-sorted row the pairwise sum collapses to the
        // linear form sum_i (T - 1 - 2i) u_(i); O(T log T) per row.
        double total = 0.0;
        std::vector<double> z(T);
        for (int d = 0; d < D; ++d) {
            for (int t = 0; t < T; ++t) z[t] = U(d, t);
            std::sort(z.begin(), z.end(), std::greater<double>());
            double row = 0.0;
            for (int i = 0; i < T; ++i) {
                row += static_cast<double>(T - 1 - 2 * i) * z[i];
            }
            total += row;
        }
        return total;
    }

    if (T != penalty.T || D != static_cast<int>(penalty.pair_weights.size())) {
        throw invalid_input_error("penalty_value: U shape does not match the adaptive penalty");
    }
    double total = 0.0;
    for (int d = 0; d < D; ++d) {
        const Eigen::VectorXd row = U.row(d);
        const std::vector<int> perm = sorted_desc_perm(row);
        const Eigen::VectorXd& alpha = penalty.pair_weights[d];
        double acc = 0.0;
        for (int i = 0; i < T; ++i) {
            for (int j = i + 1; j < T; ++j) {
                acc += alpha[PenaltySpec::pair_index(i, j, T)] *
                       (row[perm[i]] - row[perm[j]]);
            }
        }
        total += acc;
    }
    return total;
}

}  // namespace flextclus
