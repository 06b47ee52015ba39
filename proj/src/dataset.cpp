#include "flextclus/dataset.hpp"

#include <cmath>

namespace flextclus {

void check_hyperparams(const Hyperparams& hp) {
    auto bad = [](double v) { return v < 0.0 || !std::isfinite(v); };
    if (bad(hp.lambda1) || bad(hp.lambda2) || bad(hp.lambda3)) {
        throw invalid_input_error("lambda1, lambda2, lambda3 must be nonnegative and finite");
    }
    if (hp.max_iters < 1) throw invalid_input_error("max_iters must be positive");
    if (!(hp.rel_tol > 0.0) || !std::isfinite(hp.rel_tol)) {
        throw invalid_input_error("rel_tol must be positive and finite");
    }
}

ParamState zero_state(Eigen::Index D, int T) {
    ParamState s;
    s.U = Eigen::MatrixXd::Zero(D, T);
    s.V = Eigen::MatrixXd::Zero(D, T);
    return s;
}

bool StandardizationTransform::any_degenerate() const {
    for (const auto& t : tasks) {
        for (auto f : t.degenerate) {
            if (f) return true;
        }
    }
    return false;
}

StandardizationTransform identity_transform(Eigen::Index D, int T) {
    StandardizationTransform tf;
    tf.feature_dim = D;
    tf.tasks.resize(T);
    for (auto& t : tf.tasks) {
        t.mean = Eigen::VectorXd::Zero(D);
        t.scale = Eigen::VectorXd::Ones(D);
        t.degenerate.assign(static_cast<std::size_t>(D), 0);
        t.y_mean = 0.0;
    }
    return tf;
}

std::vector<std::string> validate_dataset(const MultiTaskDataset& ds) {
    std::vector<std::string> issues;
    if (ds.tasks.empty()) {
        issues.push_back("dataset has no tasks");
        return issues;
    }
    for (int t = 0; t < ds.T(); ++t) {
        const TaskData& td = ds.tasks[t];
        const std::string tag = "task " + std::to_string(t);
        if (td.X.cols() != ds.feature_dim) {
            issues.push_back(tag + ": " + std::to_string(td.X.cols()) +
                             " feature columns, expected " + std::to_string(ds.feature_dim));
        }
        if (td.X.rows() != td.y.size()) {
            issues.push_back(tag + ": " + std::to_string(td.X.rows()) +
                             " design rows vs " + std::to_string(td.y.size()) + " targets");
        }
        if (td.X.rows() < 1) {
            issues.push_back(tag + ": no samples");
        }
        for (Eigen::Index r = 0; r < td.X.rows(); ++r) {
            for (Eigen::Index c = 0; c < td.X.cols(); ++c) {
                if (!std::isfinite(td.X(r, c))) {
                    issues.push_back(tag + ": non-finite entry at row " + std::to_string(r) +
                                     ", column " + std::to_string(c));
                }
            }
        }
        for (Eigen::Index r = 0; r < td.y.size(); ++r) {
            if (!std::isfinite(td.y[r])) {
                issues.push_back(tag + ": non-finite target at row " + std::to_string(r));
            }
        }
    }
    return issues;
}

void validate_or_throw(const MultiTaskDataset& ds) {
    const auto issues = validate_dataset(ds);
    if (issues.empty()) return;
    std::string msg = "invalid dataset:";
    for (const auto& s : issues) msg += "\n  " + s;
    throw invalid_input_error(msg);
}

std::pair<MultiTaskDataset, StandardizationTransform>
standardize(const MultiTaskDataset& ds) {
    validate_or_throw(ds);

    MultiTaskDataset out = ds;
    StandardizationTransform tf;
    tf.feature_dim = ds.feature_dim;
    tf.tasks.resize(ds.T());

    for (int t = 0; t < ds.T(); ++t) {
        TaskData& td = out.tasks[t];
        const Eigen::Index n = td.X.rows();
        if (n < 2) {
            throw invalid_input_error("standardize: task " + std::to_string(t) +
                                      " needs at least 2 samples");
        }
        TaskStandardization& ts = tf.tasks[t];
        ts.mean = td.X.colwise().mean();
        ts.scale.resize(ds.feature_dim);
        ts.degenerate.assign(static_cast<std::size_t>(ds.feature_dim), 0);

        for (Eigen::Index c = 0; c < ds.feature_dim; ++c) {
            const double var =
                (td.X.col(c).array() - ts.mean[c]).square().sum() / static_cast<double>(n);
            const double sd = std::sqrt(var);
            if (sd <= 1e-12 * (1.0 + std::abs(ts.mean[c]))) {
                ts.scale[c] = 1.0;
                ts.degenerate[static_cast<std::size_t>(c)] = 1;
            } else {
                ts.scale[c] = sd;
            }
            td.X.col(c) = (td.X.col(c).array() - ts.mean[c]) / ts.scale[c];
        }
        ts.y_mean = td.y.mean();
        td.y.array() -= ts.y_mean;
    }
    return {std::move(out), std::move(tf)};
}

Eigen::MatrixXd apply_transform(const StandardizationTransform& tf, int task,
                                const Eigen::MatrixXd& raw_rows) {
    if (task < 0 || task >= static_cast<int>(tf.tasks.size())) {
        throw invalid_input_error("apply_transform: task index out of range");
    }
    if (raw_rows.cols() != tf.feature_dim) {
        throw invalid_input_error("apply_transform: row width " +
                                  std::to_string(raw_rows.cols()) + ", expected " +
                                  std::to_string(tf.feature_dim));
    }
    const TaskStandardization& ts = tf.tasks[task];
    Eigen::MatrixXd out = raw_rows;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        out.col(c) = (out.col(c).array() - ts.mean[c]) / ts.scale[c];
    }
    return out;
}

double objective(const ParamState& state, const MultiTaskDataset& ds,
                 const Hyperparams& hp, const PenaltySpec& penalty) {
    const Eigen::Index D = ds.feature_dim;
    const int T = ds.T();
    if (state.U.rows() != D || state.U.cols() != T ||
        state.V.rows() != D || state.V.cols() != T) {
        throw invalid_input_error("objective: parameter shape does not match the dataset");
    }
    double loss = 0.0;
    for (int t = 0; t < T; ++t) {
        const TaskData& td = ds.tasks[t];
        if (td.X.cols() != D || td.X.rows() != td.y.size()) {
            throw invalid_input_error("objective: task " + std::to_string(t) +
                                      " has inconsistent shapes");
        }
        const Eigen::VectorXd w = state.U.col(t) + state.V.col(t);
        loss += (td.y - td.X * w).squaredNorm();
    }
    return loss + hp.lambda1 * penalty_value(state.U, penalty) +
           hp.lambda2 * state.U.squaredNorm() + hp.lambda3 * state.V.squaredNorm();
}

}  // namespace flextclus
