#include "flextclus/estimators.hpp"

#include <fstream>

#include "json.hpp"

namespace flextclus {

namespace {

using nlohmann::json;

std::pair<MultiTaskDataset, StandardizationTransform>
prepare(const MultiTaskDataset& ds, const FitOptions& opts) {
    validate_or_throw(ds);
    if (opts.standardize) return standardize(ds);
    return {ds, identity_transform(ds.feature_dim, ds.T())};
}

Eigen::VectorXd ridge_weights(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              double kappa) {
    const Eigen::Index D = X.cols();
    const Eigen::MatrixXd A =
        X.transpose() * X + kappa * Eigen::MatrixXd::Identity(D, D);
    return Eigen::LDLT<Eigen::MatrixXd>(A).solve(X.transpose() * y);
}

SolveReport closed_form_report(ParamState state) {
    SolveReport r;
    r.state = std::move(state);
    r.converged = true;
    return r;
}

}  // namespace

FittedModel fit_flextclus(const MultiTaskDataset& ds, const Hyperparams& hp,
                          const FitOptions& opts) {
    auto [work, tf] = prepare(ds, opts);
    FittedModel m;
    m.method = "flextclus";
    m.transform = std::move(tf);
    m.hp = hp;
    m.penalty = uniform_penalty();
    m.report = solve(work, hp, m.penalty, nullptr, opts.solve);
    m.state = m.report.state;
    return m;
}

FittedModel fit_adaptive_flextclus(const MultiTaskDataset& ds, const Hyperparams& hp_stage1,
                                   const Hyperparams& hp_stage2, const FitOptions& opts) {
    auto [work, tf] = prepare(ds, opts);
    const PenaltySpec uniform = uniform_penalty();
    const SolveReport stage1 = solve(work, hp_stage1, uniform, nullptr, opts.solve);

    FittedModel m;
    m.method = "adaptive_flextclus";
    m.transform = std::move(tf);
    m.hp = hp_stage2;
    m.penalty = adaptive_from_reference(stage1.state.W());
    m.report = solve(work, hp_stage2, m.penalty, nullptr, opts.solve);
    m.state = m.report.state;
    return m;
}

FittedModel fit_ridge(const MultiTaskDataset& ds, double kappa, const FitOptions& opts) {
    if (!(kappa > 0.0)) throw invalid_input_error("fit_ridge: kappa must be positive");
    auto [work, tf] = prepare(ds, opts);

    ParamState state = zero_state(work.feature_dim, work.T());
    for (int t = 0; t < work.T(); ++t) {
        state.V.col(t) = ridge_weights(work.tasks[t].X, work.tasks[t].y, kappa);
    }

    FittedModel m;
    m.method = "ridge";
    m.transform = std::move(tf);
    // the clustering objective with lambda1 = 0, lambda2 = lambda3 = 2k
    // has the same minimizing W (effective ridge weight 2k*2k/4k = k)
    m.hp.lambda1 = 0.0;
    m.hp.lambda2 = 2.0 * kappa;
    m.hp.lambda3 = 2.0 * kappa;
    m.penalty = uniform_penalty();
    m.report = closed_form_report(state);
    m.state = std::move(state);
    return m;
}

FittedModel fit_pooling(const MultiTaskDataset& ds, double kappa, const FitOptions& opts) {
    if (!(kappa > 0.0)) throw invalid_input_error("fit_pooling: kappa must be positive");
    auto [work, tf] = prepare(ds, opts);

    Eigen::Index total = 0;
    for (const auto& td : work.tasks) total += td.X.rows();
    Eigen::MatrixXd X(total, work.feature_dim);
    Eigen::VectorXd y(total);
    Eigen::Index at = 0;
    for (const auto& td : work.tasks) {
        X.middleRows(at, td.X.rows()) = td.X;
        y.segment(at, td.y.size()) = td.y;
        at += td.X.rows();
    }
    const Eigen::VectorXd w = ridge_weights(X, y, kappa);

    ParamState state = zero_state(work.feature_dim, work.T());
    for (int t = 0; t < work.T(); ++t) state.V.col(t) = w;

    FittedModel m;
    m.method = "pooling";
    m.transform = std::move(tf);
    m.hp.lambda1 = 0.0;
    m.hp.lambda2 = 2.0 * kappa;
    m.hp.lambda3 = 2.0 * kappa;
    m.penalty = uniform_penalty();
    m.report = closed_form_report(state);
    m.state = std::move(state);
    return m;
}

Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& raw_rows,
                        int task) {
    if (task < 0 || task >= static_cast<int>(model.transform.tasks.size())) {
        throw invalid_input_error("predict: task index out of range");
    }
    if (raw_rows.cols() != model.transform.feature_dim) {
        throw invalid_input_error("predict: row width " + std::to_string(raw_rows.cols()) +
                                  ", expected " +
                                  std::to_string(model.transform.feature_dim));
    }
    const Eigen::MatrixXd rows = apply_transform(model.transform, task, raw_rows);
    const Eigen::VectorXd w = model.state.U.col(task) + model.state.V.col(task);
    return (rows * w).array() + model.transform.tasks[static_cast<std::size_t>(task)].y_mean;
}

void save_model(const FittedModel& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_matrix_csv(dir / "U.csv", model.state.U);
    write_matrix_csv(dir / "V.csv", model.state.V);

    json j;
    j["method"] = model.method;
    j["feature_dim"] = model.transform.feature_dim;
    j["tasks"] = model.transform.tasks.size();
    j["hyperparams"] = {{"lambda1", model.hp.lambda1}, {"lambda2", model.hp.lambda2},
                        {"lambda3", model.hp.lambda3}, {"max_iters", model.hp.max_iters},
                        {"rel_tol", model.hp.rel_tol}};
    json pen;
    pen["variant"] =
        model.penalty.variant == PenaltyVariant::Uniform ? "uniform" : "adaptive";
    if (model.penalty.variant == PenaltyVariant::Adaptive) {
        pen["T"] = model.penalty.T;
        pen["weight_cap"] = model.penalty.weight_cap;
        json rows = json::array();
        for (const auto& alpha : model.penalty.pair_weights) {
            rows.push_back(std::vector<double>(alpha.data(), alpha.data() + alpha.size()));
        }
        pen["pair_weights"] = std::move(rows);
    }
    j["penalty"] = std::move(pen);

    json tasks = json::array();
    for (const auto& ts : model.transform.tasks) {
        json t;
        t["mean"] = std::vector<double>(ts.mean.data(), ts.mean.data() + ts.mean.size());
        t["scale"] = std::vector<double>(ts.scale.data(), ts.scale.data() + ts.scale.size());
        t["degenerate"] = std::vector<int>(ts.degenerate.begin(), ts.degenerate.end());
        t["y_mean"] = ts.y_mean;
        tasks.push_back(std::move(t));
    }
    j["transform"] = std::move(tasks);
    j["report"] = {{"converged", model.report.converged},
                   {"iterations", model.report.iterations},
                   {"final_L", model.report.final_L}};

    std::ofstream out(dir / "model.json");
    if (!out) {
        throw invalid_input_error("cannot open " + (dir / "model.json").string() +
                                  " for writing");
    }
    out << j.dump(2) << '\n';
}

FittedModel load_model(const std::filesystem::path& dir) {
    std::ifstream in(dir / "model.json");
    if (!in) {
        throw invalid_input_error("cannot open " + (dir / "model.json").string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw invalid_input_error("malformed model.json: " + std::string(e.what()));
    }

    FittedModel m;
    try {
        m.method = j.at("method").get<std::string>();
        m.state.U = read_matrix_csv(dir / "U.csv");
        m.state.V = read_matrix_csv(dir / "V.csv");

        const auto& h = j.at("hyperparams");
        m.hp.lambda1 = h.at("lambda1").get<double>();
        m.hp.lambda2 = h.at("lambda2").get<double>();
        m.hp.lambda3 = h.at("lambda3").get<double>();
        m.hp.max_iters = h.at("max_iters").get<int>();
        m.hp.rel_tol = h.at("rel_tol").get<double>();

        const auto& pen = j.at("penalty");
        if (pen.at("variant").get<std::string>() == "adaptive") {
            m.penalty.variant = PenaltyVariant::Adaptive;
            m.penalty.T = pen.at("T").get<int>();
            m.penalty.weight_cap = pen.at("weight_cap").get<double>();
            for (const auto& row : pen.at("pair_weights")) {
                const auto vals = row.get<std::vector<double>>();
                m.penalty.pair_weights.push_back(
                    Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                                      static_cast<Eigen::Index>(vals.size())));
            }
        }

        m.transform.feature_dim = j.at("feature_dim").get<Eigen::Index>();
        for (const auto& t : j.at("transform")) {
            TaskStandardization ts;
            const auto mean = t.at("mean").get<std::vector<double>>();
            const auto scale = t.at("scale").get<std::vector<double>>();
            ts.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                                        static_cast<Eigen::Index>(mean.size()));
            ts.scale = Eigen::Map<const Eigen::VectorXd>(
                scale.data(), static_cast<Eigen::Index>(scale.size()));
            const auto deg = t.at("degenerate").get<std::vector<int>>();
            ts.degenerate.assign(deg.begin(), deg.end());
            ts.y_mean = t.at("y_mean").get<double>();
            m.transform.tasks.push_back(std::move(ts));
        }

        const auto& r = j.at("report");
        m.report.converged = r.at("converged").get<bool>();
        m.report.iterations = r.at("iterations").get<int>();
        m.report.final_L = r.at("final_L").get<double>();
        m.report.state = m.state;
    } catch (const json::exception& e) {
        throw invalid_input_error("model.json is missing fields: " + std::string(e.what()));
    }

    if (m.state.U.rows() != m.transform.feature_dim ||
        m.state.V.rows() != m.transform.feature_dim ||
        m.state.U.cols() != static_cast<Eigen::Index>(m.transform.tasks.size()) ||
        m.state.V.cols() != static_cast<Eigen::Index>(m.transform.tasks.size())) {
        throw invalid_input_error("model files disagree on dimensions");
    }
    return m;
}

}  // namespace flextclus
