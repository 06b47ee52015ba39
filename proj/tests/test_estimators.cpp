#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <Eigen/Dense>

#include "doctest.h"
#include "flextclus/dataset.hpp"
#include "flextclus/errors.hpp"
#include "flextclus/estimators.hpp"
#include "flextclus/evalkit.hpp"
#include "flextclus/rng.hpp"

using namespace flextclus;
namespace fs = std::filesystem;

namespace {

MultiTaskDataset gaussian_dataset(std::uint64_t seed, int D, int T, int n,
                                  const Eigen::MatrixXd* W_true = nullptr,
                                  double noise = 0.1) {
    GaussianStream g(make_stream(seed, 50, 0));
    MultiTaskDataset ds;
    ds.feature_dim = D;
    for (int t = 0; t < T; ++t) {
        TaskData td;
        td.X.resize(n, D);
        td.y.resize(n);
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < D; ++d) td.X(i, d) = g.next();
            double clean = 0.0;
            if (W_true) clean = td.X.row(i).dot(W_true->col(t));
            td.y(i) = clean + noise * g.next();
        }
        ds.tasks.push_back(td);
    }
    return ds;
}

fs::path scratch_dir() {
    static int counter = 0;
    const fs::path p =
        fs::temp_directory_path() / ("flextclus_estimators_" + std::to_string(++counter));
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("ridge on the identity design") {
    MultiTaskDataset ds;
    ds.feature_dim = 2;
    TaskData t;
    t.X = Eigen::MatrixXd::Identity(2, 2);
    t.y.resize(2);
    t.y << 1, 0;
    ds.tasks = {t};
    FitOptions raw;
    raw.standardize = false;
    const FittedModel m = fit_ridge(ds, 1.0, raw);
    // (I + I)^-1 e1 = e1 / 2
    CHECK(m.state.V(0, 0) == doctest::Approx(0.5));
    CHECK(m.state.V(1, 0) == doctest::Approx(0.0));
    CHECK(m.state.U.cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd pred = predict(m, t.X, 0);
    CHECK(pred(0) == doctest::Approx(0.5));
    CHECK(pred(1) == doctest::Approx(0.0));
    CHECK_THROWS_AS(fit_ridge(ds, 0.0, raw), invalid_input_error);
}

TEST_CASE("pooling a single task equals ridge") {
    const MultiTaskDataset ds = gaussian_dataset(61, 3, 1, 15);
    const FittedModel a = fit_ridge(ds, 0.7);
    const FittedModel b = fit_pooling(ds, 0.7);
    CHECK((a.state.V - b.state.V).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("pooling shares one weight vector") {
    const MultiTaskDataset ds = gaussian_dataset(62, 3, 4, 10);
    const FittedModel m = fit_pooling(ds, 0.5);
    for (int t = 1; t < 4; ++t)
        CHECK((m.state.V.col(t) - m.state.V.col(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cluster solver with lambda1 = 0 matches ridge predictions") {
    const MultiTaskDataset ds = gaussian_dataset(63, 4, 3, 25);
    Hyperparams hp{0.0, 2.0, 2.0, 50000, 1e-12};
    FitOptions fo;
    const FittedModel a = fit_flextclus(ds, hp, fo);
    // kappa = lambda2*lambda3/(lambda2+lambda3) = 1
    const FittedModel b = fit_ridge(ds, 1.0, fo);
    for (int t = 0; t < 3; ++t) {
        const Eigen::VectorXd pa = predict(a, ds.tasks[t].X, t);
        const Eigen::VectorXd pb = predict(b, ds.tasks[t].X, t);
        CHECK((pa - pb).cwiseAbs().maxCoeff() <= 1e-5 * (1.0 + pb.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("a dominant cluster penalty fuses every row") {
    const MultiTaskDataset ds = gaussian_dataset(64, 3, 4, 12);
    const Hyperparams hp{1e8, 1.0, 1.0, 50000, 1e-12};
    const FittedModel m = fit_flextclus(ds, hp);
    for (int d = 0; d < 3; ++d) {
        const double spread =
            m.state.U.row(d).maxCoeff() - m.state.U.row(d).minCoeff();
        CHECK(spread <= 1e-6);
    }
}

TEST_CASE("adaptive refit sharpens a planted split") {
    // two tied tasks and one far-away task
    const int D = 4, T = 3, n = 60;
    Eigen::MatrixXd W_true(D, T);
    W_true.col(0) = Eigen::VectorXd::Constant(D, 1.0);
    W_true.col(1) = Eigen::VectorXd::Constant(D, 1.0);
    W_true.col(2) = Eigen::VectorXd::Constant(D, 8.0);
    const MultiTaskDataset ds = gaussian_dataset(65, D, T, n, &W_true, 0.3);

    FitOptions raw;
    raw.standardize = false;
    const Hyperparams hp{2.0, 0.05, 20.0, 50000, 1e-11};
    const FittedModel m = fit_adaptive_flextclus(ds, hp, raw);
    CHECK(m.method == "adaptive_flextclus");
    CHECK(m.penalty.variant == PenaltyVariant::Adaptive);

    Eigen::VectorXi want(T);
    want << 0, 0, 1;
    const ClusterMatrix labels = extract_clusters(m.state.U, 1e-7);
    for (int d = 0; d < D; ++d)
        CHECK(rand_index(labels.row(d).transpose(), want) == doctest::Approx(1.0));
}

TEST_CASE("two-stage fit reuses the stage-one structure") {
    const MultiTaskDataset ds = gaussian_dataset(66, 3, 3, 20);
    const Hyperparams hp{1.0, 0.5, 1.0, 20000, 1e-10};
    const FittedModel two = fit_adaptive_flextclus(ds, hp, hp, {});
    REQUIRE(two.penalty.variant == PenaltyVariant::Adaptive);
    REQUIRE(two.penalty.pair_weights.size() == 3);
    for (int d = 0; d < 3; ++d) {
        const auto& w = two.penalty.pair_weights[d];
        REQUIRE(w.size() == 3);
        CHECK(w.sum() > 0.0);
        for (int p = 0; p < 3; ++p) CHECK(w(p) >= 0.0);
        // stage-two coefficients must be usable by the row prox
        const RankCoeffs rc = rank_coeffs(two.penalty, 1.0, 3, d);
        CHECK(rc.c.size() == 3);
    }
}

TEST_CASE("model save and load round trip") {
    const MultiTaskDataset ds = gaussian_dataset(67, 3, 3, 18);
    const Hyperparams hp{0.8, 0.4, 1.2, 20000, 1e-10};
    const FittedModel m = fit_adaptive_flextclus(ds, hp, FitOptions{});
    const fs::path d1 = scratch_dir(), d2 = scratch_dir();
    save_model(m, d1);
    const FittedModel back = load_model(d1);

    CHECK(back.method == m.method);
    CHECK((back.state.U - m.state.U).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.state.V - m.state.V).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.hp.lambda1 == m.hp.lambda1);
    CHECK(back.hp.rel_tol == m.hp.rel_tol);
    REQUIRE(back.penalty.variant == m.penalty.variant);
    REQUIRE(back.penalty.pair_weights.size() == m.penalty.pair_weights.size());
    for (std::size_t d = 0; d < m.penalty.pair_weights.size(); ++d)
        CHECK((back.penalty.pair_weights[d] - m.penalty.pair_weights[d])
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    for (int t = 0; t < 3; ++t) {
        CHECK(back.transform.tasks[t].y_mean == m.transform.tasks[t].y_mean);
        const Eigen::VectorXd pa = predict(m, ds.tasks[t].X, t);
        const Eigen::VectorXd pb = predict(back, ds.tasks[t].X, t);
        CHECK((pa - pb).cwiseAbs().maxCoeff() == 0.0);
    }

    // saving the loaded model reproduces the files byte for byte
    save_model(back, d2);
    CHECK(slurp(d1 / "model.json") == slurp(d2 / "model.json"));
    CHECK(slurp(d1 / "U.csv") == slurp(d2 / "U.csv"));
    CHECK(slurp(d1 / "V.csv") == slurp(d2 / "V.csv"));
}

TEST_CASE("load_model rejects broken directories") {
    const fs::path dir = scratch_dir();
    CHECK_THROWS_AS(load_model(dir), invalid_input_error);

    const MultiTaskDataset ds = gaussian_dataset(68, 2, 2, 10);
    const FittedModel m = fit_ridge(ds, 1.0);
    save_model(m, dir);
    std::ofstream(dir / "model.json") << "{not json";
    CHECK_THROWS_AS(load_model(dir), invalid_input_error);
}

TEST_CASE("predict input checks") {
    const MultiTaskDataset ds = gaussian_dataset(69, 3, 2, 10);
    const FittedModel m = fit_ridge(ds, 1.0);
    const Eigen::MatrixXd wrong = Eigen::MatrixXd::Zero(4, 2);
    CHECK_THROWS_AS(predict(m, wrong, 0), invalid_input_error);
    const Eigen::MatrixXd ok = Eigen::MatrixXd::Zero(4, 3);
    CHECK_THROWS_AS(predict(m, ok, 2), invalid_input_error);
    CHECK_THROWS_AS(predict(m, ok, -1), invalid_input_error);
}

TEST_CASE("standardized prediction maps back to raw targets") {
    // near-noiseless planted weights: predictions must recover targets
    Eigen::MatrixXd W_true(3, 2);
    W_true << 1, -2, 0.5, 3, -1, 0;
    const MultiTaskDataset ds = gaussian_dataset(70, 3, 2, 40, &W_true, 0.0);
    const FittedModel m = fit_ridge(ds, 1e-8);
    for (int t = 0; t < 2; ++t) {
        const Eigen::VectorXd pred = predict(m, ds.tasks[t].X, t);
        CHECK((pred - ds.tasks[t].y).cwiseAbs().maxCoeff() <= 1e-5);
    }
}

TEST_CASE("fitting rejects invalid datasets") {
    MultiTaskDataset empty;
    CHECK_THROWS_AS(fit_ridge(empty, 1.0), invalid_input_error);
    CHECK_THROWS_AS(fit_flextclus(empty, Hyperparams{}), invalid_input_error);
}
