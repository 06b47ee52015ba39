#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "doctest.h"
#include "flextclus/dataset.hpp"
#include "flextclus/errors.hpp"
#include "flextclus/matrix_io.hpp"
#include "flextclus/penalty.hpp"
#include "flextclus/rng.hpp"

using namespace flextclus;
namespace fs = std::filesystem;

namespace {

MultiTaskDataset tiny_dataset() {
    MultiTaskDataset ds;
    ds.feature_dim = 2;
    TaskData t0;
    t0.X.resize(2, 2);
    t0.X << 1, 0, 0, 1;
    t0.y.resize(2);
    t0.y << 1, 2;
    TaskData t1;
    t1.X.resize(3, 2);
    t1.X << 1, 1, 2, 0, 0, 3;
    t1.y.resize(3);
    t1.y << -1, 0, 5;
    ds.tasks = {t0, t1};
    return ds;
}

fs::path scratch_dir() {
    static int counter = 0;
    const fs::path p = fs::temp_directory_path() /
                       ("flextclus_data_model_" + std::to_string(++counter));
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("dataset validation") {
    CHECK(validate_dataset(tiny_dataset()).empty());

    SUBCASE("no tasks") {
        MultiTaskDataset ds;
        ds.feature_dim = 2;
        CHECK(!validate_dataset(ds).empty());
        CHECK_THROWS_AS(validate_or_throw(ds), invalid_input_error);
    }
    SUBCASE("feature width mismatch") {
        MultiTaskDataset ds = tiny_dataset();
        ds.tasks[1].X.resize(3, 3);
        ds.tasks[1].X.setZero();
        CHECK(!validate_dataset(ds).empty());
    }
    SUBCASE("row and target counts differ") {
        MultiTaskDataset ds = tiny_dataset();
        ds.tasks[0].y.resize(3);
        ds.tasks[0].y.setZero();
        CHECK(!validate_dataset(ds).empty());
    }
    SUBCASE("empty task") {
        MultiTaskDataset ds = tiny_dataset();
        ds.tasks[0].X.resize(0, 2);
        ds.tasks[0].y.resize(0);
        CHECK(!validate_dataset(ds).empty());
    }
    SUBCASE("non-finite entries are located") {
        MultiTaskDataset ds = tiny_dataset();
        ds.tasks[1].X(2, 1) = std::nan("");
        const auto msgs = validate_dataset(ds);
        REQUIRE(!msgs.empty());
        bool located = false;
        for (const auto& m : msgs)
            if (m.find("task 1") != std::string::npos) located = true;
        CHECK(located);
    }
}

TEST_CASE("standardization") {
    SUBCASE("hand example") {
        MultiTaskDataset ds;
        ds.feature_dim = 1;
        TaskData t;
        t.X.resize(2, 1);
        t.X << 1, 3;
        t.y.resize(2);
        t.y << 1, 3;
        ds.tasks = {t};
        const auto [std_ds, tf] = standardize(ds);
        CHECK(tf.tasks[0].mean(0) == doctest::Approx(2.0));
        CHECK(tf.tasks[0].scale(0) == doctest::Approx(1.0));  // population sd of {1,3}
        CHECK(tf.tasks[0].y_mean == doctest::Approx(2.0));
        CHECK(std_ds.tasks[0].X(0, 0) == doctest::Approx(-1.0));
        CHECK(std_ds.tasks[0].X(1, 0) == doctest::Approx(1.0));
        CHECK(std_ds.tasks[0].y(0) == doctest::Approx(-1.0));
        CHECK(std_ds.tasks[0].y(1) == doctest::Approx(1.0));
        CHECK_FALSE(tf.any_degenerate());
    }

    SUBCASE("standardized columns have mean zero, variance one") {
        Pcg32 s = make_stream(3, 30, 0);
        MultiTaskDataset ds;
        ds.feature_dim = 4;
        for (int t = 0; t < 3; ++t) {
            TaskData td;
            td.X.resize(20, 4);
            td.y.resize(20);
            for (int i = 0; i < 20; ++i) {
                for (int d = 0; d < 4; ++d) td.X(i, d) = s.uniform(-5.0, 5.0 + d);
                td.y(i) = s.uniform(-2.0, 9.0);
            }
            ds.tasks.push_back(td);
        }
        const auto [std_ds, tf] = standardize(ds);
        for (int t = 0; t < 3; ++t) {
            for (int d = 0; d < 4; ++d) {
                const auto col = std_ds.tasks[t].X.col(d);
                CHECK(std::abs(col.mean()) <= 1e-12);
                const double var = col.squaredNorm() / 20.0 - col.mean() * col.mean();
                CHECK(var == doctest::Approx(1.0));
            }
            CHECK(std::abs(std_ds.tasks[t].y.mean()) <= 1e-12);
        }
    }

    SUBCASE("constant columns are flagged, not rejected") {
        MultiTaskDataset ds;
        ds.feature_dim = 2;
        TaskData t;
        t.X.resize(3, 2);
        t.X << 7, 1, 7, 2, 7, 3;
        t.y.resize(3);
        t.y << 1, 2, 3;
        ds.tasks = {t};
        const auto [std_ds, tf] = standardize(ds);
        CHECK(tf.any_degenerate());
        CHECK(tf.tasks[0].degenerate[0] == 1);
        CHECK(tf.tasks[0].degenerate[1] == 0);
        CHECK(tf.tasks[0].scale(0) == 1.0);
        CHECK(std_ds.tasks[0].X(0, 0) == doctest::Approx(0.0));  // centered only
    }

    SUBCASE("single-sample tasks are rejected") {
        MultiTaskDataset ds;
        ds.feature_dim = 1;
        TaskData t;
        t.X.resize(1, 1);
        t.X << 4;
        t.y.resize(1);
        t.y << 2;
        ds.tasks = {t};
        CHECK_THROWS_AS(standardize(ds), invalid_input_error);
    }

    SUBCASE("apply_transform matches the standardized training rows") {
        MultiTaskDataset ds = tiny_dataset();
        const auto [std_ds, tf] = standardize(ds);
        for (int t = 0; t < ds.T(); ++t) {
            const Eigen::MatrixXd mapped = apply_transform(tf, t, ds.tasks[t].X);
            CHECK((mapped - std_ds.tasks[t].X).cwiseAbs().maxCoeff() <= 1e-14);
        }
    }
}

TEST_CASE("objective value") {
    const PenaltySpec pen = uniform_penalty();

    SUBCASE("penalty-only terms") {
        // no samples: the loss vanishes and only the penalties remain
        MultiTaskDataset ds;
        ds.feature_dim = 1;
        TaskData empty;
        empty.X.resize(0, 1);
        empty.y.resize(0);
        ds.tasks = {empty, empty};
        ParamState st = zero_state(1, 2);
        st.U << 0, 2;
        CHECK(objective(st, ds, Hyperparams{1.0, 1.0, 0.0, 100, 1e-8}, pen) ==
              doctest::Approx(6.0));  // |0-2| + 1*(0+4)
    }

    SUBCASE("loss plus penalties") {
        MultiTaskDataset ds;
        ds.feature_dim = 1;
        TaskData t0;
        t0.X.resize(1, 1);
        t0.X << 1;
        t0.y.resize(1);
        t0.y << 2;
        TaskData t1;
        t1.X.resize(0, 1);
        t1.y.resize(0);
        ds.tasks = {t0, t1};
        ParamState st = zero_state(1, 2);
        st.U << 0, 2;
        // W = (0, 2): task-0 residual (1*0 - 2), penalty 2, ||U||^2 = 4
        CHECK(objective(st, ds, Hyperparams{1.0, 1.0, 5.0, 100, 1e-8}, pen) ==
              doctest::Approx(4.0 + 2.0 + 4.0));
    }

    SUBCASE("shape mismatch throws") {
        MultiTaskDataset ds = tiny_dataset();
        ParamState st = zero_state(3, 2);
        CHECK_THROWS_AS(objective(st, ds, Hyperparams{}, pen), invalid_input_error);
    }
}

TEST_CASE("hyperparameter validation") {
    CHECK_NOTHROW(check_hyperparams(Hyperparams{0, 0, 0, 1, 1e-10}));
    CHECK_THROWS_AS(check_hyperparams(Hyperparams{-1, 0, 0, 10, 1e-10}), invalid_input_error);
    CHECK_THROWS_AS(check_hyperparams(Hyperparams{0, -1, 0, 10, 1e-10}), invalid_input_error);
    CHECK_THROWS_AS(check_hyperparams(Hyperparams{0, 0, -1, 10, 1e-10}), invalid_input_error);
    CHECK_THROWS_AS(check_hyperparams(Hyperparams{0, 0, 0, 0, 1e-10}), invalid_input_error);
    CHECK_THROWS_AS(check_hyperparams(Hyperparams{0, 0, 0, 10, 0.0}), invalid_input_error);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(check_hyperparams(Hyperparams{inf, 0, 0, 10, 1e-10}), invalid_input_error);
}

TEST_CASE("matrix io round trips") {
    const fs::path dir = scratch_dir();

    SUBCASE("doubles survive bitwise") {
        Pcg32 s = make_stream(3, 31, 0);
        Eigen::MatrixXd M(5, 4);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 4; ++j)
                M(i, j) = s.uniform(-9.0, 9.0) * std::pow(10.0, s.uniform(-150.0, 150.0));
        M(0, 0) = 0.0;
        M(0, 1) = -0.0;
        M(1, 0) = 1e-300;
        M(1, 1) = -1.2345678901234567e300;
        write_matrix_csv(dir / "m.csv", M);
        const Eigen::MatrixXd R = read_matrix_csv(dir / "m.csv");
        REQUIRE(R.rows() == M.rows());
        REQUIRE(R.cols() == M.cols());
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 4; ++j) CHECK(std::memcmp(&R(i, j), &M(i, j), 8) == 0);
    }

    SUBCASE("format_double parses back exactly") {
        Pcg32 s = make_stream(3, 32, 0);
        for (int rep = 0; rep < 200; ++rep) {
            const double x = s.uniform(-1e6, 1e6) * std::pow(10.0, s.uniform(-20, 20));
            CHECK(parse_double(format_double(x)) == x);
        }
        CHECK_THROWS_AS(parse_double("12x"), invalid_input_error);
        CHECK_THROWS_AS(parse_double(""), invalid_input_error);
    }

    SUBCASE("integer matrices") {
        Eigen::MatrixXi M(2, 3);
        M << 1, -5, 0, 42, 7, -9;
        write_int_matrix_csv(dir / "i.csv", M);
        const Eigen::MatrixXi R = read_int_matrix_csv(dir / "i.csv");
        CHECK((R - M).cwiseAbs().maxCoeff() == 0);
    }

    SUBCASE("multitask csv round trips byte for byte") {
        const MultiTaskDataset ds = tiny_dataset();
        write_multitask_csv(dir / "a.csv", ds);
        const MultiTaskDataset back = read_multitask_csv(dir / "a.csv");
        REQUIRE(back.T() == ds.T());
        REQUIRE(back.feature_dim == ds.feature_dim);
        write_multitask_csv(dir / "b.csv", back);
        CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    }

    SUBCASE("malformed files are rejected with locations") {
        std::ofstream(dir / "ragged.csv") << "1,2\n3\n";
        CHECK_THROWS_AS(read_matrix_csv(dir / "ragged.csv"), invalid_input_error);

        std::ofstream(dir / "badnum.csv") << "1,2\n3,abc\n";
        CHECK_THROWS_AS(read_matrix_csv(dir / "badnum.csv"), invalid_input_error);

        std::ofstream(dir / "badhdr.csv") << "task,target,x1\n0,1,2\n";
        CHECK_THROWS_AS(read_multitask_csv(dir / "badhdr.csv"), invalid_input_error);

        // task ids must be 0-based and contiguous
        std::ofstream(dir / "skip.csv") << "task,y,x1\n0,1,2\n2,1,2\n";
        CHECK_THROWS_AS(read_multitask_csv(dir / "skip.csv"), invalid_input_error);

        std::ofstream(dir / "width.csv") << "task,y,x1\n0,1,2,9\n";
        CHECK_THROWS_AS(read_multitask_csv(dir / "width.csv"), invalid_input_error);

        CHECK_THROWS_AS(read_matrix_csv(dir / "missing.csv"), invalid_input_error);
    }
}
