#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "flextclus/dataset.hpp"
#include "flextclus/errors.hpp"
#include "flextclus/estimators.hpp"
#include "flextclus/evalkit.hpp"
#include "flextclus/matrix_io.hpp"
#include "flextclus/penalty.hpp"
#include "flextclus/prox.hpp"
#include "flextclus/rng.hpp"
#include "flextclus/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace flextclus;

// A JSON config file supplies defaults; flags given on the command line win.
// The file is read before CLI11 parses, so bound variables start at the
// configured values and explicit flags simply overwrite them.
json load_config(int argc, char** argv) {
    std::string path;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0) path = a.substr(9);
    }
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw invalid_input_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw invalid_input_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw invalid_input_error("config root must be a JSON object");
    return j;
}

template <typename T>
void from_cfg(const json& cfg, const char* key, T& slot) {
    if (!cfg.contains(key)) return;
    try {
        slot = cfg.at(key).get<T>();
    } catch (const json::exception&) {
        throw invalid_input_error(std::string("config key has the wrong type: ") + key);
    }
}

void write_trace_csv(const fs::path& path, const std::vector<double>& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input_error("cannot write " + path.string());
    out << "iter,objective\n";
    for (std::size_t k = 0; k < trace.size(); ++k)
        out << k + 1 << ',' << format_double(trace[k]) << '\n';
}

struct SynthParams {
    std::string scenario = "C2", out = ".";
    std::uint64_t seed = 0;
    int D = 30, T = 10, n = 30, n_val = 100, n_test = 100;
    double sigma2 = 400.0;
    int clusters = 3;
    double rho = 5.0;
    int threads = 0;  // accepted for interface uniformity; generation is serial
};

int cmd_synth(const SynthParams& p) {
    ScenarioSpec spec;
    spec.scenario = parse_scenario(p.scenario);
    spec.D = p.D;
    spec.T = p.T;
    spec.n_train = p.n;
    spec.n_val = p.n_val;
    spec.n_test = p.n_test;
    spec.sigma2 = p.sigma2;
    spec.seed = p.seed;
    spec.cr_clusters = p.clusters;
    spec.cr_rho = p.rho;
    const SynthData data = generate(spec);

    const fs::path out(p.out);
    fs::create_directories(out);
    write_multitask_csv(out / "train.csv", data.train);
    write_multitask_csv(out / "val.csv", data.val);
    write_multitask_csv(out / "test.csv", data.test);
    write_matrix_csv(out / "W_check.csv", data.truth.W_check);
    write_int_matrix_csv(out / "labels.csv", data.truth.labels);

    json manifest{{"command", "synth"},
                  {"scenario", scenario_name(spec.scenario)},
                  {"seed", spec.seed},
                  {"D", spec.D},
                  {"T", spec.T},
                  {"n_train", spec.n_train},
                  {"n_val", spec.n_val},
                  {"n_test", spec.n_test},
                  {"sigma2", spec.sigma2},
                  {"files", {"train.csv", "val.csv", "test.csv", "W_check.csv", "labels.csv"}}};
    if (spec.scenario == Scenario::CR) {
        manifest["clusters"] = spec.cr_clusters;
        manifest["rho"] = spec.cr_rho;
    }
    std::ofstream(out / "manifest.json") << manifest.dump(2) << "\n";
    std::printf("%s\n", manifest.dump(2).c_str());
    return 0;
}

struct FitParams {
    std::string data, out = ".", method = "flextclus";
    double lambda1 = 0.0, lambda2 = 0.0, lambda3 = 0.0, kappa = 1.0;
    int max_iters = 10000;
    double rel_tol = 1e-10;
    double tol = 0.0;
    int threads = 0;
    bool standardize = true, power_init = false;
};

int cmd_fit(const FitParams& p) {
    const MultiTaskDataset ds = read_multitask_csv(p.data);
    validate_or_throw(ds);

    FitOptions fo;
    fo.standardize = p.standardize;
    fo.solve.threads = p.threads;
    fo.solve.power_init = p.power_init;
    fo.solve.record_trace = true;
    const Hyperparams hp{p.lambda1, p.lambda2, p.lambda3, p.max_iters, p.rel_tol};

    FittedModel model;
    if (p.method == "flextclus") model = fit_flextclus(ds, hp, fo);
    else if (p.method == "adaptive") model = fit_adaptive_flextclus(ds, hp, fo);
    else if (p.method == "ridge") model = fit_ridge(ds, p.kappa, fo);
    else if (p.method == "pooling") model = fit_pooling(ds, p.kappa, fo);
    else throw invalid_input_error("unknown method: " + p.method);

    const fs::path out(p.out);
    fs::create_directories(out);
    save_model(model, out);
    const ClusterMatrix labels = extract_clusters(model.state.U, p.tol);
    write_int_matrix_csv(out / "clusters.csv", labels);
    cluster_heatmap_svg(labels, out / "clusters.svg");
    write_trace_csv(out / "trace.csv", model.report.trace);

    std::printf("fit method=%s iterations=%d converged=%d\n", model.method.c_str(),
                model.report.iterations, model.report.converged ? 1 : 0);
    return 0;
}

struct BenchParams {
    std::vector<std::string> scenarios{"C1", "C2", "C3", "C4", "C5", "C6"};
    std::vector<std::string> methods{"ridge", "pooling", "flextclus", "adaptive"};
    std::string out = "results.csv";
    int reps = 10;
    std::uint64_t seed = 0;
    int threads = 0;
    std::vector<double> grid;
    int D = 30, T = 10, n = 30, n_val = 100, n_test = 100;
    double sigma2 = 400.0;
};

int cmd_bench(const BenchParams& p) {
    std::vector<Scenario> scens;
    scens.reserve(p.scenarios.size());
    for (const auto& s : p.scenarios) scens.push_back(parse_scenario(s));

    BenchmarkOptions bo;
    bo.repetitions = p.reps;
    bo.seed = p.seed;
    bo.threads = p.threads;
    bo.lambda_grid = p.grid;
    bo.base.D = p.D;
    bo.base.T = p.T;
    bo.base.n_train = p.n;
    bo.base.n_val = p.n_val;
    bo.base.n_test = p.n_test;
    bo.base.sigma2 = p.sigma2;

    const std::vector<BenchmarkEntry> entries = run_benchmark(scens, p.methods, bo);

    std::ofstream csv(p.out, std::ios::binary);
    if (!csv) throw invalid_input_error("cannot write " + p.out);
    csv << "scenario,method,mean_nmse,std_nmse,rank\n";
    for (const auto& e : entries)
        csv << e.scenario << ',' << e.method << ',' << format_double(e.mean_nmse) << ','
            << format_double(e.std_nmse) << ',' << e.rank << '\n';

    std::printf("%-10s %-12s %12s %10s %6s\n", "scenario", "method", "mean NMSE", "± std", "rank");
    for (const auto& e : entries)
        std::printf("%-10s %-12s %12.3f %10.3f %6d\n", e.scenario.c_str(), e.method.c_str(),
                    e.mean_nmse, e.std_nmse, e.rank);
    return 0;
}

struct PredictParams {
    std::string model, data, out = "predictions.csv";
};

int cmd_predict(const PredictParams& p) {
    const FittedModel model = load_model(p.model);
    const MultiTaskDataset ds = read_multitask_csv(p.data);
    if (ds.feature_dim != model.transform.feature_dim)
        throw invalid_input_error("feature dimension mismatch: model expects D=" +
                                  std::to_string(model.transform.feature_dim) + ", data has D=" +
                                  std::to_string(ds.feature_dim));
    if (ds.T() > static_cast<int>(model.transform.tasks.size()))
        throw invalid_input_error("task count mismatch: model has T=" +
                                  std::to_string(model.transform.tasks.size()) + ", data has T=" +
                                  std::to_string(ds.T()));

    std::ofstream out(p.out, std::ios::binary);
    if (!out) throw invalid_input_error("cannot write " + p.out);
    out << "task,y_hat\n";
    for (int t = 0; t < ds.T(); ++t) {
        const Eigen::VectorXd pred = predict(model, ds.tasks[t].X, t);
        for (Eigen::Index i = 0; i < pred.size(); ++i)
            out << t << ',' << format_double(pred(i)) << '\n';
    }
    return 0;
}

struct ProxcheckParams {
    int trials = 1000;
    std::uint64_t seed = 0;
    std::string out = "proxcheck_failure.json";
    bool inject_fault = false;
};

int cmd_proxcheck(const ProxcheckParams& p) {
    const PenaltySpec pen = uniform_penalty();
    double worst_obj_gap = 0.0, worst_coord_gap = 0.0;
    for (int trial = 0; trial < p.trials; ++trial) {
        Pcg32 s = make_stream(p.seed, 11, static_cast<std::uint64_t>(trial));
        const int T = 2 + static_cast<int>(s.bounded(7));
        const double l1 = s.uniform(0.0, 20.0);
        const double l2 = s.uniform(0.0, 20.0);
        Eigen::VectorXd u_hat(T);
        for (int t = 0; t < T; ++t) u_hat(t) = s.uniform(-10.0, 10.0);

        const RankCoeffs rc = rank_coeffs(pen, l1, T, 0);
        Eigen::VectorXd fast = prox_row(u_hat, rc, l2);
        if (p.inject_fault) fast(0) += 1e-3;
        const Eigen::VectorXd oracle = oracle_prox_row(u_hat, pen, 0, l1, l2);

        const double obj_gap = std::abs(prox_objective(fast, u_hat, pen, 0, l1, l2) -
                                        prox_objective(oracle, u_hat, pen, 0, l1, l2));
        const double coord_gap = (fast - oracle).cwiseAbs().maxCoeff();
        worst_obj_gap = std::max(worst_obj_gap, obj_gap);
        worst_coord_gap = std::max(worst_coord_gap, coord_gap);
        if (obj_gap > 1e-9 || coord_gap > 1e-7) {
            std::vector<double> uh(u_hat.begin(), u_hat.end());
            std::vector<double> fa(fast.begin(), fast.end());
            std::vector<double> orc(oracle.begin(), oracle.end());
            const json replay{{"trial", trial},         {"seed", p.seed},
                              {"T", T},                 {"lambda1_hat", l1},
                              {"lambda2_hat", l2},      {"u_hat", uh},
                              {"prox", fa},             {"oracle", orc},
                              {"objective_gap", obj_gap}, {"coordinate_gap", coord_gap}};
            std::ofstream rf(p.out, std::ios::binary);
            rf << replay.dump(2) << '\n';
            std::fprintf(stderr,
                         "proxcheck: mismatch at trial %d (objective gap %s, coordinate gap %s); "
                         "instance written to %s\n",
                         trial, format_double(obj_gap).c_str(), format_double(coord_gap).c_str(),
                         p.out.c_str());
            return 1;
        }
    }
    std::printf("proxcheck: %d instances ok (worst objective gap %s, worst coordinate gap %s)\n",
                p.trials, format_double(worst_obj_gap).c_str(),
                format_double(worst_coord_gap).c_str());
    return 0;
}

int run(int argc, char** argv) {
    const json cfg = load_config(argc, argv);

    CLI::App app{"multitask regression with flexible per-feature task clusters"};
    app.require_subcommand(1);
    std::string config_path;

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON file with defaults; explicit flags win");
    };

    SynthParams sy;
    from_cfg(cfg, "scenario", sy.scenario);
    from_cfg(cfg, "seed", sy.seed);
    from_cfg(cfg, "out", sy.out);
    from_cfg(cfg, "D", sy.D);
    from_cfg(cfg, "T", sy.T);
    from_cfg(cfg, "n", sy.n);
    from_cfg(cfg, "n_val", sy.n_val);
    from_cfg(cfg, "n_test", sy.n_test);
    from_cfg(cfg, "sigma2", sy.sigma2);
    from_cfg(cfg, "clusters", sy.clusters);
    from_cfg(cfg, "rho", sy.rho);
    auto* synth = app.add_subcommand("synth", "generate a synthetic scenario dataset");
    add_config(synth);
    synth->add_option("--scenario", sy.scenario, "C1..C6 or CR");
    synth->add_option("--seed", sy.seed, "generator seed");
    synth->add_option("--out", sy.out, "output directory");
    synth->add_option("--D", sy.D, "feature count");
    synth->add_option("--T", sy.T, "task count");
    synth->add_option("--n", sy.n, "training samples per task");
    synth->add_option("--n-val", sy.n_val, "validation samples per task");
    synth->add_option("--n-test", sy.n_test, "test samples per task");
    synth->add_option("--sigma2", sy.sigma2, "noise variance");
    synth->add_option("--clusters", sy.clusters, "CR only: cluster count");
    synth->add_option("--rho", sy.rho, "CR only: cluster separation");
    synth->add_option("--threads", sy.threads, "ignored; generation is serial")->group("");

    FitParams fp;
    from_cfg(cfg, "data", fp.data);
    from_cfg(cfg, "out", fp.out);
    from_cfg(cfg, "method", fp.method);
    from_cfg(cfg, "lambda1", fp.lambda1);
    from_cfg(cfg, "lambda2", fp.lambda2);
    from_cfg(cfg, "lambda3", fp.lambda3);
    from_cfg(cfg, "kappa", fp.kappa);
    from_cfg(cfg, "max_iters", fp.max_iters);
    from_cfg(cfg, "rel_tol", fp.rel_tol);
    from_cfg(cfg, "tol", fp.tol);
    from_cfg(cfg, "threads", fp.threads);
    from_cfg(cfg, "standardize", fp.standardize);
    from_cfg(cfg, "power_init", fp.power_init);
    auto* fit = app.add_subcommand("fit", "fit a model and write parameters plus cluster maps");
    add_config(fit);
    fit->add_option("--data", fp.data, "training data CSV (task,y,x1..xD)");
    fit->add_option("--out", fp.out, "output directory");
    fit->add_option("--method", fp.method, "flextclus | adaptive | ridge | pooling");
    fit->add_option("--lambda1", fp.lambda1, "cluster penalty weight");
    fit->add_option("--lambda2", fp.lambda2, "shared-part ridge weight");
    fit->add_option("--lambda3", fp.lambda3, "task-part ridge weight");
    fit->add_option("--kappa", fp.kappa, "ridge/pooling regularizer");
    fit->add_option("--max-iters", fp.max_iters, "iteration cap");
    fit->add_option("--rel-tol", fp.rel_tol, "relative objective stopping tolerance");
    fit->add_option("--tol", fp.tol, "cluster extraction gap tolerance");
    fit->add_option("--threads", fp.threads, "worker threads (0 = all)");
    fit->add_flag("--standardize,!--no-standardize", fp.standardize,
                  "standardize features per task before fitting");
    fit->add_flag("--power-init", fp.power_init, "seed the step size by power iteration");

    BenchParams bp;
    from_cfg(cfg, "scenarios", bp.scenarios);
    from_cfg(cfg, "methods", bp.methods);
    from_cfg(cfg, "out", bp.out);
    from_cfg(cfg, "reps", bp.reps);
    from_cfg(cfg, "seed", bp.seed);
    from_cfg(cfg, "threads", bp.threads);
    from_cfg(cfg, "grid", bp.grid);
    from_cfg(cfg, "D", bp.D);
    from_cfg(cfg, "T", bp.T);
    from_cfg(cfg, "n", bp.n);
    from_cfg(cfg, "n_val", bp.n_val);
    from_cfg(cfg, "n_test", bp.n_test);
    from_cfg(cfg, "sigma2", bp.sigma2);
    auto* bench = app.add_subcommand("bench", "scenario benchmark with validation-tuned methods");
    add_config(bench);
    bench->add_option("--scenarios", bp.scenarios, "scenario list")->delimiter(',');
    bench->add_option("--methods", bp.methods, "method list")->delimiter(',');
    bench->add_option("--out", bp.out, "results CSV path");
    bench->add_option("--reps", bp.reps, "repetitions per scenario");
    bench->add_option("--seed", bp.seed, "benchmark seed");
    bench->add_option("--threads", bp.threads, "worker threads (0 = all)");
    bench->add_option("--grid", bp.grid, "hyperparameter grid values")->delimiter(',');
    bench->add_option("--D", bp.D, "feature count");
    bench->add_option("--T", bp.T, "task count");
    bench->add_option("--n", bp.n, "training samples per task");
    bench->add_option("--n-val", bp.n_val, "validation samples per task");
    bench->add_option("--n-test", bp.n_test, "test samples per task");
    bench->add_option("--sigma2", bp.sigma2, "noise variance");

    PredictParams pp;
    from_cfg(cfg, "model", pp.model);
    from_cfg(cfg, "data", pp.data);
    from_cfg(cfg, "out", pp.out);
    auto* pred = app.add_subcommand("predict", "apply a saved model to new data");
    add_config(pred);
    pred->add_option("--model", pp.model, "model directory written by fit");
    pred->add_option("--data", pp.data, "input data CSV (task,y,x1..xD; y ignored)");
    pred->add_option("--out", pp.out, "predictions CSV path");

    ProxcheckParams xp;
    from_cfg(cfg, "trials", xp.trials);
    from_cfg(cfg, "seed", xp.seed);
    from_cfg(cfg, "out", xp.out);
    auto* prox = app.add_subcommand("proxcheck", "fuzz the row prox against the brute-force oracle");
    add_config(prox);
    prox->add_option("--trials", xp.trials, "instance count")->check(CLI::PositiveNumber);
    prox->add_option("--seed", xp.seed, "fuzz seed");
    prox->add_option("--out", xp.out, "replay file written on mismatch");
    prox->add_flag("--inject-prox-fault", xp.inject_fault)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*synth) return cmd_synth(sy);
    if (*fit) return cmd_fit(fp);
    if (*bench) return cmd_bench(bp);
    if (*pred) return cmd_predict(pp);
    if (*prox) return cmd_proxcheck(xp);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const divergence_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const invalid_input_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
