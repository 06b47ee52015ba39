#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flextclus/dataset.hpp"
#include "flextclus/estimators.hpp"

namespace flextclus {

// C1: independent tasks.  C2: one cluster.  C3: one cluster with one
// corrupted task weight per feature.  C4: a main cluster and two outlier
// tasks.  C5: per-feature assignment to one of two groups.  C6: clustered
// except the last two features, which scatter per task.  CR: per-feature
// cluster levels that are exactly equal within a cluster and at least rho
// apart across clusters, for the exact-recovery experiment.
enum class Scenario { C1, C2, C3, C4, C5, C6, CR };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);

struct ScenarioSpec {
    Scenario scenario = Scenario::C2;
    int D = 30, T = 10;
    int n_train = 30, n_val = 100, n_test = 100;
    double sigma2 = 400.0;
    std::uint64_t seed = 0;
    // CR only
    int cr_clusters = 3;
    double cr_rho = 5.0;
};

struct GroundTruth {
    Eigen::MatrixXd W_check;  // D x T generating weights
    Eigen::MatrixXi labels;   // D x T generating-group labels, contiguous per row
};

struct SynthData {
    MultiTaskDataset train, val, test;
    GroundTruth truth;
};

// Deterministic in (scenario, seed): weights, inputs, and noise each draw
// from their own per-task substream, so no field's layout depends on
// another's sample count.
SynthData generate(const ScenarioSpec& spec);

// Pooled test predictions of a fitted model against pooled test targets.
double dataset_nmse(const FittedModel& model, const MultiTaskDataset& split);

struct BenchmarkOptions {
    int repetitions = 10;
    std::vector<double> lambda_grid;  // defaults to 1e-3 .. 1e3, log-spaced
    std::uint64_t seed = 0;
    int threads = 0;
    // candidate fits run loose, the winner is refit tight
    double tune_rel_tol = 1e-6;
    int tune_max_iters = 2000;
    double final_rel_tol = 1e-8;
    int final_max_iters = 10000;
    ScenarioSpec base;  // sizes shared by all scenarios (scenario/seed overridden)
};

struct BenchmarkEntry {
    std::string scenario, method;
    double mean_nmse = 0.0;
    double std_nmse = 0.0;  // sample standard deviation over repetitions
    int rank = 0;           // 1 + number of strictly better methods in the scenario
};

// Per scenario and method: tune on the validation split (ridge/pooling over
// the kappa grid, the cluster solvers over the full lambda triple grid),
// refit the winner, score test NMSE; mean +- std over repetitions.
// The adaptive variant reuses the triple tuned for the plain solver.
std::vector<BenchmarkEntry> run_benchmark(const std::vector<Scenario>& scenarios,
                                          const std::vector<std::string>& methods,
                                          const BenchmarkOptions& opts);

std::vector<double> default_lambda_grid();

}  // namespace flextclus
