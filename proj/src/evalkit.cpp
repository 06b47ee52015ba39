#include "flextclus/evalkit.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "flextclus/penalty.hpp"

namespace flextclus {

double nmse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets) {
    if (predictions.size() != targets.size() || targets.size() == 0) {
        throw invalid_input_error("nmse: prediction/target length mismatch or empty");
    }
    const double n = static_cast<double>(targets.size());
    const double mse = (predictions - targets).squaredNorm() / n;
    const double mean = targets.mean();
    const double var = (targets.array() - mean).square().sum() / n;
    if (var <= 0.0) {
        throw invalid_input_error("nmse: targets have zero variance");
    }
    return mse / var;
}

double rmse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets) {
    if (predictions.size() != targets.size() || targets.size() == 0) {
        throw invalid_input_error("rmse: prediction/target length mismatch or empty");
    }
    return std::sqrt((predictions - targets).squaredNorm() /
                     static_cast<double>(targets.size()));
}

Eigen::VectorXi cluster_row(const Eigen::VectorXd& u, double tol) {
    const int T = static_cast<int>(u.size());
    const std::vector<int> perm = sorted_desc_perm(u);
    // group along the sorted chain, then relabel by first appearance
    std::vector<int> group(T, 0);
    int g = 0;
    for (int k = 1; k < T; ++k) {
        if (u[perm[k - 1]] - u[perm[k]] > tol) ++g;
        group[perm[k]] = g;
    }
    if (T > 0) group[perm[0]] = 0;

    Eigen::VectorXi labels(T);
    std::vector<int> relabel(static_cast<std::size_t>(g) + 1, -1);
    int next = 0;
    for (int t = 0; t < T; ++t) {
        int& r = relabel[static_cast<std::size_t>(group[t])];
        if (r < 0) r = next++;
        labels[t] = r;
    }
    return labels;
}

ClusterMatrix extract_clusters(const Eigen::MatrixXd& U, double tol) {
    ClusterMatrix labels(U.rows(), U.cols());
    for (Eigen::Index d = 0; d < U.rows(); ++d) {
        labels.row(d) = cluster_row(U.row(d).transpose(), tol).transpose();
    }
    return labels;
}

double rand_index(const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
    if (a.size() != b.size()) throw invalid_input_error("rand_index: length mismatch");
    const int T = static_cast<int>(a.size());
    if (T < 2) return 1.0;  // no pairs to disagree on
    long agree = 0, total = 0;
    for (int i = 0; i < T; ++i) {
        for (int j = i + 1; j < T; ++j) {
            const bool same_a = a[i] == a[j];
            const bool same_b = b[i] == b[j];
            agree += (same_a == same_b) ? 1 : 0;
            ++total;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

namespace {

constexpr int kCell = 12;  // px per matrix cell

constexpr std::array<const char*, 12> kPalette = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#2f4b7c", "#a05195"};

std::ofstream open_svg(const std::filesystem::path& path, Eigen::Index rows,
                       Eigen::Index cols) {
    std::ofstream out(path);
    if (!out) throw invalid_input_error("cannot open " + path.string() + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * kCell
        << "\" height=\"" << rows * kCell << "\" viewBox=\"0 0 " << cols * kCell << ' '
        << rows * kCell << "\">\n";
    return out;
}

void emit_cell(std::ofstream& out, Eigen::Index r, Eigen::Index c,
               const std::string& fill) {
    out << "<rect x=\"" << c * kCell << "\" y=\"" << r * kCell << "\" width=\"" << kCell
        << "\" height=\"" << kCell << "\" fill=\"" << fill << "\"/>\n";
}

}  // namespace

void cluster_heatmap_svg(const ClusterMatrix& labels, const std::filesystem::path& path) {
    auto out = open_svg(path, labels.rows(), labels.cols());
    for (Eigen::Index r = 0; r < labels.rows(); ++r) {
        for (Eigen::Index c = 0; c < labels.cols(); ++c) {
            const int l = labels(r, c);
            out << "<rect x=\"" << c * kCell << "\" y=\"" << r * kCell << "\" width=\""
                << kCell << "\" height=\"" << kCell << "\" fill=\""
                << kPalette[static_cast<std::size_t>(l) % kPalette.size()] << "\"/>\n";
        }
    }
    out << "</svg>\n";
}

void value_heatmap_svg(const Eigen::MatrixXd& M, const std::filesystem::path& path) {
    auto out = open_svg(path, M.rows(), M.cols());
    const double max_abs = M.size() > 0 ? M.cwiseAbs().maxCoeff() : 0.0;
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            // diverging around 0: blue for negative, red for positive, black at 0
            const double t = max_abs > 0.0 ? M(r, c) / max_abs : 0.0;
            const int red = t > 0.0 ? static_cast<int>(std::lround(255.0 * t)) : 0;
            const int blue = t < 0.0 ? static_cast<int>(std::lround(-255.0 * t)) : 0;
            char fill[8];
            std::snprintf(fill, sizeof(fill), "#%02x00%02x", red, blue);
            emit_cell(out, r, c, fill);
        }
    }
    out << "</svg>\n";
}

}  // namespace flextclus
