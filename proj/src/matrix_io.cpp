#include "flextclus/matrix_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace flextclus {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input_error("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw invalid_input_error("cannot open " + path.string() + " for writing");
    return out;
}

long parse_int(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') {
        throw invalid_input_error("bad integer '" + s + "' in " + where);
    }
    return v;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw invalid_input_error("bad number '" + s + "'");
    }
    return v;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& M) {
    auto out = open_for_write(path);
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            if (c) out << ',';
            out << format_double(M(r, c));
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_double(f));
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw invalid_input_error(path.string() + ": ragged rows");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw invalid_input_error(path.string() + ": empty matrix");
    Eigen::MatrixXd M(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return M;
}

void write_int_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXi& M) {
    auto out = open_for_write(path);
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            if (c) out << ',';
            out << M(r, c);
        }
        out << '\n';
    }
}

Eigen::MatrixXi read_int_matrix_csv(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    std::vector<std::vector<int>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        std::vector<int> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            row.push_back(static_cast<int>(parse_int(f, path.string())));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw invalid_input_error(path.string() + ": ragged rows");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw invalid_input_error(path.string() + ": empty matrix");
    Eigen::MatrixXi M(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return M;
}

void write_multitask_csv(const std::filesystem::path& path, const MultiTaskDataset& ds) {
    auto out = open_for_write(path);
    out << "task,y";
    for (Eigen::Index c = 0; c < ds.feature_dim; ++c) out << ",x" << (c + 1);
    out << '\n';
    for (int t = 0; t < ds.T(); ++t) {
        const TaskData& td = ds.tasks[t];
        for (Eigen::Index r = 0; r < td.X.rows(); ++r) {
            out << t << ',' << format_double(td.y[r]);
            for (Eigen::Index c = 0; c < td.X.cols(); ++c) {
                out << ',' << format_double(td.X(r, c));
            }
            out << '\n';
        }
    }
}

MultiTaskDataset read_multitask_csv(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw invalid_input_error(path.string() + ": missing header");
    }
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "task" || header[1] != "y") {
        throw invalid_input_error(path.string() + ": header must start with task,y");
    }
    const Eigen::Index D = static_cast<Eigen::Index>(header.size()) - 2;

    std::vector<std::vector<double>> ys;
    std::vector<std::vector<Eigen::VectorXd>> xs;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<Eigen::Index>(fields.size()) != D + 2) {
            throw invalid_input_error(path.string() + ": line " + std::to_string(line_no) +
                                      " has " + std::to_string(fields.size()) +
                                      " fields, expected " + std::to_string(D + 2));
        }
        const long task = parse_int(fields[0], path.string());
        if (task < 0) {
            throw invalid_input_error(path.string() + ": negative task id at line " +
                                      std::to_string(line_no));
        }
        if (static_cast<std::size_t>(task) >= ys.size()) {
            ys.resize(static_cast<std::size_t>(task) + 1);
            xs.resize(static_cast<std::size_t>(task) + 1);
        }
        ys[static_cast<std::size_t>(task)].push_back(parse_double(fields[1]));
        Eigen::VectorXd row(D);
        for (Eigen::Index c = 0; c < D; ++c) {
            row[c] = parse_double(fields[static_cast<std::size_t>(c) + 2]);
        }
        xs[static_cast<std::size_t>(task)].push_back(std::move(row));
    }
    if (ys.empty()) throw invalid_input_error(path.string() + ": no samples");

    MultiTaskDataset ds;
    ds.feature_dim = D;
    ds.tasks.resize(ys.size());
    for (std::size_t t = 0; t < ys.size(); ++t) {
        if (ys[t].empty()) {
            throw invalid_input_error(path.string() + ": task ids are not contiguous (task " +
                                      std::to_string(t) + " has no samples)");
        }
        TaskData& td = ds.tasks[t];
        const Eigen::Index n = static_cast<Eigen::Index>(ys[t].size());
        td.X.resize(n, D);
        td.y.resize(n);
        for (Eigen::Index r = 0; r < n; ++r) {
            td.y[r] = ys[t][static_cast<std::size_t>(r)];
            td.X.row(r) = xs[t][static_cast<std::size_t>(r)];
        }
    }
    return ds;
}

}  // namespace flextclus
