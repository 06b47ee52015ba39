#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

#include "flextclus/dataset.hpp"

namespace flextclus {

// 17 significant digits: every double round-trips through text exactly.
std::string format_double(double x);
double parse_double(const std::string& s);

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& M);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

void write_int_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXi& M);
Eigen::MatrixXi read_int_matrix_csv(const std::filesystem::path& path);

// Sample format: header `task,y,x1,...,xD`, one record per sample,
// task ids 0-based contiguous integers.
void write_multitask_csv(const std::filesystem::path& path, const MultiTaskDataset& ds);
MultiTaskDataset read_multitask_csv(const std::filesystem::path& path);

}  // namespace flextclus
