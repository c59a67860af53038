#pragma once

#include "ctsid/simulate.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace ctsid {

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Header `t,u,y` (plus `u0,y0` when the set carries noise-free shadows),
// full-precision decimals, newline-terminated rows, t = k*h.
void write_dataset_csv(const std::string& path, const DataSet& data);

// Inverse of write_dataset_csv; h is recovered from the (required uniform)
// time column.
DataSet read_dataset_csv(const std::string& path);

struct NumericTable {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
};

void write_table_csv(const std::string& path, const std::vector<std::string>& columns,
                     const Eigen::MatrixXd& values);
NumericTable read_table_csv(const std::string& path);

}  // namespace ctsid
