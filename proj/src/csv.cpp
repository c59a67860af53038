#include "ctsid/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ctsid {
namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_num(const std::string& cell, const std::string& path, std::size_t row) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\r')) ++used;
    if (used != cell.size() || cell.empty())
        throw CsvError(path + ": row " + std::to_string(row) + ": '" + cell +
                       "' is not a number");
    return v;
}

}  // namespace

void write_table_csv(const std::string& path, const std::vector<std::string>& columns,
                     const Eigen::MatrixXd& values) {
    if (values.size() > 0 && static_cast<Eigen::Index>(columns.size()) != values.cols())
        throw CsvError(path + ": header and value column counts differ");
    std::ofstream f(path);
    if (!f) throw CsvError(path + ": cannot open for writing");
    for (std::size_t j = 0; j < columns.size(); ++j)
        f << (j ? "," : "") << columns[j];
    f << "\n";
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j)
            f << (j ? "," : "") << fmt(values(i, j));
        f << "\n";
    }
    if (!f) throw CsvError(path + ": write failed");
}

NumericTable read_table_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw CsvError(path + ": cannot open");
    std::string line;
    if (!std::getline(f, line)) throw CsvError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    NumericTable t;
    t.columns = split_row(line);
    if (t.columns.empty()) throw CsvError(path + ": empty header");
    std::vector<double> flat;
    std::size_t rows = 0;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() != t.columns.size())
            throw CsvError(path + ": row " + std::to_string(rows + 1) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(t.columns.size()));
        for (const auto& c : cells) flat.push_back(parse_num(c, path, rows + 1));
        ++rows;
    }
    t.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.columns.size()));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < t.columns.size(); ++j)
            t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                flat[i * t.columns.size() + j];
    return t;
}

void write_dataset_csv(const std::string& path, const DataSet& data) {
    const Eigen::Index n = data.size();
    if (n < 1) throw CsvError(path + ": dataset is empty");
    if (data.y.size() != n || (data.has_shadows && (data.u0.size() != n || data.y0.size() != n)))
        throw CsvError(path + ": dataset columns have mismatched lengths");
    std::vector<std::string> cols = {"t", "u", "y"};
    Eigen::MatrixXd values(n, data.has_shadows ? 5 : 3);
    for (Eigen::Index k = 0; k < n; ++k) values(k, 0) = static_cast<double>(k) * data.h;
    values.col(1) = data.u;
    values.col(2) = data.y;
    if (data.has_shadows) {
        cols.push_back("u0");
        cols.push_back("y0");
        values.col(3) = data.u0;
        values.col(4) = data.y0;
    }
    write_table_csv(path, cols, values);
}

DataSet read_dataset_csv(const std::string& path) {
    const NumericTable t = read_table_csv(path);
    const bool shadows = t.columns == std::vector<std::string>{"t", "u", "y", "u0", "y0"};
    if (!shadows && t.columns != std::vector<std::string>{"t", "u", "y"})
        throw CsvError(path + ": header must be t,u,y or t,u,y,u0,y0");
    if (t.values.rows() < 2) throw CsvError(path + ": need at least two samples");
    const Eigen::VectorXd tcol = t.values.col(0);
    const double h = tcol[1] - tcol[0];
    if (!(h > 0.0)) throw CsvError(path + ": time column must be strictly increasing");
    for (Eigen::Index k = 1; k < tcol.size(); ++k)
        if (std::abs(tcol[k] - tcol[k - 1] - h) > 1e-6 * h)
            throw CsvError(path + ": time column is not uniformly spaced at row " +
                           std::to_string(k + 1));
    DataSet d;
    d.h = h;
    d.u = t.values.col(1);
    d.y = t.values.col(2);
    d.has_shadows = shadows;
    if (shadows) {
        d.u0 = t.values.col(3);
        d.y0 = t.values.col(4);
    }
    return d;
}

}  // namespace ctsid
