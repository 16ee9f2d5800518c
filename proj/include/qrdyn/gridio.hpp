#pragma once

#include "qrdyn/geometry.hpp"

#include <string>
#include <vector>

namespace qrdyn::gridio {

// One axis of a scan grid: n evenly spaced values spanning [lo, hi]
// (n == 1 takes the midpoint).
struct GridSpec {
    double lo = -1.0;
    double hi = 1.0;
    int n = 1;
};

std::vector<double> axis_values(const GridSpec& spec);

// Cartesian product of the axis over `dim` coordinates, in lexicographic
// index order (last coordinate fastest).
std::vector<PointN> cube_grid(const GridSpec& spec, int dim);

// Shortest decimal representation that round-trips a double.
std::string format_double(double value);

// Tabular scan result: named columns, data rows, and a max/mean summary
// of the last column.
struct ScanTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    double summary_max() const;
    double summary_mean() const;
    std::string to_csv() const;
    std::string to_json() const;
};

// Write via temp file + rename so interrupted runs never leave a
// truncated file.
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

// n x n matrix from a JSON array of rows or whitespace-separated text.
Mat read_matrix_file(const std::string& path);
Mat parse_matrix_text(const std::string& text);

PointN parse_point(const std::string& csv);
GridSpec parse_grid_spec(const std::string& csv);

}  // namespace qrdyn::gridio
