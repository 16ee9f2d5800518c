#include "qrdyn/gridio.hpp"

#include "qrdyn/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qrdyn::gridio {

std::vector<double> axis_values(const GridSpec& spec) {
    if (spec.n < 1) throw domain_error("grid resolution must be >= 1");
    if (!(spec.lo <= spec.hi)) throw domain_error("grid bounds out of order");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(spec.n));
    if (spec.n == 1) {
        values.push_back(0.5 * (spec.lo + spec.hi));
        return values;
    }
    const double step = (spec.hi - spec.lo) / (spec.n - 1);
    for (int i = 0; i < spec.n; ++i) values.push_back(spec.lo + step * i);
    return values;
}

std::vector<PointN> cube_grid(const GridSpec& spec, int dim) {
    if (dim < 1) throw domain_error("grid dimension must be positive");
    const std::vector<double> axis = axis_values(spec);
    std::vector<PointN> grid;
    std::vector<int> index(static_cast<std::size_t>(dim), 0);
    const std::size_t total = [&] {
        std::size_t t = 1;
        for (int d = 0; d < dim; ++d) t *= axis.size();
        return t;
    }();
    grid.reserve(total);
    for (;;) {
        PointN p(dim);
        for (int d = 0; d < dim; ++d) p[d] = axis[static_cast<std::size_t>(index[d])];
        grid.push_back(p);
        int d = dim - 1;
        while (d >= 0 && ++index[static_cast<std::size_t>(d)] == static_cast<int>(axis.size())) {
            index[static_cast<std::size_t>(d)] = 0;
            --d;
        }
        if (d < 0) break;
    }
    return grid;
}

std::string format_double(double value) {
    // shortest representation that parses back exactly
    for (int precision : {15, 16, 17}) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) return buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

double ScanTable::summary_max() const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& row : rows)
        if (!row.empty()) best = std::max(best, row.back());
    return best;
}

double ScanTable::summary_mean() const {
    if (rows.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& row : rows)
        if (!row.empty()) sum += row.back();
    return sum / static_cast<double>(rows.size());
}

std::string ScanTable::to_csv() const {
    std::ostringstream out;
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << format_double(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
    out << "summary,max," << format_double(summary_max()) << ",mean,"
        << format_double(summary_mean()) << "\n";
    return out.str();
}

std::string ScanTable::to_json() const {
    nlohmann::ordered_json doc;
    doc["columns"] = columns;
    doc["rows"] = rows;
    doc["summary"] = {{"column", columns.empty() ? "" : columns.back()},
                      {"max", summary_max()},
                      {"mean", summary_mean()}};
    return doc.dump(2) + "\n";
}

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path temp = target.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw domain_error("cannot open for writing: " + temp.string());
        out << content;
        if (!out.flush()) throw domain_error("write failed: " + temp.string());
    }
    std::error_code ec;
    fs::rename(temp, target, ec);
    if (ec) {
        fs::remove(temp);
        throw domain_error("rename failed for " + path + ": " + ec.message());
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw domain_error("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Mat parse_matrix_text(const std::string& text) {
    // JSON array-of-rows, or whitespace text: n rows of n reals
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw parse_error(std::string("matrix JSON: ") + e.what());
        }
        if (!doc.is_array() || doc.empty()) throw parse_error("matrix JSON must be an array of rows");
        const std::size_t n = doc.size();
        Mat a(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!doc[i].is_array() || doc[i].size() != n)
                throw parse_error("matrix JSON rows must all have length n");
            for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = doc[i][j].get<double>();
        }
        return a;
    }

    std::vector<std::vector<double>> rows;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::vector<double> row;
        double v;
        while (fields >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw parse_error("matrix text is empty");
    const std::size_t n = rows.size();
    Mat a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) throw parse_error("matrix text must be n rows of n reals");
        for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return a;
}

Mat read_matrix_file(const std::string& path) { return parse_matrix_text(read_text(path)); }

PointN parse_point(const std::string& csv) {
    std::vector<double> values;
    std::istringstream in(csv);
    std::string token;
    while (std::getline(in, token, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(token, &used));
            if (used != token.size() && token.find_first_not_of(" \t", used) != std::string::npos)
                throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw parse_error("bad coordinate '" + token + "' in point '" + csv + "'");
        }
    }
    if (values.empty()) throw parse_error("empty point");
    PointN p(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) p[static_cast<Eigen::Index>(i)] = values[i];
    return p;
}

GridSpec parse_grid_spec(const std::string& csv) {
    const PointN v = parse_point(csv);
    if (v.size() != 3) throw parse_error("grid spec must be lo,hi,n");
    GridSpec spec;
    spec.lo = v[0];
    spec.hi = v[1];
    const double n = v[2];
    if (n < 1.0 || n != std::floor(n)) throw parse_error("grid resolution must be a positive integer");
    spec.n = static_cast<int>(n);
    return spec;
}

}  // namespace qrdyn::gridio
