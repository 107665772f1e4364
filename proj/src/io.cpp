#include "bolasso/io.hpp"

#include "bolasso/errors.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bolasso {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_number(const std::string& s, double& v) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), v);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    CsvTable table;
    std::vector<std::vector<double>> rows;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_line(line);
        std::vector<double> row(cells.size());
        bool numeric = true;
        for (size_t i = 0; i < cells.size() && numeric; ++i) numeric = parse_number(cells[i], row[i]);
        if (!numeric) {
            if (rows.empty() && table.header.empty()) {
                table.header = cells;
                continue;
            }
            throw InputError(path + ":" + std::to_string(line_no) + ": non-numeric value");
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError(path + ":" + std::to_string(line_no) + ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    const auto cols = rows.empty() ? static_cast<Eigen::Index>(table.header.size())
                                   : static_cast<Eigen::Index>(rows.front().size());
    if (!table.header.empty() && static_cast<Eigen::Index>(table.header.size()) != cols)
        throw InputError(path + ": header and data column counts differ");
    table.values.resize(static_cast<Eigen::Index>(rows.size()), cols);
    for (size_t i = 0; i < rows.size(); ++i)
        for (Eigen::Index j = 0; j < cols; ++j) table.values(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<size_t>(j)];
    return table;
}

void write_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& header) {
    std::ostringstream out;
    for (size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    if (!header.empty()) out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_double(values(i, j));
        out << '\n';
    }
    write_text(path, out.str());
}

Dataset read_dataset(const std::string& path) {
    const CsvTable t = read_csv(path);
    if (t.values.cols() < 2) throw InputError(path + ": a dataset needs at least one covariate column and a response");
    Dataset d(t.values.leftCols(t.values.cols() - 1), t.values.col(t.values.cols() - 1));
    d.validate();
    return d;
}

void write_dataset(const std::string& path, const Dataset& data) {
    std::vector<std::string> header;
    for (Eigen::Index j = 0; j < data.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
    header.emplace_back("y");
    Matrix all(data.rows(), data.cols() + 1);
    all << data.X, data.y;
    write_csv(path, all, header);
}

Vector read_vector(const std::string& path) {
    const CsvTable t = read_csv(path);
    if (t.values.cols() == 1) return t.values.col(0);
    if (t.values.rows() == 1) return t.values.row(0).transpose();
    throw InputError(path + ": expected a single row or column");
}

void write_vector(const std::string& path, const Vector& v, const std::string& name) {
    write_csv(path, Matrix(v), {name});
}

void write_path_table(const std::string& path, const RegularizationPath& reg_path) {
    std::ostringstream out;
    const auto p = reg_path.dim();
    out << "mu,active";
    for (Eigen::Index j = 0; j < p; ++j) out << ",w" << j + 1;
    out << '\n';
    for (double mu : reg_path.breakpoints()) {
        const LassoSolution s = reg_path.solve_at(mu);
        out << format_double(mu) << ',';
        for (size_t k = 0; k < s.support.size(); ++k) out << (k ? " " : "") << s.support[k] + 1;
        for (Eigen::Index j = 0; j < p; ++j) out << ',' << format_double(s.weights[j]);
        out << '\n';
    }
    write_text(path, out.str());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ensure_output_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
    const fs::path probe = fs::path(dir) / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw IoError("output directory '" + dir + "' is not writable");
    }
    fs::remove(probe, ec);
}

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace bolasso
